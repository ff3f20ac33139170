//! Coloring trees, approximation ranks, universal ranked trees, model
//! ranks, a homogeneous-set forcing simulator and exact convexity-defect
//! realization, all at finite truncation scale.

pub mod approx;
pub mod basic;
pub mod error;
pub mod forcing;
pub mod geometry;
pub mod io;
pub mod model;
pub mod ordinal;
pub mod report;
pub mod seq;
pub mod template;
pub mod tree;
pub mod universal;

pub use approx::{Approx, ApproxConfig, Color, RankReport};
pub use error::{Error, Result};
pub use ordinal::OrdinalCNF;
pub use report::Report;
pub use seq::Seq;
pub use tree::{Approximation, ColoringTree, TreeNode};
