//! Finite sequences of naturals (elements of ω^n) and their text encoding.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// An element of ω^n; `n` is the length.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Seq(pub Vec<u32>);

impl Seq {
    pub fn empty() -> Self {
        Seq(Vec::new())
    }

    pub fn zeros(n: usize) -> Self {
        Seq(vec![0; n])
    }

    pub fn constant(value: u32, n: usize) -> Self {
        Seq(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Restriction to the first `m` entries.
    pub fn restrict(&self, m: usize) -> Seq {
        Seq(self.0[..m.min(self.0.len())].to_vec())
    }

    pub fn is_prefix_of(&self, other: &Seq) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn child(&self, i: u32) -> Seq {
        let mut v = self.0.clone();
        v.push(i);
        Seq(v)
    }

    pub fn extend_with(&self, tail: &[u32]) -> Seq {
        let mut v = self.0.clone();
        v.extend_from_slice(tail);
        Seq(v)
    }

    pub fn last(&self) -> Option<u32> {
        self.0.last().copied()
    }
}

impl From<Vec<u32>> for Seq {
    fn from(v: Vec<u32>) -> Self {
        Seq(v)
    }
}

impl From<&[u32]> for Seq {
    fn from(v: &[u32]) -> Self {
        Seq(v.to_vec())
    }
}

/// Canonical encoding: dash-separated naturals, `e` for the empty sequence.
impl fmt::Display for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "-")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

impl FromStr for Seq {
    type Err = Error;
    fn from_str(s: &str) -> Result<Seq> {
        let s = s.trim();
        if s == "e" {
            return Ok(Seq::empty());
        }
        s.split('-')
            .map(|p| {
                p.parse::<u32>()
                    .map_err(|_| Error::parse(0, format!("bad sequence `{s}`")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Seq)
    }
}

/// Parses a compact binary string such as `0110` into a sequence.
pub fn binary(s: &str) -> Seq {
    Seq(s.bytes().map(|b| (b - b'0') as u32).collect())
}

/// All binary strings of length `n` in lexicographic order.
pub fn binary_strings(n: usize) -> Vec<Seq> {
    (0..1u64 << n)
        .map(|x| Seq((0..n).map(|i| ((x >> (n - 1 - i)) & 1) as u32).collect()))
        .collect()
}
