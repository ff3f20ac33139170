use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use colorank::approx::ApproxConfig;
use colorank::basic::{basic_rank, check_rank_bound, derive_ranked, random_basic, validate_basic, validate_ranked};
use colorank::forcing::{generic_homogeneous, matching_gamma, validate_condition, verify_certificates, verify_domination};
use colorank::geometry::{defect_sweep, realize, verify_general_position, GpCertificate, DEFAULT_GP_LIMIT};
use colorank::io::{self, ChainListing, EmbeddingFile, RankListing};
use colorank::model::{rank_theta_model, validate_oracle, FiniteModel, RankedModelOracle};
use colorank::ordinal::{ord_parse, OrdinalCNF};
use colorank::report::Report;
use colorank::template::validate_embedding;
use colorank::tree::{extract_splitting_chain, rank_all, validate_tree, Approximation};
use colorank::universal::{build_universal_with, embed_coloring, embed_ranked, DEFAULT_EAGER_DEPTH, DEFAULT_SEARCH_BUDGET};
use colorank::Error;

/// Environment variable that relocates relative `--out` paths.
const OUT_DIR_VAR: &str = "COLORANK_OUT_DIR";

#[derive(Parser, Debug)]
#[command(name = "colorank", version, about = "Coloring trees, ranks, universal trees, model ranks and defect realization")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Input files; some subcommands take several.
    #[arg(long, global = true)]
    input: Vec<PathBuf>,

    /// Artifact output path; without it the artifact goes to stdout and
    /// reports to stderr.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Ordinal literal such as `5`, `w` or `w^2*3+1`.
    #[arg(long, global = true)]
    gamma: Option<String>,

    #[arg(long, global = true)]
    height: Option<usize>,

    #[arg(long, global = true)]
    depth: Option<usize>,

    #[arg(long, global = true, default_value_t = 2)]
    theta: usize,

    /// Largest number of approximations enumerated.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    budget_approx: usize,

    /// Step budget for searches and sweeps.
    #[arg(long, global = true, default_value_t = DEFAULT_SEARCH_BUDGET)]
    budget_nodes: usize,

    /// Largest approximation size enumerated.
    #[arg(long, global = true, default_value_t = 6)]
    cap: usize,

    /// Largest number of color classes realized.
    #[arg(long, global = true, default_value_t = 4)]
    mmax: usize,

    /// Seed for `corpus` only.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Starting approximation key for `chain`.
    #[arg(long, global = true)]
    start: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Check a tree, basic, ranked, condition, oracle, model, family, coloring or scene file.
    Validate,
    /// Rank every approximation of a tree or basic tree.
    Rank,
    /// Extract a splitting chain of `--depth` steps.
    Chain,
    /// Build a universal ranked tree of `--gamma` and `--height`.
    BuildUniversal,
    /// Embed a ranked tree, or a basic tree's coloring, into a universal tree.
    Embed,
    /// Compute θ-ranks and critical elements of a model.
    ModelRank,
    /// Run the generic family construction and verify its certificates.
    Force,
    /// Realize a coloring as a scene of rational points.
    Realize,
    /// Compare defects with coloring membership on every subset of a scene.
    DefectSweep,
    /// Write a random valid basic tree from `--seed`.
    Corpus,
}

/// What a subcommand produced: report lines, an optional artifact and
/// whether anything was violated.
#[derive(Default)]
struct Outcome {
    report: String,
    artifact: Option<String>,
    violated: bool,
}

impl Outcome {
    fn line(&mut self, text: impl AsRef<str>) {
        self.report.push_str(text.as_ref());
        self.report.push('\n');
    }

    fn absorb(&mut self, label: &str, r: &Report) {
        if r.is_ok() {
            self.line(format!("ok {label}"));
        } else {
            self.violated = true;
            self.line(format!("violations {label} {}", r.len()));
            self.report.push_str(&r.to_string());
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::Io(_) | Error::Precondition(_) => 2,
        Error::Budget { .. } | Error::Bounds(_) => 3,
        Error::NotFound { .. } | Error::Internal(_) => 1,
    }
}

impl Cli {
    fn cfg(&self) -> ApproxConfig {
        ApproxConfig {
            cap: self.cap,
            budget: self.budget_approx,
        }
    }

    fn input(&self, i: usize) -> colorank::Result<String> {
        let path = self
            .input
            .get(i)
            .ok_or_else(|| Error::Precondition(format!("{:?} needs at least {} --input file(s)", self.command, i + 1)))?;
        io::read_file(path)
    }

    fn gamma(&self) -> colorank::Result<Option<OrdinalCNF>> {
        self.gamma.as_deref().map(ord_parse).transpose()
    }

    fn require<T: Copy>(&self, v: Option<T>, flag: &str) -> colorank::Result<T> {
        v.ok_or_else(|| Error::Precondition(format!("{:?} needs --{flag}", self.command)))
    }

    fn out_path(&self) -> Option<PathBuf> {
        let out = self.out.clone()?;
        match std::env::var_os(OUT_DIR_VAR) {
            Some(dir) if out.is_relative() => Some(PathBuf::from(dir).join(out)),
            _ => Some(out),
        }
    }

    fn run(&self) -> colorank::Result<Outcome> {
        match self.command {
            Command::Validate => self.validate(),
            Command::Rank => self.rank(),
            Command::Chain => self.chain(),
            Command::BuildUniversal => self.build_universal(),
            Command::Embed => self.embed(),
            Command::ModelRank => self.model_rank(),
            Command::Force => self.force(),
            Command::Realize => self.realize(),
            Command::DefectSweep => self.defect_sweep(),
            Command::Corpus => self.corpus(),
        }
    }

    fn validate(&self) -> colorank::Result<Outcome> {
        let text = self.input(0)?;
        let mut out = Outcome::default();
        match first_tag(&text) {
            "tree" => out.absorb("tree", &validate_tree(&io::parse_tree(&text)?)),
            "btree" => {
                let f = io::parse_ranked(&text)?;
                out.absorb("basic", &validate_basic(&f.tree.base));
                if f.has_gamma || !f.tree.r.is_empty() {
                    let cfg = self.cfg();
                    out.absorb("ranked", &validate_ranked(&f.tree, &cfg)?);
                    out.absorb("rank-bound", &check_rank_bound(&f.tree, &cfg)?);
                }
            }
            "cond" => {
                let p = io::parse_condition(&text)?;
                let o = io::parse_oracle(&self.input(1)?)?;
                let u = io::parse_ranked(&self.input(2)?)?.tree;
                out.absorb("condition", &validate_condition(&p, &o, &u, &self.cfg()));
            }
            "oracle" | "mrank" => {
                let o = io::parse_oracle(&text)?;
                let model = self.input.get(1).map(|_| self.input(1)).transpose()?;
                let model = model.as_deref().map(io::parse_model).transpose()?;
                out.absorb("oracle", &validate_oracle(&o, model.as_ref(), self.theta));
            }
            "model" => {
                let m = io::parse_model(&text)?;
                out.line(format!("ok model m={} relations={}", m.size, m.relations.len()));
            }
            "eta" | "g" | "cert" => {
                let f = io::parse_family(&text)?;
                out.line(format!("ok family members={} pairs={}", f.family.len(), f.colors.len()));
            }
            "cm" => {
                let c = io::parse_coloring(&text)?;
                out.line(format!("ok coloring classes={}", c.len()));
            }
            "scene" => {
                let scene = io::parse_scene(&text)?;
                let (r, cert) = verify_general_position(&scene, DEFAULT_GP_LIMIT);
                out.absorb("general-position", &r);
                out.line(certificate_line(&cert));
            }
            other => {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("unknown file kind `{other}`"),
                })
            }
        }
        Ok(out)
    }

    fn rank(&self) -> colorank::Result<Outcome> {
        let text = self.input(0)?;
        let listing = match first_tag(&text) {
            "tree" => RankListing::from_report(&rank_all(&io::parse_tree(&text)?, &self.cfg())?),
            _ => RankListing::from_report(&basic_rank(&io::parse_btree(&text)?, &self.cfg())?),
        };
        let mut out = Outcome::default();
        out.line(format!("rktree {} approximations={}", listing.tree_rank, listing.values.len()));
        out.artifact = Some(io::write_rank_listing(&listing));
        Ok(out)
    }

    fn chain(&self) -> colorank::Result<Outcome> {
        let t = io::parse_tree(&self.input(0)?)?;
        let depth = self.require(self.depth, "depth")?;
        let start = match &self.start {
            Some(key) => Approximation::parse_key(key, t.arity)?,
            None => {
                let ranks = rank_all(&t, &self.cfg())?;
                ranks
                    .iter()
                    .filter(|(a, _)| a.level + depth < t.height)
                    .max_by(|(a, v), (b, w)| v.cmp(w).then(b.level.cmp(&a.level)).then(b.key().cmp(&a.key())))
                    .map(|(a, _)| a.clone())
                    .ok_or_else(|| Error::Precondition(format!("no approximation has {depth} levels above it")))?
            }
        };
        let listing = ChainListing::from_outcome(&extract_splitting_chain(&t, &start, depth, self.budget_nodes)?);
        let mut out = Outcome::default();
        out.line(format!("chain found={} length={}", listing.found, listing.links.len()));
        out.violated = !listing.found;
        out.artifact = Some(io::write_chain(&listing));
        Ok(out)
    }

    fn build_universal(&self) -> colorank::Result<Outcome> {
        let gamma = self.require(self.gamma()?.as_ref(), "gamma")?.clone();
        let height = self.require(self.height, "height")?;
        let depth = self.depth.unwrap_or(DEFAULT_EAGER_DEPTH);
        let mut u = build_universal_with(&gamma, height, depth, self.cfg())?;
        u.search_budget = self.budget_nodes;
        let mut out = Outcome::default();
        out.line(format!(
            "universal gamma={gamma} H={height} nodes={} templates-realized={}",
            u.tree.base.node_count(),
            u.realized
        ));
        out.artifact = Some(io::write_ranked(&u.tree, true));
        Ok(out)
    }

    fn embed(&self) -> colorank::Result<Outcome> {
        let file = io::parse_ranked(&self.input(0)?)?;
        let coloring_mode = !file.has_gamma && file.tree.r.is_empty();
        let cfg = self.cfg();
        let s = if coloring_mode {
            derive_ranked(&file.tree.base, &cfg)?
        } else {
            file.tree.clone()
        };
        let gamma = match self.gamma()? {
            Some(g) => g,
            None if coloring_mode => s.gamma.succ(),
            None => s.gamma.clone(),
        };
        let height = self.height.unwrap_or(s.base.height + 2);
        let mut u = build_universal_with(&gamma, height, self.depth.unwrap_or(DEFAULT_EAGER_DEPTH), cfg)?;
        u.search_budget = self.budget_nodes;
        let mut out = Outcome::default();
        let artifact = if coloring_mode {
            let ce = embed_coloring(&file.tree.base, &mut u)?;
            out.absorb("embedding", &validate_embedding(&ce.embedding, &ce.augmented, &u.tree, &cfg)?);
            out.line(format!("coloring strings={} base={}", ce.phi.len(), ce.base_point));
            EmbeddingFile {
                embedding: ce.embedding,
                phi: ce.phi,
            }
        } else {
            let e = embed_ranked(&s, &mut u)?;
            out.absorb("embedding", &validate_embedding(&e, &s, &u.tree, &cfg)?);
            EmbeddingFile {
                embedding: e,
                ..Default::default()
            }
        };
        out.line(format!("universal gamma={gamma} H={height} realized={}", u.realized));
        out.artifact = Some(io::write_embedding(&artifact));
        Ok(out)
    }

    fn oracle_input(&self, text: &str) -> colorank::Result<(RankedModelOracle, Option<FiniteModel>)> {
        if first_tag(text) == "model" {
            let m = io::parse_model(text)?;
            Ok((RankedModelOracle::from_model(&m, self.theta)?, Some(m)))
        } else {
            Ok((io::parse_oracle(text)?, None))
        }
    }

    fn model_rank(&self) -> colorank::Result<Outcome> {
        let m = io::parse_model(&self.input(0)?)?;
        let o = RankedModelOracle::from_model(&m, self.theta)?;
        let mut out = Outcome::default();
        out.line(format!(
            "model m={} theta={} rank={} sets={}",
            m.size,
            self.theta,
            rank_theta_model(&m, self.theta)?,
            o.entries.len()
        ));
        out.absorb("oracle", &validate_oracle(&o, Some(&m), self.theta));
        out.artifact = Some(io::write_oracle(&o));
        Ok(out)
    }

    fn force(&self) -> colorank::Result<Outcome> {
        let (o, _) = self.oracle_input(&self.input(0)?)?;
        let gamma = matching_gamma(&o);
        let height = self.height.unwrap_or(8);
        let depth = self.depth.unwrap_or(5);
        let cfg = self.cfg();
        let mut u = build_universal_with(&gamma, height, DEFAULT_EAGER_DEPTH, cfg)?;
        u.search_budget = self.budget_nodes;
        let generic = generic_homogeneous(&o, &mut u, depth)?;
        let mut out = Outcome::default();
        out.line(format!(
            "family members={} chain={} saturation-steps={} gamma={gamma} H={height}",
            generic.family.len(),
            generic.chain.len(),
            generic.saturation_steps
        ));
        out.absorb("certificates", &verify_certificates(&u.tree, &generic));
        let prop = verify_domination(&u.tree, &generic, &o, cfg.cap, &cfg)?;
        write!(out.report, "{prop}").unwrap();
        if !prop.is_ok() {
            out.violated = true;
        }
        out.artifact = Some(io::write_family(&generic));
        Ok(out)
    }

    fn realize(&self) -> colorank::Result<Outcome> {
        let coloring = io::parse_coloring(&self.input(0)?)?;
        let first = coloring
            .iter()
            .flatten()
            .next()
            .ok_or_else(|| Error::Precondition("coloring has no members".into()))?;
        let (arity, height) = (first.len(), first[0].len());
        let (scene, cert) = realize(&coloring, arity, height, self.mmax)?;
        let mut out = Outcome::default();
        out.line(format!(
            "scene N={arity} H={height} points={} interior-points={} disjoint-pairs={}",
            scene.points.len(),
            cert.interior_points,
            cert.disjoint_pairs
        ));
        out.line(certificate_line(&cert.general_position));
        out.artifact = Some(io::write_scene(&scene));
        Ok(out)
    }

    fn defect_sweep(&self) -> colorank::Result<Outcome> {
        let scene = io::parse_scene(&self.input(0)?)?;
        let mut out = Outcome::default();
        out.absorb("defect-sweep", &defect_sweep(&scene, self.budget_nodes)?);
        Ok(out)
    }

    fn corpus(&self) -> colorank::Result<Outcome> {
        let height = self.height.unwrap_or(4);
        if height < 2 {
            return Err(Error::Precondition("corpus needs --height of at least 2".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let t = random_basic(&mut rng, height, 2, 3, 4);
        let mut out = Outcome::default();
        out.line(format!("corpus seed={} H={height} nodes={}", self.seed, t.node_count()));
        out.artifact = Some(io::write_btree(&t));
        Ok(out)
    }
}

fn first_tag(text: &str) -> &str {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .find_map(|l| l.split_whitespace().next())
        .unwrap_or("")
}

fn certificate_line(c: &GpCertificate) -> String {
    match c {
        GpCertificate::Explicit { subsets } => format!("general-position explicit subsets={subsets}"),
        GpCertificate::Vandermonde { parameters } => format!("general-position vandermonde parameters={parameters}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.run() {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    match (cli.out_path(), &outcome.artifact) {
        (Some(path), Some(artifact)) => {
            if let Err(e) = io::write_atomic(&path, artifact) {
                eprintln!("error: {e}");
                return ExitCode::from(exit_code(&e));
            }
            print!("{}", outcome.report);
        }
        (None, Some(artifact)) => {
            eprint!("{}", outcome.report);
            print!("{artifact}");
        }
        (_, None) => print!("{}", outcome.report),
    }
    ExitCode::from(u8::from(outcome.violated))
}
