//! Line-oriented text formats: one record per line, `#` starts a comment,
//! fields are separated by whitespace and keyed fields read `key=value`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use itertools::Itertools;

use crate::approx::{Approx, Color, Label, RankReport};
use crate::basic::{BasicColoringTree, BasicNode, RankedTree};
use crate::error::{Error, Result};
use crate::forcing::{ForcingCondition, GenericFamily};
use crate::geometry::{ColorClass, RationalPoint, Scene};
use crate::model::{AtomicType, Elem, FiniteModel, OracleEntry, RankedModelOracle};
use crate::ordinal::{ord_parse, OrdinalCNF};
use crate::seq::Seq;
use crate::template::Embedding;
use crate::tree::{ChainOutcome, ColoringTree, TreeNode};

/// A non-empty, comment-stripped line split into fields.
struct Line<'a> {
    number: usize,
    fields: Vec<&'a str>,
}

impl<'a> Line<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.number, msg)
    }

    fn tag(&self) -> &'a str {
        self.fields[0]
    }

    fn positional(&self, i: usize) -> Result<&'a str> {
        self.fields
            .get(i)
            .copied()
            .filter(|f| !f.contains('='))
            .ok_or_else(|| self.err(format!("missing field {i} of `{}`", self.tag())))
    }

    fn key(&self, key: &str) -> Result<&'a str> {
        self.opt_key(key)
            .ok_or_else(|| self.err(format!("missing `{key}=` on `{}`", self.tag())))
    }

    fn opt_key(&self, key: &str) -> Option<&'a str> {
        self.fields[1..]
            .iter()
            .find_map(|f| f.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
    }

    fn num<T: std::str::FromStr>(&self, text: &str) -> Result<T> {
        text.parse().map_err(|_| self.err(format!("bad number `{text}`")))
    }

    fn seq(&self, text: &str) -> Result<Seq> {
        text.parse().map_err(|_| self.err(format!("bad sequence `{text}`")))
    }

    fn ord(&self, text: &str) -> Result<OrdinalCNF> {
        ord_parse(text).map_err(|e| self.err(format!("bad ordinal `{text}`: {e}")))
    }

    fn wrap<T>(&self, r: Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            Error::Parse { .. } => e,
            other => self.err(other.to_string()),
        })
    }
}

fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some(Line { number: i + 1, fields })
    })
}

fn unexpected(l: &Line) -> Error {
    l.err(format!("unexpected record `{}`", l.tag()))
}

fn no_header() -> Error {
    Error::parse(0, "missing header line")
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

// ---- coloring trees -------------------------------------------------------

pub fn parse_tree(text: &str) -> Result<ColoringTree> {
    let mut tree: Option<ColoringTree> = None;
    for l in lines(text) {
        match (l.tag(), tree.as_mut()) {
            ("tree", None) => {
                let arity = l.num(l.key("N")?)?;
                let height = l.num(l.key("H")?)?;
                let min = l.num(l.opt_key("min").unwrap_or("0"))?;
                tree = Some(l.wrap(ColoringTree::new(arity, height, min))?);
            }
            ("gnode", Some(t)) => {
                let level: usize = l.num(l.positional(1)?)?;
                let tag = l.seq(l.key("t")?)?;
                let v = l
                    .key("v")?
                    .split(',')
                    .map(|s| l.seq(s))
                    .collect::<Result<Vec<_>>>()?;
                if tag.len() != level {
                    return Err(l.err(format!("tag {tag} does not have length {level}")));
                }
                let node = l.wrap(TreeNode::new(v, tag))?;
                l.wrap(t.insert(node))?;
            }
            _ => return Err(unexpected(&l)),
        }
    }
    tree.ok_or_else(no_header)
}

pub fn write_tree(t: &ColoringTree) -> String {
    let mut out = format!("tree N={} H={} min={}\n", t.arity, t.height, t.min_level);
    for node in t.nodes() {
        let v = node.v.iter().join(",");
        writeln!(out, "gnode {} t={} v={}", node.level, node.t, v).unwrap();
    }
    out
}

// ---- basic and ranked trees -----------------------------------------------

/// A basic tree file with optional rank annex and `gamma` header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedFile {
    pub tree: RankedTree,
    /// Whether a `universal` or `ranked` header gave γ.
    pub has_gamma: bool,
    pub universal: bool,
}

pub fn parse_btree(text: &str) -> Result<BasicColoringTree> {
    Ok(parse_ranked(text)?.tree.base)
}

/// Reads `btree`, `bnode`, `anchor`, `rmap` and an optional
/// `universal gamma=` or `ranked gamma=` line. Without a γ line, γ is one
/// more than the largest rank present.
pub fn parse_ranked(text: &str) -> Result<RankedFile> {
    let mut base: Option<BasicColoringTree> = None;
    let mut gamma: Option<OrdinalCNF> = None;
    let mut universal = false;
    let mut rows = Vec::new();
    for l in lines(text) {
        match (l.tag(), base.as_mut()) {
            ("btree", None) => {
                let height = l.num(l.key("H")?)?;
                let min = l.num(l.opt_key("min").unwrap_or("0"))?;
                base = Some(l.wrap(BasicColoringTree::new(height, min))?);
            }
            ("universal" | "ranked", _) if gamma.is_none() => {
                universal = l.tag() == "universal";
                gamma = Some(l.ord(l.key("gamma")?)?);
            }
            ("bnode", Some(t)) => {
                let level: usize = l.num(l.positional(1)?)?;
                let x = l.seq(l.key("x")?)?;
                let y = l.seq(l.key("y")?)?;
                let k: Color = l.num(l.key("k")?)?;
                if x.len() != level {
                    return Err(l.err(format!("pair at level {level} has members of length {}", x.len())));
                }
                let node = l.wrap(BasicNode::new(x, y, k))?;
                l.wrap(t.insert(node))?;
            }
            ("anchor", Some(t)) => {
                let s = l.seq(l.positional(1)?)?;
                l.wrap(t.add_anchor(s))?;
            }
            ("rmap", Some(_)) => {
                let a = l.wrap(Approx::<Color>::parse_key(l.positional(1)?, 2))?;
                let r = l.ord(l.key("r")?)?;
                let c = l.seq(l.key("c")?)?;
                rows.push((l.number, a, r, c));
            }
            _ => return Err(unexpected(&l)),
        }
    }
    let base = base.ok_or_else(no_header)?;
    let has_gamma = gamma.is_some();
    let gamma = gamma.unwrap_or_else(|| {
        rows.iter()
            .map(|(_, _, r, _)| r.succ())
            .max()
            .unwrap_or_else(|| OrdinalCNF::from_nat(1))
    });
    let mut tree = RankedTree::new(base, gamma);
    for (line, a, r, c) in rows {
        if tree.r.contains_key(&a) {
            return Err(Error::parse(line, format!("approximation {} listed twice", a.key())));
        }
        tree.set(a, r, c);
    }
    Ok(RankedFile {
        tree,
        has_gamma,
        universal,
    })
}

pub fn write_btree(t: &BasicColoringTree) -> String {
    let mut out = format!("btree H={} min={}\n", t.height, t.min_level);
    for node in t.nodes() {
        writeln!(out, "bnode {} x={} y={} k={}", node.level(), node.x, node.y, node.k).unwrap();
    }
    for s in &t.anchors {
        writeln!(out, "anchor {s}").unwrap();
    }
    out
}

/// The tree, a γ header and one `rmap` line per ranked approximation.
pub fn write_ranked(t: &RankedTree, universal: bool) -> String {
    let mut out = write_btree(&t.base);
    let head = if universal { "universal" } else { "ranked" };
    writeln!(out, "{head} gamma={}", t.gamma).unwrap();
    for (key, (_, r, c)) in t.entries() {
        writeln!(out, "rmap {key} r={r} c={c}").unwrap();
    }
    out
}

// ---- models and oracles ---------------------------------------------------

fn elems(l: &Line, text: &str) -> Result<Vec<Elem>> {
    if text.is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(|e| l.num(e)).collect()
}

pub fn parse_model(text: &str) -> Result<FiniteModel> {
    let mut model: Option<FiniteModel> = None;
    for l in lines(text) {
        match (l.tag(), model.take()) {
            ("model", None) => model = Some(FiniteModel::empty(l.num(l.key("m")?)?)),
            ("rel", Some(m)) => {
                let name = l.positional(1)?;
                let arity: usize = l.num(l.positional(2)?)?;
                let tuples = match l.fields.get(3) {
                    Some(f) => f.split(';').map(|t| elems(&l, t)).collect::<Result<Vec<_>>>()?,
                    None => Vec::new(),
                };
                model = Some(l.wrap(m.with_relation(name, arity, tuples))?);
            }
            _ => return Err(unexpected(&l)),
        }
    }
    model.ok_or_else(no_header)
}

pub fn write_model(m: &FiniteModel) -> String {
    let mut out = format!("model m={}\n", m.size);
    for r in &m.relations {
        write!(out, "rel {} {}", r.name, r.arity).unwrap();
        if !r.tuples.is_empty() {
            write!(out, " {}", r.tuples.iter().map(|t| t.iter().join(",")).join(";")).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Reads `mrank` lines after an optional `oracle m=` header; without the
/// header the universe is one more than the largest element mentioned.
pub fn parse_oracle(text: &str) -> Result<RankedModelOracle> {
    let mut size: Option<u32> = None;
    let mut entries = BTreeMap::new();
    for l in lines(text) {
        match l.tag() {
            "oracle" if size.is_none() && entries.is_empty() => size = Some(l.num(l.key("m")?)?),
            "mrank" => {
                let mut w = elems(&l, l.positional(1)?)?;
                w.sort_unstable();
                w.dedup();
                let rank = l.ord(l.key("r")?)?;
                let crit: Elem = l.num(l.key("c")?)?;
                let phi: AtomicType = l
                    .key("phi")?
                    .parse()
                    .map_err(|e: Error| l.err(format!("bad type: {e}")))?;
                if !w.contains(&crit) {
                    return Err(l.err(format!("critical element {crit} is not in the set")));
                }
                if entries.insert(w, OracleEntry { rank, crit, phi }).is_some() {
                    return Err(l.err("set listed twice"));
                }
            }
            _ => return Err(unexpected(&l)),
        }
    }
    let size = size.unwrap_or_else(|| entries.keys().flatten().max().map_or(0, |&e| e + 1));
    if let Some(w) = entries.keys().find(|w| w.iter().any(|&e| e >= size)) {
        return Err(Error::parse(0, format!("set {w:?} leaves the universe of size {size}")));
    }
    Ok(RankedModelOracle { size, entries })
}

pub fn write_oracle(o: &RankedModelOracle) -> String {
    let mut out = format!("oracle m={}\n", o.size);
    for (w, e) in &o.entries {
        writeln!(out, "mrank {} r={} c={} phi={}", w.iter().join(","), e.rank, e.crit, e.phi).unwrap();
    }
    out
}

// ---- forcing conditions and generic families ------------------------------

fn pair(l: &Line, text: &str) -> Result<(Elem, Elem)> {
    match elems(l, text)?[..] {
        [a, b] if a != b => Ok((a.min(b), a.max(b))),
        _ => Err(l.err(format!("bad pair `{text}`"))),
    }
}

fn eta_g_line(
    l: &Line,
    eta: &mut BTreeMap<Elem, Seq>,
    g: &mut BTreeMap<(Elem, Elem), Color>,
) -> Result<bool> {
    match l.tag() {
        "eta" => {
            let e: Elem = l.num(l.positional(1)?)?;
            let s = l.seq(l.positional(2)?)?;
            if eta.insert(e, s).is_some() {
                return Err(l.err(format!("element {e} listed twice")));
            }
        }
        "g" => {
            let p = pair(l, l.positional(1)?)?;
            let k: Color = l.num(l.positional(2)?)?;
            if g.insert(p, k).is_some() {
                return Err(l.err(format!("pair {},{} listed twice", p.0, p.1)));
            }
        }
        _ => return Ok(false),
    }
    Ok(true)
}

pub fn parse_condition(text: &str) -> Result<ForcingCondition> {
    let mut n: Option<usize> = None;
    let (mut eta, mut g) = (BTreeMap::new(), BTreeMap::new());
    for l in lines(text) {
        if l.tag() == "cond" && n.is_none() {
            n = Some(l.num(l.key("n")?)?);
        } else if n.is_none() || !eta_g_line(&l, &mut eta, &mut g)? {
            return Err(unexpected(&l));
        }
    }
    Ok(ForcingCondition {
        n: n.ok_or_else(no_header)?,
        eta,
        g,
    })
}

fn write_eta_g(out: &mut String, eta: &BTreeMap<Elem, Seq>, g: &BTreeMap<(Elem, Elem), Color>) {
    for (e, s) in eta {
        writeln!(out, "eta {e} {s}").unwrap();
    }
    for ((a, b), k) in g {
        writeln!(out, "g {a},{b} {k}").unwrap();
    }
}

pub fn write_condition(p: &ForcingCondition) -> String {
    let mut out = format!("cond n={}\n", p.n);
    write_eta_g(&mut out, &p.eta, &p.g);
    out
}

/// Reads a family dump; the chain of conditions is not part of the format.
pub fn parse_family(text: &str) -> Result<GenericFamily> {
    let (mut family, mut colors, mut first_level) = (BTreeMap::new(), BTreeMap::new(), BTreeMap::new());
    for l in lines(text) {
        if l.tag() == "cert" {
            let p = pair(&l, l.positional(1)?)?;
            let n0: usize = l.num(l.key("n0")?)?;
            if first_level.insert(p, n0).is_some() {
                return Err(l.err("certificate listed twice"));
            }
        } else if !eta_g_line(&l, &mut family, &mut colors)? {
            return Err(unexpected(&l));
        }
    }
    Ok(GenericFamily {
        family,
        colors,
        first_level,
        chain: Vec::new(),
        saturation_steps: 0,
    })
}

pub fn write_family(f: &GenericFamily) -> String {
    let mut out = String::new();
    write_eta_g(&mut out, &f.family, &f.colors);
    for ((a, b), n0) in &f.first_level {
        writeln!(out, "cert {a},{b} n0={n0}").unwrap();
    }
    out
}

// ---- colorings and scenes -------------------------------------------------

fn bits(l: &Line, text: &str) -> Result<Seq> {
    if text.is_empty() || !text.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(l.err(format!("bad binary string `{text}`")));
    }
    Ok(Seq(text.bytes().map(|b| (b - b'0') as u32).collect()))
}

fn show_bits(s: &Seq) -> String {
    s.0.iter().map(|d| d.to_string()).collect()
}

fn cm_line(l: &Line, coloring: &mut Vec<ColorClass>, arity: Option<usize>) -> Result<()> {
    let m: usize = l.num(l.positional(1)?)?;
    let tuple = l
        .positional(2)?
        .split(',')
        .map(|s| bits(l, s))
        .collect::<Result<Vec<_>>>()?;
    if arity.is_some_and(|n| n != tuple.len()) || tuple.iter().any(|s| s.len() != tuple[0].len()) {
        return Err(l.err("tuple has the wrong shape"));
    }
    if coloring.len() <= m {
        coloring.resize_with(m + 1, BTreeSet::new);
    }
    coloring[m].insert(tuple);
    Ok(())
}

/// Color classes indexed by `m`; missing indices are empty classes.
pub fn parse_coloring(text: &str) -> Result<Vec<ColorClass>> {
    let mut coloring = Vec::new();
    for l in lines(text) {
        if l.tag() != "cm" {
            return Err(unexpected(&l));
        }
        cm_line(&l, &mut coloring, None)?;
    }
    Ok(coloring)
}

pub fn write_coloring(coloring: &[ColorClass]) -> String {
    let mut out = String::new();
    for (m, class) in coloring.iter().enumerate() {
        for tuple in class {
            writeln!(out, "cm {m} {}", tuple.iter().map(show_bits).join(",")).unwrap();
        }
    }
    out
}

fn point(l: &Line, text: &str) -> Result<RationalPoint> {
    text.parse().map_err(|e: Error| l.err(format!("bad point `{text}`: {e}")))
}

pub fn parse_scene(text: &str) -> Result<Scene> {
    let mut scene: Option<Scene> = None;
    for l in lines(text) {
        match (l.tag(), scene.as_mut()) {
            ("scene", None) => {
                scene = Some(Scene {
                    arity: l.num::<usize>(l.key("N")?)?.max(1),
                    height: l.num(l.key("H")?)?,
                    points: BTreeMap::new(),
                    coloring: Vec::new(),
                    removed: Vec::new(),
                })
            }
            ("pt", Some(sc)) => {
                let s = bits(&l, l.positional(1)?)?;
                let p = point(&l, l.positional(2)?)?;
                if p.0.len() != 2 * sc.arity - 1 {
                    return Err(l.err(format!("point has dimension {}, expected {}", p.0.len(), 2 * sc.arity - 1)));
                }
                if sc.points.insert(s, p).is_some() {
                    return Err(l.err("point listed twice"));
                }
            }
            ("cm", Some(sc)) => cm_line(&l, &mut sc.coloring, Some(sc.arity))?,
            ("rm", Some(sc)) => {
                let m: usize = l.num(l.positional(1)?)?;
                let tuple = l
                    .positional(2)?
                    .split(';')
                    .map(|t| point(&l, t))
                    .collect::<Result<Vec<_>>>()?;
                if sc.removed.len() <= m {
                    sc.removed.resize_with(m + 1, Vec::new);
                }
                sc.removed[m].push(tuple);
            }
            _ => return Err(unexpected(&l)),
        }
    }
    let mut scene = scene.ok_or_else(no_header)?;
    let classes = scene.coloring.len().max(scene.removed.len());
    scene.coloring.resize_with(classes, BTreeSet::new);
    scene.removed.resize_with(classes, Vec::new);
    Ok(scene)
}

pub fn write_scene(scene: &Scene) -> String {
    let mut out = format!("scene N={} H={}\n", scene.arity, scene.height);
    for (s, p) in &scene.points {
        writeln!(out, "pt {} {p}", show_bits(s)).unwrap();
    }
    out.push_str(&write_coloring(&scene.coloring));
    for (m, tuples) in scene.removed.iter().enumerate() {
        for t in tuples {
            writeln!(out, "rm {m} {}", t.iter().join(";")).unwrap();
        }
    }
    out
}

// ---- rank reports, chains and embeddings ---------------------------------

/// A rank report as read back: tree rank, and per approximation key its
/// value and critical members.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RankListing {
    pub tree_rank: u32,
    pub values: BTreeMap<String, (u32, Vec<Seq>)>,
}

impl RankListing {
    pub fn from_report<L: Label>(r: &RankReport<L>) -> Self {
        let values = r
            .iter()
            .map(|(a, v)| {
                let crit = r.critical(a).unwrap_or_default();
                (a.key(), (v, crit.into_iter().map(|i| a.v[i].clone()).collect()))
            })
            .collect();
        RankListing {
            tree_rank: r.tree_rank,
            values,
        }
    }
}

pub fn write_rank_listing(r: &RankListing) -> String {
    let mut out = format!("rktree {}\n", r.tree_rank);
    for (key, (v, crit)) in &r.values {
        writeln!(out, "value {key} {v} crit={}", crit.iter().join(",")).unwrap();
    }
    out
}

pub fn parse_rank_listing(text: &str) -> Result<RankListing> {
    let mut listing: Option<RankListing> = None;
    for l in lines(text) {
        match (l.tag(), listing.as_mut()) {
            ("rktree", None) => {
                listing = Some(RankListing {
                    tree_rank: l.num(l.positional(1)?)?,
                    values: BTreeMap::new(),
                })
            }
            ("value", Some(r)) => {
                let key = l.positional(1)?.to_string();
                let v: u32 = l.num(l.positional(2)?)?;
                let crit = match l.key("crit")? {
                    "" => Vec::new(),
                    c => c.split(',').map(|s| l.seq(s)).collect::<Result<Vec<_>>>()?,
                };
                if r.values.insert(key, (v, crit)).is_some() {
                    return Err(l.err("approximation listed twice"));
                }
            }
            _ => return Err(unexpected(&l)),
        }
    }
    listing.ok_or_else(no_header)
}

/// Chain links by approximation key, and whether the full depth was reached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainListing {
    pub found: bool,
    pub links: Vec<String>,
}

impl ChainListing {
    pub fn from_outcome(c: &ChainOutcome) -> Self {
        ChainListing {
            found: c.is_found(),
            links: c.chain().iter().map(|a| a.key()).collect(),
        }
    }
}

pub fn write_chain(c: &ChainListing) -> String {
    let mut out = format!("chain found={}\n", c.found);
    for (i, key) in c.links.iter().enumerate() {
        writeln!(out, "link {i} {key}").unwrap();
    }
    out
}

pub fn parse_chain(text: &str) -> Result<ChainListing> {
    let mut chain: Option<ChainListing> = None;
    for l in lines(text) {
        match (l.tag(), chain.as_mut()) {
            ("chain", None) => {
                let found = match l.key("found")? {
                    "true" => true,
                    "false" => false,
                    other => return Err(l.err(format!("bad flag `{other}`"))),
                };
                chain = Some(ChainListing { found, links: Vec::new() })
            }
            ("link", Some(c)) => {
                let i: usize = l.num(l.positional(1)?)?;
                if i != c.links.len() {
                    return Err(l.err(format!("link {i} out of order")));
                }
                c.links.push(l.positional(2)?.to_string());
            }
            _ => return Err(unexpected(&l)),
        }
    }
    chain.ok_or_else(no_header)
}

/// An embedding with an optional string map for the coloring mode.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EmbeddingFile {
    pub embedding: Embedding,
    pub phi: BTreeMap<Seq, Seq>,
}

pub fn write_embedding(e: &EmbeddingFile) -> String {
    let mut out = String::new();
    for (s, t) in &e.embedding.f {
        writeln!(out, "emb {s} {t}").unwrap();
    }
    for (k, j) in &e.embedding.f_star {
        writeln!(out, "cmap {k} {j}").unwrap();
    }
    for (s, t) in &e.phi {
        writeln!(out, "phi {s} {t}").unwrap();
    }
    out
}

pub fn parse_embedding(text: &str) -> Result<EmbeddingFile> {
    let mut e = EmbeddingFile::default();
    for l in lines(text) {
        let fresh = match l.tag() {
            "emb" => e.embedding.f.insert(l.seq(l.positional(1)?)?, l.seq(l.positional(2)?)?).is_none(),
            "cmap" => e.embedding.f_star.insert(l.num(l.positional(1)?)?, l.num(l.positional(2)?)?).is_none(),
            "phi" => e.phi.insert(l.seq(l.positional(1)?)?, l.seq(l.positional(2)?)?).is_none(),
            _ => return Err(unexpected(&l)),
        };
        if !fresh {
            return Err(l.err("entry listed twice"));
        }
    }
    Ok(e)
}
