//! Basic (pair) coloring trees and γ-ranked trees.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use itertools::Itertools;
use rand::Rng;

use crate::approx::{Approx, ApproxConfig, ApproxSpace, Color, LevelNodes, RankReport};
use crate::error::{Error, Result};
use crate::ordinal::OrdinalCNF;
use crate::report::Report;
use crate::seq::{binary_strings, Seq};
use crate::tree::{ColoringTree, TreeNode};

pub type BasicApproximation = Approx<Color>;

/// A colored pair `(x, y, k)` with `x < y`, both of length `level`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasicNode {
    pub x: Seq,
    pub y: Seq,
    pub k: Color,
}

impl BasicNode {
    pub fn new(x: Seq, y: Seq, k: Color) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::pre("pair members must have equal length"));
        }
        match x.cmp(&y) {
            std::cmp::Ordering::Less => Ok(BasicNode { x, y, k }),
            std::cmp::Ordering::Greater => Ok(BasicNode { x: y, y: x, k }),
            std::cmp::Ordering::Equal => Err(Error::pre(format!("pair members coincide at {x}"))),
        }
    }

    pub fn level(&self) -> usize {
        self.x.len()
    }

    pub fn restrict(&self, n: usize) -> (Seq, Seq) {
        (self.x.restrict(n), self.y.restrict(n))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasicColoringTree {
    pub height: usize,
    pub min_level: usize,
    /// Indexed by level.
    pub levels: Vec<BTreeSet<BasicNode>>,
    /// Support points that carry no pair of their own.
    pub anchors: BTreeSet<Seq>,
}

impl BasicColoringTree {
    pub fn new(height: usize, min_level: usize) -> Result<Self> {
        if height < 1 || min_level >= height {
            return Err(Error::pre(format!(
                "need 0 <= min < H, got min={min_level} H={height}"
            )));
        }
        Ok(BasicColoringTree {
            height,
            min_level,
            levels: vec![BTreeSet::new(); height],
            anchors: BTreeSet::new(),
        })
    }

    pub fn insert(&mut self, node: BasicNode) -> Result<()> {
        let n = node.level();
        if n < self.min_level || n >= self.height {
            return Err(Error::pre(format!("pair level {n} outside the tree")));
        }
        self.levels[n].insert(node);
        Ok(())
    }

    pub fn add_pair(&mut self, x: Seq, y: Seq, k: Color) -> Result<()> {
        self.insert(BasicNode::new(x, y, k)?)
    }

    pub fn add_anchor(&mut self, s: Seq) -> Result<()> {
        if s.len() >= self.height {
            return Err(Error::pre(format!("anchor {s} is above the tree")));
        }
        self.anchors.insert(s);
        Ok(())
    }

    pub fn nodes(&self) -> impl Iterator<Item = &BasicNode> {
        self.levels.iter().flatten()
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(|l| l.len()).sum()
    }

    pub fn colors(&self) -> BTreeSet<Color> {
        self.nodes().map(|n| n.k).collect()
    }

    pub fn level_colors(&self, n: usize) -> BTreeSet<Color> {
        self.levels[n].iter().map(|p| p.k).collect()
    }

    /// Downward-closed support: every prefix of a pair member or anchor.
    pub fn support(&self) -> BTreeSet<Seq> {
        let mut out = BTreeSet::new();
        let tops = self.nodes().flat_map(|p| [&p.x, &p.y]).chain(self.anchors.iter());
        for s in tops {
            for m in 0..=s.len() {
                out.insert(s.restrict(m));
            }
        }
        out
    }

    pub fn support_level(&self, n: usize) -> BTreeSet<Seq> {
        self.support().into_iter().filter(|s| s.len() == n).collect()
    }

    pub fn has_pair(&self, x: &Seq, y: &Seq, k: Color) -> bool {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        self.levels.get(a.len()).is_some_and(|l| {
            l.contains(&BasicNode {
                x: a.clone(),
                y: b.clone(),
                k,
            })
        })
    }

    /// Colors of the pair `{x, y}`.
    pub fn pair_colors(&self, x: &Seq, y: &Seq) -> Vec<Color> {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        let Some(level) = self.levels.get(a.len()) else {
            return Vec::new();
        };
        let lo = BasicNode {
            x: a.clone(),
            y: b.clone(),
            k: 0,
        };
        level
            .range(lo..)
            .take_while(|p| &p.x == a && &p.y == b)
            .map(|p| p.k)
            .collect()
    }

    pub fn level_nodes(&self, n: usize) -> LevelNodes<Color> {
        let mut ln = LevelNodes::new(n, 2);
        if let Some(level) = self.levels.get(n) {
            for p in level {
                ln.insert(vec![p.x.clone(), p.y.clone()], p.k);
            }
        }
        ln.finish();
        ln
    }

    pub fn all_level_nodes(&self) -> Vec<LevelNodes<Color>> {
        (0..self.height).map(|n| self.level_nodes(n)).collect()
    }

    pub fn truncate(&self, h: usize) -> Result<BasicColoringTree> {
        let mut t = BasicColoringTree::new(h, self.min_level)?;
        t.levels = self.levels[..h].to_vec();
        t.anchors = self.anchors.iter().filter(|s| s.len() < h).cloned().collect();
        Ok(t)
    }
}

/// Checks that every pair persists, with its color, at every higher level.
pub fn validate_basic(t: &BasicColoringTree) -> Report {
    let mut report = Report::new();
    for (n, level) in t.levels.iter().enumerate() {
        for p in level {
            for m in n + 1..t.height {
                let extended = t.levels[m].iter().any(|q| {
                    q.k == p.k && {
                        let (qx, qy) = q.restrict(n);
                        (qx == p.x && qy == p.y) || (qx == p.y && qy == p.x)
                    }
                });
                if !extended {
                    report.push(
                        "extension",
                        format!("pair ({}, {}, {}) has no extension at level {m}", p.x, p.y, p.k),
                    );
                    break;
                }
            }
        }
    }
    report
}

/// Pairs of equal-length sequences closed under simultaneous restriction.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PairTree {
    pub pairs: BTreeSet<(Seq, Seq)>,
}

impl PairTree {
    /// The restriction closure of the given pairs.
    pub fn closure(pairs: impl IntoIterator<Item = (Seq, Seq)>) -> PairTree {
        let mut out = BTreeSet::new();
        for (x, y) in pairs {
            for m in 0..=x.len().min(y.len()) {
                out.insert(ordered(x.restrict(m), y.restrict(m)));
            }
        }
        PairTree { pairs: out }
    }

    pub fn contains(&self, x: &Seq, y: &Seq) -> bool {
        self.pairs.contains(&ordered(x.clone(), y.clone()))
    }

    pub fn at_length(&self, n: usize) -> impl Iterator<Item = &(Seq, Seq)> {
        self.pairs.iter().filter(move |(x, _)| x.len() == n)
    }
}

fn ordered(x: Seq, y: Seq) -> (Seq, Seq) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

/// The basic tree of a finite list of closed pair sets, color `k` entering
/// at level `k`.
pub fn basic_from_closed(pair_trees: &[PairTree], height: usize) -> Result<BasicColoringTree> {
    let mut t = BasicColoringTree::new(height, 0)?;
    for (k, c) in pair_trees.iter().enumerate() {
        for (x, y) in &c.pairs {
            if x.len() != y.len() {
                return Err(Error::pre(format!("pair ({x}, {y}) mixes lengths")));
            }
            if !x.is_empty() && !c.contains(&x.restrict(x.len() - 1), &y.restrict(y.len() - 1)) {
                return Err(Error::pre(format!(
                    "pair tree {k} is not closed under restriction at ({x}, {y})"
                )));
            }
            let n = x.len();
            if n + 1 < height && !c.at_length(n + 1).any(|(a, b)| {
                let r = ordered(a.restrict(n), b.restrict(n));
                &r.0 == x && &r.1 == y
            }) {
                return Err(Error::pre(format!(
                    "pair ({x}, {y}) of pair tree {k} does not extend to length {}",
                    n + 1
                )));
            }
            if n < height && k <= n && x != y {
                t.add_pair(x.clone(), y.clone(), k as Color)?;
            }
        }
    }
    Ok(t)
}

/// The pairs colored `k` at level `n`.
pub fn read_back(t: &BasicColoringTree, k: Color, n: usize) -> BTreeSet<(Seq, Seq)> {
    t.levels[n]
        .iter()
        .filter(|p| p.k == k)
        .map(|p| (p.x.clone(), p.y.clone()))
        .collect()
}

/// The `N = 2` tree with node `({x, y}, k^n)` for every pair.
pub fn basic_to_general(t: &BasicColoringTree) -> ColoringTree {
    let mut g = ColoringTree::new(2, t.height, t.min_level).expect("same shape");
    for p in t.nodes() {
        let node = TreeNode::new(vec![p.x.clone(), p.y.clone()], Seq::constant(p.k, p.level()))
            .expect("pair members are distinct");
        g.insert(node).expect("level in range");
    }
    g
}

pub fn basic_rank(t: &BasicColoringTree, cfg: &ApproxConfig) -> Result<RankReport<Color>> {
    RankReport::compute(&t.all_level_nodes(), cfg)
}

/// A basic tree with rank bounds `r` and critical elements `c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedTree {
    pub base: BasicColoringTree,
    pub gamma: OrdinalCNF,
    pub r: HashMap<BasicApproximation, OrdinalCNF>,
    pub c: HashMap<BasicApproximation, Seq>,
}

impl RankedTree {
    pub fn new(base: BasicColoringTree, gamma: OrdinalCNF) -> Self {
        RankedTree {
            base,
            gamma,
            r: HashMap::new(),
            c: HashMap::new(),
        }
    }

    pub fn set(&mut self, a: BasicApproximation, r: OrdinalCNF, c: Seq) {
        self.r.insert(a.clone(), r);
        self.c.insert(a, c);
    }

    /// Table entries in canonical key order.
    pub fn entries(&self) -> BTreeMap<String, (&BasicApproximation, &OrdinalCNF, &Seq)> {
        self.r
            .iter()
            .filter_map(|(a, r)| self.c.get(a).map(|c| (a.key(), (a, r, c))))
            .collect()
    }

    pub fn truncate(&self, h: usize) -> Result<RankedTree> {
        let base = self.base.truncate(h)?;
        let keep = |a: &&BasicApproximation| a.level < h;
        Ok(RankedTree {
            base,
            gamma: self.gamma.clone(),
            r: self.r.iter().filter(|(a, _)| keep(a)).map(|(a, r)| (a.clone(), r.clone())).collect(),
            c: self.c.iter().filter(|(a, _)| keep(a)).map(|(a, c)| (a.clone(), c.clone())).collect(),
        })
    }
}

/// Exhaustive check of the ranked-tree conditions on every approximation.
pub fn validate_ranked(rt: &RankedTree, cfg: &ApproxConfig) -> Result<Report> {
    let space = ApproxSpace::build(&rt.base.all_level_nodes(), cfg)?;
    Ok(check_conditions(rt, &space))
}

pub(crate) fn check_conditions(rt: &RankedTree, space: &ApproxSpace<Color>) -> Report {
    let mut report = Report::new();
    let mut ok = vec![true; space.len()];
    for (i, a) in space.approxs.iter().enumerate() {
        match (rt.r.get(a), rt.c.get(a)) {
            (Some(r), Some(c)) => {
                if r >= &rt.gamma {
                    report.push("gamma", format!("{} has r={r} not below {}", a.key(), rt.gamma));
                }
                if a.index_of(c).is_none() {
                    report.push("critical", format!("{} has c={c} outside v", a.key()));
                    ok[i] = false;
                }
            }
            _ => {
                report.push("domain", format!("{} lacks r or c", a.key()));
                ok[i] = false;
            }
        }
    }
    for (ai, a) in space.approxs.iter().enumerate() {
        if !ok[ai] {
            continue;
        }
        let (ra, ca) = (&rt.r[a], &rt.c[a]);
        let ci = a.index_of(ca).unwrap();
        for &(bi, mask) in &space.succ[ai] {
            if !ok[bi] {
                continue;
            }
            let b = &space.approxs[bi];
            let (rb, cb) = (&rt.r[b], &rt.c[b]);
            if ra < rb {
                report.push("U1", format!("{} < {} but r {ra} < {rb}", a.key(), b.key()));
            } else if mask & (1 << ci) != 0 && ra == rb {
                report.push(
                    "U1",
                    format!("c={ca} of {} splits in {} but r stays {ra}", a.key(), b.key()),
                );
            }
            if ra == rb && a.v.len() == b.v.len() && !ca.is_prefix_of(cb) {
                report.push(
                    "U2",
                    format!("{} < {} with equal r but c={cb} does not extend {ca}", a.key(), b.key()),
                );
            }
        }
        for size in 2..a.v.len() {
            for keep in (0..a.v.len()).combinations(size) {
                let w = a.sub(&keep);
                if let Some(rw) = rt.r.get(&w) {
                    if rw < ra {
                        report.push(
                            "U3",
                            format!("{} inside {} has r {rw} < {ra}", w.key(), a.key()),
                        );
                    }
                }
            }
        }
    }
    report
}

/// Ranked structure read off the rank fixpoint: `r` is the rank and `c` a
/// critical element, inherited along non-splitting equal-rank chains.
pub fn derive_ranked(t: &BasicColoringTree, cfg: &ApproxConfig) -> Result<RankedTree> {
    let rep = basic_rank(t, cfg)?;
    let space = &rep.space;
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); space.len()];
    for (ai, succ) in space.succ.iter().enumerate() {
        for &(bi, _) in succ {
            pred[bi].push(ai);
        }
    }
    let mut crit: Vec<Option<Seq>> = vec![None; space.len()];
    for range in &space.by_level {
        for bi in range.clone() {
            let b = &space.approxs[bi];
            let inherited = pred[bi]
                .iter()
                .filter(|&&ai| {
                    let a = &space.approxs[ai];
                    a.v.len() == b.v.len() && rep.values[ai] == rep.values[bi]
                })
                .max_by_key(|&&ai| space.approxs[ai].level)
                .and_then(|&ai| {
                    let ca = crit[ai].as_ref().unwrap();
                    b.v.iter().find(|s| ca.is_prefix_of(s)).cloned()
                });
            let c = inherited.unwrap_or_else(|| {
                let least = space.value_from(bi, &rep.values).1[0];
                b.v[least].clone()
            });
            crit[bi] = Some(c);
        }
    }
    let top = rep.values.iter().copied().max();
    let gamma = top.map_or(OrdinalCNF::zero(), |m| OrdinalCNF::from_nat(m as u64 + 1));
    let mut rt = RankedTree::new(t.clone(), gamma);
    for (i, a) in space.approxs.iter().enumerate() {
        rt.set(
            a.clone(),
            OrdinalCNF::from_nat(rep.values[i] as u64),
            crit[i].take().unwrap(),
        );
    }
    Ok(rt)
}

/// Approximations whose computed rank exceeds the recorded bound.
pub fn check_rank_bound(rt: &RankedTree, cfg: &ApproxConfig) -> Result<Report> {
    let rep = basic_rank(&rt.base, cfg)?;
    let mut report = Report::new();
    for (a, v) in rep.iter() {
        let computed = OrdinalCNF::from_nat(v as u64);
        match rt.r.get(a) {
            Some(r) if &computed <= r => {}
            Some(r) => report.push("bound", format!("{} has rank {computed} > r={r}", a.key())),
            None => report.push("domain", format!("{} lacks r", a.key())),
        }
    }
    Ok(report)
}

/// All pairs of distinct binary strings, color 0.
pub fn basic_binary(h: usize) -> BasicColoringTree {
    let mut t = BasicColoringTree::new(h, 0).expect("height is positive");
    for n in 1..h {
        for pair in binary_strings(n).into_iter().combinations(2) {
            t.add_pair(pair[0].clone(), pair[1].clone(), 0).unwrap();
        }
    }
    t
}

/// The single pair `{0^n, 1^n}`, color 0, at every level from 1.
pub fn basic_two_branch(h: usize) -> BasicColoringTree {
    let mut t = BasicColoringTree::new(h, 0).expect("height is positive");
    for n in 1..h {
        t.add_pair(Seq::zeros(n), Seq::constant(1, n), 0).unwrap();
    }
    t
}

/// A random valid basic tree built from full-height colored branches.
pub fn random_basic<R: Rng>(
    rng: &mut R,
    height: usize,
    branching: u32,
    colors: u32,
    branches: usize,
) -> BasicColoringTree {
    let mut t = BasicColoringTree::new(height, 0).expect("valid shape");
    let top = height - 1;
    for _ in 0..branches {
        let x = Seq((0..top).map(|_| rng.gen_range(0..branching)).collect());
        let y = Seq((0..top).map(|_| rng.gen_range(0..branching)).collect());
        let Some(first) = (1..=top).find(|&n| x.restrict(n) != y.restrict(n)) else {
            continue;
        };
        let k = rng.gen_range(0..colors);
        let start = rng.gen_range(first..=top);
        for n in start..=top {
            t.add_pair(x.restrict(n), y.restrict(n), k).unwrap();
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::binary;

    fn cfg() -> ApproxConfig {
        ApproxConfig::default()
    }

    #[test]
    fn validator_cases() {
        assert!(validate_basic(&basic_binary(3)).is_ok());
        let mut t = basic_binary(3);
        t.levels[2].retain(|p| p.restrict(1) != (binary("0"), binary("1")));
        assert_eq!(validate_basic(&t).count("extension"), 1);
        let mut t = BasicColoringTree::new(3, 0).unwrap();
        for n in 1..3 {
            for pair in binary_strings(n).into_iter().combinations(2) {
                t.add_pair(pair[0].clone(), pair[1].clone(), n as Color).unwrap();
            }
        }
        assert!(!validate_basic(&t).is_ok());
    }

    #[test]
    fn closed_sets_unroll() {
        let h = 4;
        let all: Vec<(Seq, Seq)> = binary_strings(h)
            .into_iter()
            .tuple_combinations()
            .collect();
        let t = basic_from_closed(&[PairTree::closure(all)], h).unwrap();
        assert_eq!(t, basic_binary(h));
        let single = PairTree::closure([(Seq::zeros(h), Seq::constant(1, h))]);
        let t = basic_from_closed(&[PairTree::default(), single], h).unwrap();
        let got: Vec<(usize, Color)> = t.nodes().map(|p| (p.level(), p.k)).collect();
        assert_eq!(got, vec![(1, 1), (2, 1), (3, 1)]);
        let t = basic_from_closed(&[], h).unwrap();
        assert_eq!(t.node_count(), 0);
        assert!(validate_basic(&t).is_ok());
        let open = PairTree {
            pairs: [(binary("00"), binary("11"))].into_iter().collect(),
        };
        assert!(basic_from_closed(&[open], 3).is_err());
    }

    #[test]
    fn general_image() {
        let mut t = BasicColoringTree::new(2, 0).unwrap();
        t.add_pair(binary("0"), binary("1"), 5).unwrap();
        let g = basic_to_general(&t);
        let node = g.nodes().next().unwrap();
        assert_eq!(node.v, vec![binary("0"), binary("1")]);
        assert_eq!(node.t, Seq(vec![5]));
        assert_eq!(basic_to_general(&BasicColoringTree::new(2, 0).unwrap()).node_count(), 0);
    }

    #[test]
    fn zero_ranks_on_two_branches() {
        let t = basic_two_branch(3);
        let rt = derive_ranked(&t, &cfg()).unwrap();
        assert!(rt.r.values().all(|r| r.is_zero()));
        for (a, c) in &rt.c {
            assert_eq!(c, &a.v[0]);
        }
        assert!(validate_ranked(&rt, &cfg()).unwrap().is_ok());
        assert!(check_rank_bound(&rt, &cfg()).unwrap().is_ok());
    }

    #[test]
    fn zero_ranks_fail_on_binary() {
        let t = basic_binary(3);
        let mut rt = derive_ranked(&t, &cfg()).unwrap();
        for r in rt.r.values_mut() {
            *r = OrdinalCNF::zero();
        }
        assert!(validate_ranked(&rt, &cfg()).unwrap().count("U1") > 0);
        assert!(check_rank_bound(&rt, &cfg()).unwrap().count("bound") > 0);
    }

    #[test]
    fn binary_derivation() {
        let rt = derive_ranked(&basic_binary(4), &cfg()).unwrap();
        for (a, r) in &rt.r {
            if a.v.len() == 2 {
                assert_eq!(r.as_nat(), Some(3 - a.level as u64));
            }
        }
        assert_eq!(rt.gamma, OrdinalCNF::from_nat(3));
        assert!(validate_ranked(&rt, &cfg()).unwrap().is_ok());
        let empty = derive_ranked(&BasicColoringTree::new(3, 0).unwrap(), &cfg()).unwrap();
        assert!(empty.r.is_empty() && empty.c.is_empty());
    }

    #[test]
    fn derived_trees_validate() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let h = rng.gen_range(2..=4);
            let branches = rng.gen_range(0..8);
            let t = random_basic(&mut rng, h, 3, 2, branches);
            assert!(validate_basic(&t).is_ok());
            let rt = derive_ranked(&t, &cfg()).unwrap();
            let rep = validate_ranked(&rt, &cfg()).unwrap();
            assert!(rep.is_ok(), "{rep}");
            assert!(check_rank_bound(&rt, &cfg()).unwrap().is_ok());
        }
    }
}
