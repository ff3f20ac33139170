//! General `N`-coloring trees truncated to a finite height.

use std::collections::{BTreeSet, HashMap};

use itertools::Itertools;
use rand::Rng;

use crate::approx::{approx_leq, splits_in, Approx, ApproxConfig, LevelNodes, RankReport};
use crate::error::{Error, Result};
use crate::report::Report;
use crate::seq::{binary_strings, Seq};

pub type Approximation = Approx<Seq>;

/// A node `(v, t)`: an `N`-set of sequences of one length and a witness of
/// the same length.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TreeNode {
    pub level: usize,
    pub v: Vec<Seq>,
    pub t: Seq,
}

impl TreeNode {
    pub fn new(mut v: Vec<Seq>, t: Seq) -> Result<Self> {
        v.sort();
        let level = t.len();
        if v.iter().any(|s| s.len() != level) {
            return Err(Error::pre(format!("node members must have length {level}")));
        }
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::pre("node members must be distinct"));
        }
        Ok(TreeNode { level, v, t })
    }

    /// Whether `other` (at a higher level) extends this node.
    pub fn extended_by(&self, other: &TreeNode) -> bool {
        if other.level <= self.level || !self.t.is_prefix_of(&other.t) {
            return false;
        }
        let mut r: Vec<Seq> = other.v.iter().map(|s| s.restrict(self.level)).collect();
        r.sort();
        r == self.v
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoringTree {
    pub arity: usize,
    pub height: usize,
    pub min_level: usize,
    /// Indexed by level; levels below `min_level` are empty.
    pub levels: Vec<BTreeSet<TreeNode>>,
}

impl ColoringTree {
    pub fn new(arity: usize, height: usize, min_level: usize) -> Result<Self> {
        if arity < 2 {
            return Err(Error::pre("arity must be at least 2"));
        }
        if height < 1 || min_level >= height {
            return Err(Error::pre(format!(
                "need 0 <= min < H, got min={min_level} H={height}"
            )));
        }
        Ok(ColoringTree {
            arity,
            height,
            min_level,
            levels: vec![BTreeSet::new(); height],
        })
    }

    pub fn insert(&mut self, node: TreeNode) -> Result<()> {
        if node.v.len() != self.arity {
            return Err(Error::pre(format!(
                "node has {} members, arity is {}",
                node.v.len(),
                self.arity
            )));
        }
        if node.level < self.min_level || node.level >= self.height {
            return Err(Error::pre(format!("node level {} outside the tree", node.level)));
        }
        self.levels[node.level].insert(node);
        Ok(())
    }

    pub fn nodes(&self) -> impl Iterator<Item = &TreeNode> {
        self.levels.iter().flatten()
    }

    pub fn node_count(&self) -> usize {
        self.levels.iter().map(|l| l.len()).sum()
    }

    pub fn level_nodes(&self, n: usize) -> LevelNodes<Seq> {
        let mut ln = LevelNodes::new(n, self.arity);
        if let Some(level) = self.levels.get(n) {
            for node in level {
                ln.insert(node.v.clone(), node.t.clone());
            }
        }
        ln.finish();
        ln
    }

    pub fn all_level_nodes(&self) -> Vec<LevelNodes<Seq>> {
        (0..self.height).map(|n| self.level_nodes(n)).collect()
    }

    /// Keeps levels below `h`.
    pub fn truncate(&self, h: usize) -> Result<ColoringTree> {
        let mut t = ColoringTree::new(self.arity, h, self.min_level)?;
        t.levels = self.levels[..h].to_vec();
        Ok(t)
    }
}

/// Every node lacking an extension at some higher level.
pub fn validate_tree(t: &ColoringTree) -> Report {
    let mut report = Report::new();
    for (n, level) in t.levels.iter().enumerate() {
        for node in level {
            for m in n + 1..t.height {
                if !t.levels[m].iter().any(|o| node.extended_by(o)) {
                    report.push(
                        "extension",
                        format!(
                            "node level={n} t={} v={} has no extension at level {m}",
                            node.t,
                            node.v.iter().join(",")
                        ),
                    );
                    break;
                }
            }
        }
    }
    report
}

pub fn approximations(t: &ColoringTree, n: usize, cfg: &ApproxConfig) -> Result<Vec<Approximation>> {
    if n < t.min_level || n >= t.height {
        return Err(Error::pre(format!("level {n} outside the tree")));
    }
    let mut counter = 0;
    t.level_nodes(n).enumerate(cfg, &mut counter)
}

pub fn rank_all(t: &ColoringTree, cfg: &ApproxConfig) -> Result<RankReport<Seq>> {
    RankReport::compute(&t.all_level_nodes(), cfg)
}

/// Rank computed straight from the recursive definition, with successors
/// found by scanning every approximation with [`approx_leq`].
pub struct RankOracle {
    by_level: Vec<Vec<Approximation>>,
    memo: HashMap<(Approximation, u32), bool>,
    height: usize,
}

impl RankOracle {
    pub fn new(t: &ColoringTree, cfg: &ApproxConfig) -> Result<Self> {
        let mut by_level = Vec::new();
        let mut total = 0;
        for n in 0..t.height {
            let found = brute_force_level(t, n, cfg.cap)?;
            total += found.len();
            if total > cfg.budget {
                return Err(Error::Budget {
                    what: "approximations",
                    limit: cfg.budget,
                });
            }
            by_level.push(found);
        }
        Ok(RankOracle {
            by_level,
            memo: HashMap::new(),
            height: t.height,
        })
    }

    /// `rank(a) >= alpha`.
    pub fn at_least(&mut self, a: &Approximation, alpha: u32) -> bool {
        if alpha == 0 {
            return true;
        }
        if let Some(&b) = self.memo.get(&(a.clone(), alpha)) {
            return b;
        }
        let above: Vec<Approximation> = self.by_level[a.level + 1..]
            .iter()
            .flatten()
            .filter(|b| approx_leq(a, b))
            .cloned()
            .collect();
        let ok = a.v.iter().all(|p| {
            above
                .iter()
                .any(|b| splits_in(p, b) && self.at_least(b, alpha - 1))
        });
        self.memo.insert((a.clone(), alpha), ok);
        ok
    }

    pub fn rank(&mut self, a: &Approximation) -> u32 {
        let mut alpha = 0;
        while (alpha as usize) < self.height && self.at_least(a, alpha + 1) {
            alpha += 1;
        }
        alpha
    }

    pub fn approximations(&self) -> impl Iterator<Item = &Approximation> {
        self.by_level.iter().flatten()
    }
}

fn brute_force_level(t: &ColoringTree, n: usize, cap: usize) -> Result<Vec<Approximation>> {
    if cap < t.arity {
        return Err(Error::pre(format!("size cap {cap} is below the arity {}", t.arity)));
    }
    let mut labels: HashMap<Vec<Seq>, Vec<Seq>> = HashMap::new();
    for node in &t.levels[n] {
        labels.entry(node.v.clone()).or_default().push(node.t.clone());
    }
    let points: Vec<Seq> = labels.keys().flatten().cloned().sorted().dedup().collect();
    let mut out = Vec::new();
    for size in t.arity..=cap.min(points.len()) {
        for v in points.iter().cloned().combinations(size) {
            let options: Option<Vec<&Vec<Seq>>> = v
                .iter()
                .cloned()
                .combinations(t.arity)
                .map(|u| labels.get(&u))
                .collect();
            let Some(options) = options else { continue };
            for h in options.into_iter().map(|o| o.iter()).multi_cartesian_product() {
                out.push(Approx {
                    level: n,
                    arity: t.arity,
                    v: v.clone(),
                    h: h.into_iter().cloned().collect(),
                });
            }
        }
    }
    Ok(out)
}

pub fn rank_oracle(t: &ColoringTree, a: &Approximation, cfg: &ApproxConfig) -> Result<u32> {
    Ok(RankOracle::new(t, cfg)?.rank(a))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChainOutcome {
    /// `a_0 < a_1 < ... < a_depth`, each member of `a_i` splitting in `a_{i+1}`.
    Found(Vec<Approximation>),
    /// The longest chain reached before the search was exhausted.
    Stuck(Vec<Approximation>),
}

impl ChainOutcome {
    pub fn chain(&self) -> &[Approximation] {
        match self {
            ChainOutcome::Found(c) | ChainOutcome::Stuck(c) => c,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, ChainOutcome::Found(_))
    }
}

/// Searches for a splitting chain of the given depth above `a`, doubling
/// every member at each step.
pub fn extract_splitting_chain(
    t: &ColoringTree,
    a: &Approximation,
    depth: usize,
    budget: usize,
) -> Result<ChainOutcome> {
    if a.level + depth >= t.height {
        return Err(Error::pre(format!(
            "depth {depth} exceeds the levels above {}",
            a.level
        )));
    }
    let levels = t.all_level_nodes();
    let mut search = ChainSearch {
        levels: &levels,
        steps: 0,
        budget,
        best: vec![a.clone()],
    };
    let mut chain = vec![a.clone()];
    if search.extend(&mut chain, depth)? {
        Ok(ChainOutcome::Found(chain))
    } else {
        Ok(ChainOutcome::Stuck(search.best))
    }
}

struct ChainSearch<'a> {
    levels: &'a [LevelNodes<Seq>],
    steps: usize,
    budget: usize,
    best: Vec<Approximation>,
}

impl ChainSearch<'_> {
    fn tick(&mut self) -> Result<()> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(Error::Budget {
                what: "chain search steps",
                limit: self.budget,
            });
        }
        Ok(())
    }

    fn extend(&mut self, chain: &mut Vec<Approximation>, remaining: usize) -> Result<bool> {
        if chain.len() > self.best.len() {
            self.best = chain.clone();
        }
        if remaining == 0 {
            return Ok(true);
        }
        let a = chain.last().unwrap().clone();
        let top = self.levels.len();
        for m in a.level + 1..top {
            if top - m < remaining {
                break;
            }
            let ln = &self.levels[m];
            let cands: Vec<Vec<Seq>> = a
                .v
                .iter()
                .map(|p| ln.points.iter().filter(|s| p.is_prefix_of(s)).cloned().collect())
                .collect();
            if cands.iter().any(|c: &Vec<Seq>| c.len() < 2) {
                continue;
            }
            let mut picked = Vec::new();
            if self.pick(&a, ln, &cands, &mut picked, chain, remaining)? {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Chooses two extensions for each member of `a` in turn.
    fn pick(
        &mut self,
        a: &Approximation,
        ln: &LevelNodes<Seq>,
        cands: &[Vec<Seq>],
        picked: &mut Vec<Seq>,
        chain: &mut Vec<Approximation>,
        remaining: usize,
    ) -> Result<bool> {
        let i = picked.len() / 2;
        if i == cands.len() {
            let mut v = picked.clone();
            v.sort();
            return self.label(a, ln, v, chain, remaining);
        }
        for pair in cands[i].iter().combinations(2) {
            self.tick()?;
            picked.push(pair[0].clone());
            picked.push(pair[1].clone());
            if self.admissible(a, ln, picked) && self.pick(a, ln, cands, picked, chain, remaining)? {
                return Ok(true);
            }
            picked.truncate(picked.len() - 2);
        }
        Ok(false)
    }

    /// Every `N`-subset touching the last two points is a node with a label
    /// compatible with `a`.
    fn admissible(&self, a: &Approximation, ln: &LevelNodes<Seq>, picked: &[Seq]) -> bool {
        let k = picked.len();
        (0..k).combinations(a.arity).filter(|u| u[a.arity - 1] >= k - 2).all(|u| {
            let members: Vec<Seq> = u.iter().map(|&i| picked[i].clone()).sorted().collect();
            !self.label_options(a, ln, &members).is_empty()
        })
    }

    fn label_options(&self, a: &Approximation, ln: &LevelNodes<Seq>, members: &[Seq]) -> Vec<Seq> {
        let Some(labels) = ln.labels.get(members) else {
            return Vec::new();
        };
        let lower: Vec<Seq> = members
            .iter()
            .map(|s| s.restrict(a.level))
            .sorted()
            .dedup()
            .collect();
        match (lower.len() == a.arity).then(|| a.label_of(&lower)).flatten() {
            Some(l) => labels.iter().filter(|t| l.is_prefix_of(t)).cloned().collect(),
            None => labels.clone(),
        }
    }

    fn label(
        &mut self,
        a: &Approximation,
        ln: &LevelNodes<Seq>,
        v: Vec<Seq>,
        chain: &mut Vec<Approximation>,
        remaining: usize,
    ) -> Result<bool> {
        let options: Vec<Vec<Seq>> = (0..v.len())
            .combinations(a.arity)
            .map(|u| {
                let m: Vec<Seq> = u.iter().map(|&i| v[i].clone()).collect();
                self.label_options(a, ln, &m)
            })
            .collect();
        for h in options.iter().map(|o| o.iter()).multi_cartesian_product() {
            self.tick()?;
            chain.push(Approx {
                level: ln.level,
                arity: a.arity,
                v: v.clone(),
                h: h.into_iter().cloned().collect(),
            });
            if self.extend(chain, remaining - 1)? {
                return Ok(true);
            }
            chain.pop();
        }
        Ok(false)
    }
}

/// The approximation determined by a family of long sequences at level `m`.
pub fn approx_from_family(
    t: &ColoringTree,
    points: &[Seq],
    witnesses: &HashMap<Vec<Seq>, Seq>,
    m: usize,
) -> Result<Approximation> {
    let mut v: Vec<Seq> = points.iter().map(|p| p.restrict(m)).collect();
    v.sort();
    if points.iter().any(|p| p.len() < m) {
        return Err(Error::pre(format!("family members are shorter than {m}")));
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::pre(format!(
            "two family members share their length-{m} restriction"
        )));
    }
    if v.len() < t.arity {
        return Err(Error::pre("family is smaller than the arity"));
    }
    let level = t.level_nodes(m);
    let mut h = Vec::new();
    for u in points.iter().cloned().sorted().combinations(t.arity) {
        let w = witnesses
            .get(&u)
            .ok_or_else(|| Error::pre(format!("no witness for {}", u.iter().join(","))))?
            .restrict(m);
        let members: Vec<Seq> = u.iter().map(|s| s.restrict(m)).collect();
        let present = level.labels.get(&members).is_some_and(|ls| ls.contains(&w));
        if !present {
            return Err(Error::pre(format!(
                "({}, {w}) is not a node at level {m}",
                members.iter().join(",")
            )));
        }
        h.push(w);
    }
    Ok(Approx {
        level: m,
        arity: t.arity,
        v,
        h,
    })
}

/// All pairs of distinct binary strings at each level below `h`, witness
/// constantly zero.
pub fn binary_tree(h: usize) -> ColoringTree {
    let mut t = ColoringTree::new(2, h, 0).expect("height is positive");
    for n in 0..h {
        for pair in binary_strings(n).into_iter().combinations(2) {
            t.insert(TreeNode::new(pair, Seq::zeros(n)).unwrap()).unwrap();
        }
    }
    t
}

/// The single pair `{0^n, 1^n}` at every level.
pub fn two_branch_tree(h: usize) -> ColoringTree {
    let mut t = ColoringTree::new(2, h, 0).expect("height is positive");
    for n in 1..h {
        t.insert(TreeNode::new(vec![Seq::zeros(n), Seq::constant(1, n)], Seq::zeros(n)).unwrap())
            .unwrap();
    }
    t
}

/// A random valid truncation built from full-height branches: each branch
/// is an `N`-tuple of sequences with a witness, entering the tree at some
/// level where its members are already distinct.
pub fn random_tree<R: Rng>(
    rng: &mut R,
    arity: usize,
    height: usize,
    branching: u32,
    colors: u32,
    branches: usize,
) -> ColoringTree {
    let mut t = ColoringTree::new(arity, height, 0).expect("valid shape");
    let top = height - 1;
    for _ in 0..branches {
        let members: Vec<Seq> = (0..arity)
            .map(|_| Seq((0..top).map(|_| rng.gen_range(0..branching)).collect()))
            .collect();
        let witness = Seq((0..top).map(|_| rng.gen_range(0..colors)).collect());
        let first = (0..=top).find(|&n| {
            members.iter().map(|s| s.restrict(n)).collect::<BTreeSet<_>>().len() == arity
        });
        let Some(first) = first else { continue };
        let start = rng.gen_range(first..=top);
        for n in start..=top {
            let v = members.iter().map(|s| s.restrict(n)).collect();
            t.insert(TreeNode::new(v, witness.restrict(n)).unwrap()).unwrap();
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
    fn binary_tree_is_valid_and_robust() {
        let t = binary_tree(4);
        assert!(validate_tree(&t).is_ok());
        let mut one_less = t.clone();
        let victim = one_less.levels[3].iter().next().unwrap().clone();
        one_less.levels[3].remove(&victim);
        assert!(validate_tree(&one_less).is_ok());
    }

    #[test]
    fn missing_extensions_are_reported() {
        let mut t = binary_tree(4);
        let base = TreeNode::new(vec![binary("00"), binary("01")], Seq::zeros(2)).unwrap();
        t.levels[3].retain(|o| !base.extended_by(o));
        let report = validate_tree(&t);
        assert_eq!(report.len(), 1);
        assert!(report.violations[0].detail.contains("t=0-0 v=0-0,0-1"));
    }

    #[test]
    fn approximation_counts() {
        let small = ApproxConfig { cap: 2, ..cfg() };
        assert_eq!(approximations(&binary_tree(2), 1, &small).unwrap().len(), 1);
        assert_eq!(approximations(&two_branch_tree(3), 1, &cfg()).unwrap().len(), 1);
        let tiny = ApproxConfig { cap: 1, ..cfg() };
        assert!(approximations(&binary_tree(2), 1, &tiny).is_err());
    }

    #[test]
    fn binary_ranks_follow_height() {
        let t = binary_tree(4);
        let rep = rank_all(&t, &cfg()).unwrap();
        for (a, v) in rep.iter() {
            if a.v.len() == 2 {
                assert_eq!(v as usize, 3 - a.level);
            }
        }
        assert_eq!(rep.tree_rank, 3);
    }

    #[test]
    fn two_branch_ranks_vanish() {
        let rep = rank_all(&two_branch_tree(3), &cfg()).unwrap();
        assert!(rep.iter().all(|(_, v)| v == 0));
        assert_eq!(rep.tree_rank, 1);
    }

    #[test]
    fn chain_doubles() {
        let t = binary_tree(5);
        let a = approximations(&t, 1, &cfg()).unwrap().remove(0);
        let out = extract_splitting_chain(&t, &a, 3, 100_000).unwrap();
        assert!(out.is_found());
        let sizes: Vec<usize> = out.chain().iter().map(|a| a.v.len()).collect();
        assert_eq!(sizes, vec![2, 4, 8, 16]);
        let l = two_branch_tree(4);
        let a = approximations(&l, 1, &cfg()).unwrap().remove(0);
        let out = extract_splitting_chain(&l, &a, 1, 1000).unwrap();
        assert_eq!(out, ChainOutcome::Stuck(vec![a.clone()]));
        let out = extract_splitting_chain(&l, &a, 0, 1000).unwrap();
        assert_eq!(out, ChainOutcome::Found(vec![a]));
    }

    #[test]
    fn family_restriction() {
        let t = binary_tree(4);
        let pts = vec![binary("000"), binary("111")];
        let w: HashMap<_, _> = [(pts.clone(), binary("000"))].into_iter().collect();
        let a = approx_from_family(&t, &pts, &w, 2).unwrap();
        assert_eq!(a.v, vec![binary("00"), binary("11")]);
        assert_eq!(a.h, vec![binary("00")]);
        assert!(approx_from_family(&t, &pts, &w, 0).is_err());
    }
}
