//! Approximations `(v, h)` and the machinery shared by general and basic
//! coloring trees: enumeration, the successor relation, and the rank
//! fixpoint.
//!
//! An approximation stores `v` sorted and `h` as a vector aligned with the
//! `N`-subsets of `v` in lexicographic index order.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Debug;
use std::hash::Hash;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::seq::Seq;

/// Colors of basic coloring trees.
pub type Color = u32;

/// Labels attached to `N`-sets: witness sequences for general trees, colors
/// for basic trees.
pub trait Label: Clone + Ord + Eq + Hash + Debug {
    /// Whether `self`, sitting at a higher level, is compatible with `lower`.
    fn refines(&self, lower: &Self) -> bool;
    fn encode(&self) -> String;
    fn decode(s: &str) -> Result<Self>;
}

impl Label for Seq {
    fn refines(&self, lower: &Self) -> bool {
        lower.is_prefix_of(self)
    }
    fn encode(&self) -> String {
        self.to_string()
    }
    fn decode(s: &str) -> Result<Self> {
        s.parse()
    }
}

impl Label for Color {
    fn refines(&self, lower: &Self) -> bool {
        self == lower
    }
    fn encode(&self) -> String {
        self.to_string()
    }
    fn decode(s: &str) -> Result<Self> {
        s.parse()
            .map_err(|_| Error::parse(0, format!("bad color `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Approx<L> {
    pub level: usize,
    pub arity: usize,
    pub v: Vec<Seq>,
    pub h: Vec<L>,
}

pub(crate) fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Lexicographic rank of a sorted `k`-subset of `0..n`.
pub(crate) fn comb_rank(subset: &[usize], n: usize) -> usize {
    let k = subset.len();
    let mut rank = 0;
    let mut next = 0;
    for (i, &c) in subset.iter().enumerate() {
        for j in next..c {
            rank += binom(n - 1 - j, k - 1 - i);
        }
        next = c + 1;
    }
    rank
}

impl<L: Label> Approx<L> {
    /// Builds an approximation from sorted `v` and a label function on
    /// sorted index subsets.
    pub fn from_fn(level: usize, arity: usize, v: Vec<Seq>, mut f: impl FnMut(&[usize]) -> L) -> Self {
        let h = (0..v.len()).combinations(arity).map(|u| f(&u)).collect();
        Approx { level, arity, v, h }
    }

    pub fn label(&self, subset: &[usize]) -> &L {
        &self.h[comb_rank(subset, self.v.len())]
    }

    pub fn index_of(&self, s: &Seq) -> Option<usize> {
        self.v.binary_search(s).ok()
    }

    /// Label of an `N`-set given by members.
    pub fn label_of(&self, members: &[Seq]) -> Option<&L> {
        let mut idx: Vec<usize> = members
            .iter()
            .map(|m| self.index_of(m))
            .collect::<Option<_>>()?;
        idx.sort_unstable();
        if idx.windows(2).any(|w| w[0] == w[1]) || idx.len() != self.arity {
            return None;
        }
        Some(self.label(&idx))
    }

    /// The `N`-subsets together with their labels.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<Seq>, &L)> + '_ {
        (0..self.v.len())
            .combinations(self.arity)
            .zip(self.h.iter())
            .map(|(u, l)| (u.iter().map(|&i| self.v[i].clone()).collect(), l))
    }

    /// The sub-approximation on the members with the given sorted indices.
    pub fn sub(&self, keep: &[usize]) -> Approx<L> {
        let v = keep.iter().map(|&i| self.v[i].clone()).collect();
        Approx::from_fn(self.level, self.arity, v, |u| {
            let orig: Vec<usize> = u.iter().map(|&i| keep[i]).collect();
            self.label(&orig).clone()
        })
    }

    /// Canonical text key `[s,...|m;m:l;...]`.
    pub fn key(&self) -> String {
        let vs = self.v.iter().map(|s| s.to_string()).join(",");
        let hs = self
            .entries()
            .map(|(u, l)| format!("{}:{}", u.iter().map(|s| s.to_string()).join(";"), l.encode()))
            .join(";");
        format!("[{vs}|{hs}]")
    }

    pub fn parse_key(key: &str, arity: usize) -> Result<Self> {
        let inner = key
            .trim()
            .strip_prefix('[')
            .and_then(|k| k.strip_suffix(']'))
            .ok_or_else(|| Error::parse(0, format!("approximation key `{key}` lacks brackets")))?;
        let (vs, hs) = inner
            .split_once('|')
            .ok_or_else(|| Error::parse(0, format!("approximation key `{key}` lacks `|`")))?;
        let mut v: Vec<Seq> = vs.split(',').map(|s| s.parse()).collect::<Result<_>>()?;
        v.sort();
        if v.windows(2).any(|w| w[0] == w[1]) || v.len() < arity {
            return Err(Error::parse(0, format!("bad member set in `{key}`")));
        }
        let level = v[0].len();
        if v.iter().any(|s| s.len() != level) {
            return Err(Error::parse(0, format!("mixed lengths in `{key}`")));
        }
        let mut labels: HashMap<Vec<Seq>, L> = HashMap::new();
        let mut pending: Vec<Seq> = Vec::new();
        if !hs.is_empty() {
            for tok in hs.split(';') {
                if let Some((m, l)) = tok.split_once(':') {
                    pending.push(m.parse()?);
                    pending.sort();
                    if pending.len() != arity {
                        return Err(Error::parse(0, format!("wrong subset size in `{key}`")));
                    }
                    labels.insert(std::mem::take(&mut pending), L::decode(l)?);
                } else {
                    pending.push(tok.parse()?);
                }
            }
        }
        if !pending.is_empty() {
            return Err(Error::parse(0, format!("dangling subset in `{key}`")));
        }
        let subsets: Vec<Vec<Seq>> = (0..v.len())
            .combinations(arity)
            .map(|u| u.iter().map(|&i| v[i].clone()).collect())
            .collect();
        if labels.len() != subsets.len() || subsets.iter().any(|m| !labels.contains_key(m)) {
            return Err(Error::parse(0, format!("label table of `{key}` does not match its members")));
        }
        let h = subsets.iter().map(|m| labels[m].clone()).collect();
        let a = Approx { level, arity, v, h };
        Ok(a)
    }

    /// Restriction data relative to a lower level: for each member, the
    /// index of its restriction within the restricted set.
    pub fn restriction(&self, level: usize) -> (Vec<Seq>, Vec<usize>) {
        let restricted: Vec<Seq> = self.v.iter().map(|s| s.restrict(level)).collect();
        let set: Vec<Seq> = restricted.iter().cloned().sorted().dedup().collect();
        let parent = restricted
            .iter()
            .map(|r| set.binary_search(r).unwrap())
            .collect();
        (set, parent)
    }
}

/// The strict order on approximations, checked directly from the
/// definition on sequences.
pub fn approx_leq<L: Label>(a: &Approx<L>, b: &Approx<L>) -> bool {
    if a.level >= b.level || a.arity != b.arity {
        return false;
    }
    let n = a.level;
    let mut restricted: Vec<Seq> = b.v.iter().map(|s| s.restrict(n)).collect();
    restricted.sort();
    restricted.dedup();
    if restricted != a.v {
        return false;
    }
    for (u_prime, lab) in b.entries() {
        let mut u: Vec<Seq> = u_prime.iter().map(|s| s.restrict(n)).collect();
        u.sort();
        u.dedup();
        if u.len() == a.arity {
            match a.label_of(&u) {
                Some(lower) if lab.refines(lower) => {}
                _ => return false,
            }
        }
    }
    true
}

/// Whether `p` has at least two extensions among the members of `b`.
pub fn splits_in<L>(p: &Seq, b: &Approx<L>) -> bool {
    b.v.iter().filter(|s| p.is_prefix_of(s)).take(2).count() == 2
}

/// Enumeration limits for approximation sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ApproxConfig {
    /// Largest `|v|` enumerated.
    pub cap: usize,
    /// Largest number of approximations over all levels.
    pub budget: usize,
}

impl Default for ApproxConfig {
    fn default() -> Self {
        ApproxConfig {
            cap: 6,
            budget: 1_000_000,
        }
    }
}

/// The nodes of one level: candidate points and the labels of each
/// `N`-subset that is a node.
#[derive(Clone, Debug)]
pub struct LevelNodes<L> {
    pub level: usize,
    pub arity: usize,
    pub points: Vec<Seq>,
    pub labels: HashMap<Vec<Seq>, Vec<L>>,
    /// For each point, the later points sharing a node with it.
    later: Vec<Vec<usize>>,
}

impl<L: Label> LevelNodes<L> {
    pub fn new(level: usize, arity: usize) -> Self {
        LevelNodes {
            level,
            arity,
            points: Vec::new(),
            labels: HashMap::new(),
            later: Vec::new(),
        }
    }

    /// Registers a node; `members` need not be sorted.
    pub fn insert(&mut self, mut members: Vec<Seq>, label: L) {
        members.sort();
        let entry = self.labels.entry(members).or_default();
        if let Err(pos) = entry.binary_search(&label) {
            entry.insert(pos, label);
        }
    }

    pub fn finish(&mut self) {
        let mut pts: Vec<Seq> = self.labels.keys().flatten().cloned().collect();
        pts.sort();
        pts.dedup();
        let mut later: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); pts.len()];
        for members in self.labels.keys() {
            let idx: Vec<usize> = members.iter().map(|m| pts.binary_search(m).unwrap()).collect();
            for (&i, &j) in idx.iter().tuple_combinations() {
                later[i.min(j)].insert(i.max(j));
            }
        }
        self.later = later.into_iter().map(|s| s.into_iter().collect()).collect();
        self.points = pts;
    }

    /// All approximations on this level, within `cfg`.
    pub fn enumerate(&self, cfg: &ApproxConfig, counter: &mut usize) -> Result<Vec<Approx<L>>> {
        let n = self.arity;
        if cfg.cap < n {
            return Err(Error::pre(format!("size cap {} is below the arity {n}", cfg.cap)));
        }
        let mut out = Vec::new();
        self.grow(&mut Vec::new(), 0, cfg, counter, &mut out)?;
        Ok(out)
    }

    fn lookup(&self, idx: &[usize]) -> Option<&Vec<L>> {
        let m: Vec<Seq> = idx.iter().map(|&i| self.points[i].clone()).collect();
        self.labels.get(&m)
    }

    fn grow(
        &self,
        chosen: &mut Vec<usize>,
        start: usize,
        cfg: &ApproxConfig,
        counter: &mut usize,
        out: &mut Vec<Approx<L>>,
    ) -> Result<()> {
        if chosen.len() >= self.arity {
            self.emit(chosen, cfg, counter, out)?;
        }
        if chosen.len() == cfg.cap {
            return Ok(());
        }
        let candidates: Vec<usize> = match chosen.first() {
            None => (start..self.points.len()).collect(),
            Some(&first) => self.later[first]
                .iter()
                .copied()
                .filter(|&j| j >= start && chosen[1..].iter().all(|&c| self.later[c].binary_search(&j).is_ok()))
                .collect(),
        };
        'next: for j in candidates {
            // every new N-subset containing j must be a node
            if chosen.len() + 1 >= self.arity {
                for sub in chosen.iter().copied().combinations(self.arity - 1) {
                    let mut s = sub.clone();
                    s.push(j);
                    if self.lookup(&s).is_none() {
                        continue 'next;
                    }
                }
            }
            chosen.push(j);
            self.grow(chosen, j + 1, cfg, counter, out)?;
            chosen.pop();
        }
        Ok(())
    }

    fn emit(
        &self,
        chosen: &[usize],
        cfg: &ApproxConfig,
        counter: &mut usize,
        out: &mut Vec<Approx<L>>,
    ) -> Result<()> {
        let subsets: Vec<Vec<usize>> = chosen.iter().copied().combinations(self.arity).collect();
        let choices: Vec<&Vec<L>> = subsets.iter().map(|s| self.lookup(s).unwrap()).collect();
        let total: usize = choices.iter().map(|c| c.len()).product();
        if *counter + total > cfg.budget {
            return Err(Error::Budget {
                what: "approximations",
                limit: cfg.budget,
            });
        }
        *counter += total;
        let v: Vec<Seq> = chosen.iter().map(|&i| self.points[i].clone()).collect();
        for combo in choices.iter().map(|c| c.iter()).multi_cartesian_product() {
            out.push(Approx {
                level: self.level,
                arity: self.arity,
                v: v.clone(),
                h: combo.into_iter().cloned().collect(),
            });
        }
        Ok(())
    }
}

/// Approximations of a whole truncation, with the successor relation.
#[derive(Clone, Debug)]
pub struct ApproxSpace<L> {
    pub approxs: Vec<Approx<L>>,
    /// Index ranges per level.
    pub by_level: Vec<std::ops::Range<usize>>,
    index: HashMap<Approx<L>, usize>,
    /// For each approximation, its successors and, for each, the bitmask of
    /// members that split.
    pub succ: Vec<Vec<(usize, u64)>>,
}

impl<L: Label> ApproxSpace<L> {
    pub fn build(levels: &[LevelNodes<L>], cfg: &ApproxConfig) -> Result<Self> {
        let mut approxs = Vec::new();
        let mut by_level = Vec::new();
        let mut counter = 0;
        for lv in levels {
            let start = approxs.len();
            approxs.extend(lv.enumerate(cfg, &mut counter)?);
            by_level.push(start..approxs.len());
        }
        if cfg.cap > 64 {
            return Err(Error::pre("size cap above 64 is not supported"));
        }
        let index: HashMap<Approx<L>, usize> =
            approxs.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        let mut by_set: HashMap<(usize, Vec<Seq>), Vec<usize>> = HashMap::new();
        for (i, a) in approxs.iter().enumerate() {
            by_set.entry((a.level, a.v.clone())).or_default().push(i);
        }
        let mut succ = vec![Vec::new(); approxs.len()];
        for (bi, b) in approxs.iter().enumerate() {
            for lower in 0..b.level {
                if by_level.get(lower).is_none_or(|r| r.is_empty()) {
                    continue;
                }
                let (set, parent) = b.restriction(lower);
                let Some(cands) = by_set.get(&(lower, set)) else {
                    continue;
                };
                let mut counts = vec![0u8; parent.len()];
                for &p in &parent {
                    counts[p] = counts[p].saturating_add(1);
                }
                let mask = counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c >= 2)
                    .fold(0u64, |m, (i, _)| m | (1 << i));
                for &ai in cands {
                    if compatible(&approxs[ai], b, &parent) {
                        succ[ai].push((bi, mask));
                    }
                }
            }
        }
        Ok(ApproxSpace {
            approxs,
            by_level,
            index,
            succ,
        })
    }

    pub fn len(&self) -> usize {
        self.approxs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.approxs.is_empty()
    }

    pub fn id(&self, a: &Approx<L>) -> Option<usize> {
        self.index.get(a).copied()
    }

    /// The rank fixpoint, evaluated level by level from the top.
    ///
    /// `value(a) = min_p (1 + max { value(b) : a < b, p splits in b })`,
    /// with the empty maximum read as `-1`.
    pub fn ranks(&self) -> Vec<u32> {
        let mut value = vec![0u32; self.approxs.len()];
        for range in self.by_level.iter().rev() {
            for ai in range.clone() {
                value[ai] = self.value_from(ai, &value).0;
            }
        }
        value
    }

    /// Returns `(value, critical members)` for one approximation given the
    /// values of all higher approximations.
    pub fn value_from(&self, ai: usize, value: &[u32]) -> (u32, Vec<usize>) {
        let a = &self.approxs[ai];
        let per_point: Vec<i64> = (0..a.v.len())
            .map(|p| {
                1 + self.succ[ai]
                    .iter()
                    .filter(|(_, mask)| mask & (1 << p) != 0)
                    .map(|&(b, _)| value[b] as i64)
                    .max()
                    .unwrap_or(-1)
            })
            .collect();
        let best = *per_point.iter().min().expect("approximation has members");
        let crit = (0..a.v.len()).filter(|&p| per_point[p] == best).collect();
        (best as u32, crit)
    }
}

/// Rank values for every approximation of a truncation.
#[derive(Clone, Debug)]
pub struct RankReport<L> {
    pub space: ApproxSpace<L>,
    pub values: Vec<u32>,
    /// `max(value + 1)`, or 0 when there are no approximations.
    pub tree_rank: u32,
}

impl<L: Label> RankReport<L> {
    pub fn compute(levels: &[LevelNodes<L>], cfg: &ApproxConfig) -> Result<Self> {
        let space = ApproxSpace::build(levels, cfg)?;
        let values = space.ranks();
        let tree_rank = values.iter().map(|v| v + 1).max().unwrap_or(0);
        Ok(RankReport {
            space,
            values,
            tree_rank,
        })
    }

    pub fn value(&self, a: &Approx<L>) -> Option<u32> {
        self.space.id(a).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Approx<L>, u32)> {
        self.space.approxs.iter().zip(self.values.iter().copied())
    }

    /// Indices (into `a.v`) of the members attaining the minimum.
    pub fn critical(&self, a: &Approx<L>) -> Option<Vec<usize>> {
        self.space.id(a).map(|i| self.space.value_from(i, &self.values).1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn compatible<L: Label>(a: &Approx<L>, b: &Approx<L>, parent: &[usize]) -> bool {
    for (u_prime, lab) in (0..b.v.len()).combinations(b.arity).zip(b.h.iter()) {
        let mut u: Vec<usize> = u_prime.iter().map(|&i| parent[i]).collect();
        u.sort_unstable();
        u.dedup();
        if u.len() == a.arity && !lab.refines(a.label(&u)) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comb_rank_matches_enumeration() {
        for n in 0..7 {
            for k in 0..=n {
                for (i, c) in (0..n).combinations(k).enumerate() {
                    assert_eq!(comb_rank(&c, n), i, "n={n} k={k} c={c:?}");
                }
            }
        }
    }

    #[test]
    fn key_roundtrip() {
        let v = vec!["0-0".parse().unwrap(), "0-1".parse().unwrap(), "1-1".parse().unwrap()];
        let a: Approx<Color> = Approx::from_fn(2, 2, v, |u| (u[0] + 3 * u[1]) as u32);
        let k = a.key();
        assert_eq!(k, "[0-0,0-1,1-1|0-0;0-1:3;0-0;1-1:6;0-1;1-1:7]");
        assert_eq!(Approx::<Color>::parse_key(&k, 2).unwrap(), a);
        assert!(Approx::<Color>::parse_key("[0-0,0-1|]", 2).is_err());
    }
}
