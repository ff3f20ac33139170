//! Height-two ranked trees with binary support, and embeddings between
//! ranked trees.
//!
//! A template lives on levels 1 and 2: lower points are `[i]`, upper points
//! are `[i, 0]` and `[i, 1]`.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;

use crate::approx::{Approx, ApproxConfig, ApproxSpace, Color};
use crate::basic::{BasicApproximation, BasicColoringTree, BasicNode, RankedTree};
use crate::error::{Error, Result};
use crate::ordinal::OrdinalCNF;
use crate::report::Report;
use crate::seq::Seq;

pub type Template = RankedTree;

/// Size limits for template enumeration. All maxima are inclusive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateBounds {
    pub max_points: usize,
    pub max_colors: usize,
    /// Largest number of upper-level nodes; `None` for no limit.
    pub max_nodes: Option<usize>,
    pub ranks: Vec<OrdinalCNF>,
}

impl TemplateBounds {
    /// Bounds given as strict upper limits on lower points and colors.
    pub fn strict(node_bound: usize, color_bound: usize, ranks: Vec<OrdinalCNF>) -> Self {
        TemplateBounds {
            max_points: node_bound.saturating_sub(1),
            max_colors: color_bound.saturating_sub(1),
            max_nodes: None,
            ranks,
        }
    }

    pub fn admits(&self, s: &Template) -> bool {
        let lower = s.base.support_level(1).len();
        let colors = s.base.colors().len();
        let nodes = s.base.levels.get(2).map_or(0, |l| l.len());
        lower <= self.max_points
            && colors <= self.max_colors
            && self.max_nodes.is_none_or(|m| nodes <= m)
            && s.r.values().all(|r| self.ranks.contains(r))
    }
}

/// Structural conditions for a template (ranked conditions are checked by
/// [`crate::basic::validate_ranked`]).
pub fn validate_template(s: &Template) -> Report {
    let mut report = Report::new();
    let b = &s.base;
    if b.height != 3 || b.min_level != 1 {
        report.push("shape", format!("template must span levels 1..2, got min={} H={}", b.min_level, b.height));
        return report;
    }
    let support = b.support();
    for x in support.iter().filter(|x| x.len() == 1) {
        let kids = support.iter().filter(|y| y.len() == 2 && x.is_prefix_of(y)).count();
        if kids == 0 || kids > 2 {
            report.push("binary", format!("{x} has {kids} extensions"));
        }
    }
    report.extend(crate::basic::validate_basic(b));
    report
}

fn lower(i: usize) -> Seq {
    Seq(vec![i as u32])
}

fn upper(i: usize, e: u32) -> Seq {
    Seq(vec![i as u32, e])
}

/// Applies a relabeling of points and colors to a ranked tree.
pub fn transport(
    rt: &RankedTree,
    f: &BTreeMap<Seq, Seq>,
    f_star: &BTreeMap<Color, Color>,
    height: usize,
    min_level: usize,
) -> Result<RankedTree> {
    let mut base = BasicColoringTree::new(height, min_level)?;
    for p in rt.base.nodes() {
        let (x, y) = (map(f, &p.x)?, map(f, &p.y)?);
        let k = *f_star
            .get(&p.k)
            .ok_or_else(|| Error::pre(format!("color {} is not mapped", p.k)))?;
        base.insert(BasicNode::new(x, y, k)?)?;
    }
    for a in &rt.base.anchors {
        base.add_anchor(map(f, a)?)?;
    }
    let mut out = RankedTree::new(base, rt.gamma.clone());
    for (a, r) in &rt.r {
        let moved = transport_approx(a, f, f_star)?;
        out.set(moved, r.clone(), map(f, &rt.c[a])?);
    }
    Ok(out)
}

fn map(f: &BTreeMap<Seq, Seq>, s: &Seq) -> Result<Seq> {
    f.get(s)
        .cloned()
        .ok_or_else(|| Error::pre(format!("point {s} is not mapped")))
}

/// The image `(u^f, h^f)` of an approximation.
pub fn transport_approx(
    a: &BasicApproximation,
    f: &BTreeMap<Seq, Seq>,
    f_star: &BTreeMap<Color, Color>,
) -> Result<BasicApproximation> {
    let mut pairs: Vec<(Seq, usize)> = a
        .v
        .iter()
        .enumerate()
        .map(|(i, s)| map(f, s).map(|t| (t, i)))
        .collect::<Result<_>>()?;
    pairs.sort();
    let v: Vec<Seq> = pairs.iter().map(|(t, _)| t.clone()).collect();
    let level = v.first().map_or(0, |s| s.len());
    let orig: Vec<usize> = pairs.iter().map(|&(_, i)| i).collect();
    let mut missing = None;
    let out = Approx::from_fn(level, a.arity, v, |u| {
        let mut idx: Vec<usize> = u.iter().map(|&i| orig[i]).collect();
        idx.sort_unstable();
        let k = *a.label(&idx);
        *f_star.get(&k).unwrap_or_else(|| {
            missing = Some(k);
            &0
        })
    });
    match missing {
        Some(k) => Err(Error::pre(format!("color {k} is not mapped"))),
        None => Ok(out),
    }
}

/// A point map between supports together with the induced color map.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Embedding {
    pub f: BTreeMap<Seq, Seq>,
    pub f_star: BTreeMap<Color, Color>,
}

impl Embedding {
    pub fn image(&self, s: &Seq) -> Option<&Seq> {
        self.f.get(s)
    }

    pub fn transport(&self, a: &BasicApproximation) -> Result<BasicApproximation> {
        transport_approx(a, &self.f, &self.f_star)
    }
}

/// Levels of `s` covered by an embedding: from the first pair level up.
pub(crate) fn domain_levels(s: &BasicColoringTree) -> std::ops::Range<usize> {
    let first = (s.min_level..s.height)
        .find(|&n| !s.levels[n].is_empty())
        .or_else(|| s.anchors.iter().map(|a| a.len()).filter(|&n| n >= s.min_level).min())
        .unwrap_or(s.height);
    first..s.height
}

/// Checks every clause of the embedding definition on the support of `s`
/// from its first pair level upward.
pub fn validate_embedding(
    e: &Embedding,
    s: &RankedTree,
    t: &RankedTree,
    cfg: &ApproxConfig,
) -> Result<Report> {
    let mut report = Report::new();
    let levels = domain_levels(&s.base);
    let domain: Vec<Seq> = s
        .base
        .support()
        .into_iter()
        .filter(|x| levels.contains(&x.len()))
        .collect();
    for x in &domain {
        if !e.f.contains_key(x) {
            report.push("domain", format!("{x} is not mapped"));
        }
    }
    if !report.is_ok() {
        return Ok(report);
    }
    let images: BTreeSet<&Seq> = e.f.values().collect();
    if images.len() != e.f.len() {
        report.push("injective", "two points share an image");
    }
    let color_images: BTreeSet<&Color> = e.f_star.values().collect();
    if color_images.len() != e.f_star.len() {
        report.push("injective", "two colors share an image");
    }
    for (x, y) in domain.iter().tuple_combinations() {
        let (fx, fy) = (&e.f[x], &e.f[y]);
        if (x.len() == y.len()) != (fx.len() == fy.len()) {
            report.push("level", format!("{x} and {y} change level relation"));
        }
        if x.is_prefix_of(y) != fx.is_prefix_of(fy) || y.is_prefix_of(x) != fy.is_prefix_of(fx) {
            report.push("order", format!("{x} and {y} change prefix relation"));
        }
    }
    for p in s.base.nodes().filter(|p| levels.contains(&p.level())) {
        match e.f_star.get(&p.k) {
            Some(&k) if t.base.has_pair(&e.f[&p.x], &e.f[&p.y], k) => {}
            Some(&k) => report.push(
                "color",
                format!("({}, {}, {}) maps to missing ({}, {}, {k})", p.x, p.y, p.k, e.f[&p.x], e.f[&p.y]),
            ),
            None => report.push("color", format!("color {} is not mapped", p.k)),
        }
    }
    if !report.is_ok() {
        return Ok(report);
    }
    let space = ApproxSpace::build(&s.base.all_level_nodes(), cfg)?;
    for a in space.approxs.iter().filter(|a| levels.contains(&a.level)) {
        let (Some(rs), Some(cs)) = (s.r.get(a), s.c.get(a)) else {
            report.push("domain", format!("{} has no r or c in the source", a.key()));
            continue;
        };
        let image = e.transport(a)?;
        match (t.r.get(&image), t.c.get(&image)) {
            (Some(rt), Some(ct)) => {
                if rs > rt {
                    report.push("rank", format!("{} has r={rs} above the image r={rt}", a.key()));
                }
                if &e.f[cs] != ct {
                    report.push(
                        "critical",
                        format!("{} has c={cs} mapping to {} but the image has c={ct}", a.key(), e.f[cs]),
                    );
                }
            }
            _ => report.push("rank", format!("image {} of {} has no r or c", image.key(), a.key())),
        }
    }
    Ok(report)
}

/// Canonical text of a template under all relabelings of lower points,
/// child order and colors.
pub fn canonical_key(s: &Template) -> String {
    let lowers: Vec<Seq> = s.base.support_level(1).into_iter().collect();
    let colors: Vec<Color> = s.base.colors().into_iter().collect();
    let support = s.base.support();
    let kids: Vec<Vec<Seq>> = lowers
        .iter()
        .map(|x| support.iter().filter(|y| y.len() == 2 && x.is_prefix_of(y)).cloned().collect())
        .collect();
    let mut best: Option<String> = None;
    for perm in (0..lowers.len()).permutations(lowers.len()) {
        for flips in 0..(1u32 << lowers.len()) {
            let mut f = BTreeMap::new();
            for (i, x) in lowers.iter().enumerate() {
                let to = perm[i];
                f.insert(x.clone(), lower(to));
                let flip = (flips >> i) & 1 == 1;
                if flip && kids[i].len() < 2 {
                    continue;
                }
                for (j, y) in kids[i].iter().enumerate() {
                    let e = if flip { 1 - j as u32 } else { j as u32 };
                    f.insert(y.clone(), upper(to, e));
                }
            }
            if flips != 0 && (0..lowers.len()).any(|i| (flips >> i) & 1 == 1 && kids[i].len() < 2) {
                continue;
            }
            for cperm in (0..colors.len()).permutations(colors.len()) {
                let f_star: BTreeMap<Color, Color> =
                    colors.iter().zip(cperm.iter()).map(|(&k, &to)| (k, to as Color)).collect();
                let moved = transport(s, &f, &f_star, 3, 1).expect("relabeling is total");
                let key = encode(&moved);
                if best.as_ref().is_none_or(|b| &key < b) {
                    best = Some(key);
                }
            }
        }
    }
    best.unwrap_or_default()
}

fn encode(s: &Template) -> String {
    let nodes = s.base.nodes().map(|p| format!("{};{}:{}", p.x, p.y, p.k)).join(" ");
    let table = s
        .entries()
        .into_iter()
        .map(|(k, (_, r, c))| format!("{k}={r}/{c}"))
        .join(" ");
    format!("{nodes} | {table}")
}

/// One representative for every isomorphism type of rooted template within
/// `bounds`: every lower point lies in a lower node.
pub fn enumerate_templates(
    bounds: &TemplateBounds,
    gamma: &OrdinalCNF,
    cfg: &ApproxConfig,
    limit: usize,
) -> Result<Vec<Template>> {
    let mut found: BTreeMap<String, Template> = BTreeMap::new();
    let mut ranks = bounds.ranks.clone();
    ranks.retain(|r| r < gamma);
    ranks.sort();
    ranks.dedup();
    if ranks.is_empty() {
        return Ok(Vec::new());
    }
    let mut produced = 0usize;
    for structure in template_structures(bounds) {
        let space = ApproxSpace::build(&structure.all_level_nodes(), cfg)?;
        let mut assign = Assigner::new(&space, &ranks, limit, produced);
        assign.run(0)?;
        produced = assign.produced;
        for (r, c) in assign.out {
            let mut t = RankedTree::new(structure.clone(), gamma.clone());
            for (i, a) in space.approxs.iter().enumerate() {
                t.set(a.clone(), ranks[r[i]].clone(), a.v[c[i]].clone());
            }
            found.entry(canonical_key(&t)).or_insert(t);
        }
    }
    Ok(found.into_values().collect())
}

/// Lower point sets, child counts and node sets of rooted binary templates.
fn template_structures(bounds: &TemplateBounds) -> Vec<BasicColoringTree> {
    let mut out = Vec::new();
    for points in 2..=bounds.max_points {
        for ncolors in 1..=bounds.max_colors {
            let lower_nodes: Vec<(usize, usize, Color)> = (0..points)
                .tuple_combinations()
                .flat_map(|(i, j)| (0..ncolors as Color).map(move |k| (i, j, k)))
                .collect();
            for lower_set in lower_nodes.iter().powerset().skip(1) {
                let covered: BTreeSet<usize> = lower_set.iter().flat_map(|&&(i, j, _)| [i, j]).collect();
                if covered.len() != points {
                    continue;
                }
                for mask in 0..(1u32 << points) {
                    let uppers: Vec<Seq> = (0..points)
                        .flat_map(|i| {
                            let two = (mask >> i) & 1 == 1;
                            std::iter::once(upper(i, 0)).chain(two.then(|| upper(i, 1)))
                        })
                        .collect();
                    let upper_nodes: Vec<(Seq, Seq, Color)> = uppers
                        .iter()
                        .tuple_combinations()
                        .flat_map(|(x, y)| (0..ncolors as Color).map(move |k| (x.clone(), y.clone(), k)))
                        .collect();
                    let max = bounds.max_nodes.unwrap_or(upper_nodes.len()).min(upper_nodes.len());
                    for size in 1..=max {
                        for upper_set in upper_nodes.iter().combinations(size) {
                            let t = assemble(&lower_set, &upper_set, points, &uppers, ncolors);
                            if let Some(t) = t {
                                out.push(t);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn assemble(
    lower_set: &[&(usize, usize, Color)],
    upper_set: &[&(Seq, Seq, Color)],
    points: usize,
    uppers: &[Seq],
    ncolors: usize,
) -> Option<BasicColoringTree> {
    let touched: BTreeSet<&Seq> = upper_set.iter().flat_map(|(x, y, _)| [x, y]).collect();
    if touched.len() != uppers.len() {
        return None;
    }
    let used: BTreeSet<Color> = lower_set
        .iter()
        .map(|t| t.2)
        .chain(upper_set.iter().map(|t| t.2))
        .collect();
    if used.len() != ncolors {
        return None;
    }
    for &&(i, j, k) in lower_set {
        let extended = upper_set
            .iter()
            .any(|(x, y, kk)| *kk == k && x.0[0] as usize == i && y.0[0] as usize == j);
        if !extended {
            return None;
        }
    }
    let mut t = BasicColoringTree::new(3, 1).ok()?;
    for &&(i, j, k) in lower_set {
        t.add_pair(lower(i), lower(j), k).ok()?;
    }
    for (x, y, k) in upper_set {
        t.add_pair(x.clone(), y.clone(), *k).ok()?;
    }
    debug_assert!(t.support_level(1).len() == points);
    Some(t)
}

/// Backtracking search for `r` (as indices into the rank list) and `c`
/// (as indices into `v`) satisfying the ranked-tree conditions.
struct Assigner<'a> {
    space: &'a ApproxSpace<Color>,
    ranks: &'a [OrdinalCNF],
    order: Vec<usize>,
    pred: Vec<Vec<(usize, u64)>>,
    subs: Vec<Vec<usize>>,
    r: Vec<usize>,
    c: Vec<usize>,
    out: Vec<(Vec<usize>, Vec<usize>)>,
    limit: usize,
    produced: usize,
}

impl<'a> Assigner<'a> {
    fn new(space: &'a ApproxSpace<Color>, ranks: &'a [OrdinalCNF], limit: usize, produced: usize) -> Self {
        let n = space.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| (space.approxs[i].level, space.approxs[i].v.len(), i));
        let mut pred = vec![Vec::new(); n];
        for (a, succ) in space.succ.iter().enumerate() {
            for &(b, mask) in succ {
                pred[b].push((a, mask));
            }
        }
        let mut subs = vec![Vec::new(); n];
        for (i, a) in space.approxs.iter().enumerate() {
            for size in 2..a.v.len() {
                for keep in (0..a.v.len()).combinations(size) {
                    if let Some(j) = space.id(&a.sub(&keep)) {
                        subs[i].push(j);
                    }
                }
            }
        }
        Assigner {
            space,
            ranks,
            order,
            pred,
            subs,
            r: vec![0; n],
            c: vec![0; n],
            out: Vec::new(),
            limit,
            produced,
        }
    }

    fn run(&mut self, pos: usize) -> Result<()> {
        if pos == self.order.len() {
            self.produced += 1;
            if self.produced > self.limit {
                return Err(Error::Budget {
                    what: "template assignments",
                    limit: self.limit,
                });
            }
            self.out.push((self.r.clone(), self.c.clone()));
            return Ok(());
        }
        let b = self.order[pos];
        let size = self.space.approxs[b].v.len();
        for ri in 0..self.ranks.len() {
            for ci in 0..size {
                self.r[b] = ri;
                self.c[b] = ci;
                if self.consistent(b) {
                    self.run(pos + 1)?;
                }
            }
        }
        Ok(())
    }

    fn consistent(&self, b: usize) -> bool {
        let bx = &self.space.approxs[b];
        if self.subs[b].iter().any(|&w| self.r[w] < self.r[b]) {
            return false;
        }
        for &(a, mask) in &self.pred[b] {
            let ax = &self.space.approxs[a];
            if self.r[a] < self.r[b] {
                return false;
            }
            if mask & (1 << self.c[a]) != 0 && self.r[a] == self.r[b] {
                return false;
            }
            if self.r[a] == self.r[b]
                && ax.v.len() == bx.v.len()
                && !ax.v[self.c[a]].is_prefix_of(&bx.v[self.c[b]])
            {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basic::validate_ranked;

    fn cfg() -> ApproxConfig {
        ApproxConfig::default()
    }

    #[test]
    fn too_few_points_gives_nothing() {
        let b = TemplateBounds::strict(2, 2, vec![OrdinalCNF::zero()]);
        assert!(enumerate_templates(&b, &OrdinalCNF::from_nat(1), &cfg(), 1000).unwrap().is_empty());
    }

    #[test]
    fn enumerated_templates_validate() {
        let b = TemplateBounds {
            max_nodes: Some(2),
            ..TemplateBounds::strict(3, 2, vec![OrdinalCNF::zero(), OrdinalCNF::from_nat(1)])
        };
        let ts = enumerate_templates(&b, &OrdinalCNF::from_nat(2), &cfg(), 1_000_000).unwrap();
        assert!(ts.len() > 10, "{}", ts.len());
        for t in &ts {
            assert!(validate_template(t).is_ok());
            assert!(validate_ranked(t, &cfg()).unwrap().is_ok());
            assert!(b.admits(t));
        }
    }

    #[test]
    fn identity_embeds() {
        let b = TemplateBounds::strict(3, 2, vec![OrdinalCNF::zero()]);
        let ts = enumerate_templates(&b, &OrdinalCNF::from_nat(1), &cfg(), 1_000_000).unwrap();
        let t = &ts[0];
        let e = Embedding {
            f: t.base.support().into_iter().filter(|s| !s.is_empty()).map(|s| (s.clone(), s)).collect(),
            f_star: t.base.colors().into_iter().map(|k| (k, k)).collect(),
        };
        assert!(validate_embedding(&e, t, t, &cfg()).unwrap().is_ok());
        let mut collapse = e.clone();
        let first = collapse.f.keys().next().unwrap().clone();
        let last = collapse.f.keys().last().unwrap().clone();
        let img = collapse.f[&first].clone();
        collapse.f.insert(last, img);
        assert!(validate_embedding(&collapse, t, t, &cfg()).unwrap().count("injective") > 0);
    }
}
