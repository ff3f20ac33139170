//! Finite conditions of the homogeneous-set forcing over a universal ranked
//! tree: validation, the order, density steps, amalgamation, the generic
//! chain and the rank-domination check.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use itertools::Itertools;

use crate::approx::{Approx, ApproxConfig, Color};
use crate::basic::{basic_to_general, validate_ranked, BasicApproximation, BasicColoringTree, RankedTree};
use crate::error::{Error, Result};
use crate::model::{Elem, RankedModelOracle};
use crate::ordinal::OrdinalCNF;
use crate::report::Report;
use crate::seq::Seq;
use crate::template::{validate_template, Embedding};
use crate::tree::{approx_from_family, rank_all};
use crate::universal::{ensure_extension, saturate, UniversalTree};

/// A finite approximation to the generic family: members `w` (the keys of
/// `eta`), their strings at level `n`, and the colors of member pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ForcingCondition {
    pub n: usize,
    pub eta: BTreeMap<Elem, Seq>,
    pub g: BTreeMap<(Elem, Elem), Color>,
}

fn ordered(a: Elem, b: Elem) -> (Elem, Elem) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl ForcingCondition {
    pub fn empty() -> Self {
        ForcingCondition::default()
    }

    pub fn members(&self) -> Vec<Elem> {
        self.eta.keys().copied().collect()
    }

    pub fn contains(&self, a: Elem) -> bool {
        self.eta.contains_key(&a)
    }

    pub fn color(&self, a: Elem, b: Elem) -> Option<Color> {
        self.g.get(&ordered(a, b)).copied()
    }

    /// The level-`n` approximation formed by the strings of `v`.
    pub fn approximation(&self, v: &[Elem]) -> Option<BasicApproximation> {
        family_approx(&self.eta, &self.g, v, self.n)
    }

    /// The same strings and colors carried by the members renamed through `f`.
    pub fn renamed(&self, f: &BTreeMap<Elem, Elem>) -> Result<Self> {
        let image = |a: &Elem| f.get(a).copied().ok_or_else(|| Error::pre(format!("{a} is not renamed")));
        let mut eta = BTreeMap::new();
        for (a, s) in &self.eta {
            eta.insert(image(a)?, s.clone());
        }
        let mut g = BTreeMap::new();
        for ((a, b), &k) in &self.g {
            g.insert(ordered(image(a)?, image(b)?), k);
        }
        Ok(ForcingCondition { n: self.n, eta, g })
    }

    /// Every string continued by `0`.
    pub fn zero_extended(&self) -> Self {
        ForcingCondition {
            n: self.n + 1,
            eta: self.eta.iter().map(|(&a, s)| (a, s.child(0))).collect(),
            g: self.g.clone(),
        }
    }
}

/// Approximation at level `m` formed by the restrictions of the strings
/// of `v`, labeled by the pair colors.
fn family_approx(
    eta: &BTreeMap<Elem, Seq>,
    g: &BTreeMap<(Elem, Elem), Color>,
    v: &[Elem],
    m: usize,
) -> Option<BasicApproximation> {
    let mut pts: Vec<(Seq, Elem)> = v
        .iter()
        .map(|a| eta.get(a).filter(|s| s.len() >= m).map(|s| (s.restrict(m), *a)))
        .collect::<Option<_>>()?;
    pts.sort();
    if pts.windows(2).any(|w| w[0].0 == w[1].0) {
        return None;
    }
    let mut labels = Vec::new();
    for pair in (0..pts.len()).combinations(2) {
        labels.push(*g.get(&ordered(pts[pair[0]].1, pts[pair[1]].1))?);
    }
    let mut it = labels.into_iter();
    Some(Approx::from_fn(m, 2, pts.into_iter().map(|p| p.0).collect(), |_| it.next().unwrap()))
}

pub fn validate_condition(p: &ForcingCondition, o: &RankedModelOracle, u: &RankedTree, cfg: &ApproxConfig) -> Report {
    let mut report = Report::new();
    let w = p.members();
    if w.is_empty() {
        return report;
    }
    let support = u.base.support_level(p.n);
    for (a, s) in &p.eta {
        if *a >= o.size {
            report.push("range", format!("{a} is outside the oracle universe"));
        }
        if s.len() != p.n {
            report.push("level", format!("eta({a})={s} is not at level {}", p.n));
        } else if !support.contains(s) {
            report.push("range", format!("eta({a})={s} is not in the tree"));
        }
    }
    let images: BTreeSet<&Seq> = p.eta.values().collect();
    if images.len() != p.eta.len() {
        report.push("injective", "two members share a string");
    }
    for &(a, b) in p.g.keys() {
        if a >= b || !p.contains(a) || !p.contains(b) {
            report.push("g", format!("color on {a},{b} which is not a member pair"));
        }
    }
    for pair in w.iter().combinations(2) {
        let (a, b) = (*pair[0], *pair[1]);
        match p.color(a, b) {
            None => report.push("g", format!("no color on {a},{b}")),
            Some(k) => {
                if !u.base.pair_colors(&p.eta[&a], &p.eta[&b]).contains(&k) {
                    report.push("node", format!("({}, {}, {k}) is not a node", p.eta[&a], p.eta[&b]));
                }
            }
        }
    }
    if !report.is_ok() {
        return report;
    }
    for size in 2..=w.len().min(cfg.cap) {
        for v in w.iter().copied().combinations(size) {
            let Some(entry) = o.get(&v) else { continue };
            let a = p.approximation(&v).expect("members are distinct and colored");
            match (u.r.get(&a), u.c.get(&a)) {
                (Some(r), Some(c)) => {
                    if r < &entry.rank {
                        report.push("rank", format!("{v:?}: oracle rank {} above r={r}", entry.rank));
                    }
                    if c != &p.eta[&entry.crit] {
                        report.push(
                            "critical",
                            format!("{v:?}: critical {} maps to {} but c={c}", entry.crit, p.eta[&entry.crit]),
                        );
                    }
                }
                _ => report.push("rank", format!("{v:?}: {} has no rank in the tree", a.key())),
            }
        }
    }
    report
}

/// `p ≤ q`: `q` is the stronger condition.
pub fn cond_leq(p: &ForcingCondition, q: &ForcingCondition) -> bool {
    p.n <= q.n
        && p.eta.iter().all(|(a, s)| q.eta.get(a).is_some_and(|t| &t.restrict(p.n) == s && t.len() == q.n))
        && p.g.iter().all(|(k, c)| q.g.get(k) == Some(c))
}

/// One level of growth through a template whose lower points are the
/// members of `p` and whose upper points are `uppers`.
#[derive(Clone, Copy, Debug)]
struct Upper {
    parent: usize,
    bit: u32,
    elem: Elem,
}

impl Upper {
    fn point(&self) -> Seq {
        Seq(vec![self.parent as u32, self.bit])
    }
}

fn lower(i: usize) -> Seq {
    Seq(vec![i as u32])
}

/// Builds the template for one step, extends through `u` and reads off
/// the next condition. `color` gives the color of an upper pair, `None`
/// standing for one fresh color.
fn step(
    p: &ForcingCondition,
    uppers: &[Upper],
    color: impl Fn(&Upper, &Upper) -> Option<Color>,
    o: &RankedModelOracle,
    u: &mut UniversalTree,
) -> Result<ForcingCondition> {
    if p.n + 1 >= u.height() {
        return Err(Error::Bounds(format!(
            "a condition at level {} has no room below height {}",
            p.n,
            u.height()
        )));
    }
    let w = p.members();
    let mut base = BasicColoringTree::new(3, 1)?;
    let mut fresh = 0;
    for pair in (0..w.len()).combinations(2) {
        let k = p
            .color(w[pair[0]], w[pair[1]])
            .ok_or_else(|| Error::pre(format!("no color on {},{}", w[pair[0]], w[pair[1]])))?;
        base.add_pair(lower(pair[0]), lower(pair[1]), k)?;
        fresh = fresh.max(k + 1);
    }
    if w.len() == 1 {
        base.add_anchor(lower(0))?;
    }
    for pair in uppers.iter().combinations(2) {
        let k = color(pair[0], pair[1]).unwrap_or(fresh);
        base.add_pair(pair[0].point(), pair[1].point(), k)?;
    }
    if uppers.len() == 1 {
        base.add_anchor(uppers[0].point())?;
    }
    let e = Embedding {
        f: w.iter().enumerate().map(|(i, a)| (lower(i), p.eta[a].clone())).collect(),
        f_star: p.g.values().map(|&k| (k, k)).collect(),
    };
    let chi: HashMap<Seq, Elem> = uppers.iter().map(|x| (x.point(), x.elem)).collect();
    let mut s = RankedTree::new(base, u.gamma().clone());
    let mut counter = 0;
    for a in s.base.level_nodes(1).enumerate(&u.cfg, &mut counter)? {
        let image = e.transport(&a)?;
        let (r, c) = match (u.tree.r.get(&image), u.tree.c.get(&image)) {
            (Some(r), Some(c)) => (r.clone(), c.clone()),
            _ => return Err(Error::pre(format!("{} has no rank in the universal tree", image.key()))),
        };
        let i = w
            .iter()
            .position(|x| p.eta[x] == c)
            .ok_or_else(|| Error::pre(format!("critical point {c} of {} is not a member", image.key())))?;
        s.set(a, r, lower(i));
    }
    for b in s.base.level_nodes(2).enumerate(&u.cfg, &mut counter)? {
        let elems: Vec<Elem> = b.v.iter().map(|x| chi[x]).sorted().collect();
        if let Some(entry) = o.get(&elems) {
            let c = b.v.iter().find(|x| chi[*x] == entry.crit).unwrap().clone();
            s.set(b, entry.rank.clone(), c);
            continue;
        }
        let parents: Vec<Seq> = b.v.iter().map(|x| x.restrict(1)).collect();
        let inherited = parents
            .windows(2)
            .all(|x| x[0] < x[1])
            .then(|| Approx::from_fn(1, 2, parents, |pair| *b.label(pair)))
            .and_then(|a| s.c.get(&a).cloned());
        let c = match inherited {
            Some(c) => b.v.iter().find(|x| c.is_prefix_of(x)).unwrap().clone(),
            None => b.v[0].clone(),
        };
        s.set(b, OrdinalCNF::zero(), c);
    }
    let mut report = validate_template(&s);
    report.extend(validate_ranked(&s, &u.cfg)?);
    if !report.is_ok() {
        return Err(Error::Precondition(format!("step template is not ranked:\n{report}")));
    }
    let full = ensure_extension(u, &s, &e, 1)?;
    let mut q = ForcingCondition {
        n: p.n + 1,
        ..Default::default()
    };
    for x in uppers {
        q.eta.insert(x.elem, full.f[&x.point()].clone());
    }
    for pair in uppers.iter().combinations(2) {
        let k = color(pair[0], pair[1]).unwrap_or(fresh);
        q.g.insert(ordered(pair[0].elem, pair[1].elem), full.f_star[&k]);
    }
    Ok(q)
}

/// A condition above `p` holding `alpha` at level at least `n`.
pub fn extend_into_dense(
    p: &ForcingCondition,
    alpha: Elem,
    n: usize,
    o: &RankedModelOracle,
    u: &mut UniversalTree,
) -> Result<ForcingCondition> {
    if alpha >= o.size {
        return Err(Error::pre(format!("{alpha} is outside the oracle universe of size {}", o.size)));
    }
    let mut q = if p.contains(alpha) {
        p.clone()
    } else if p.eta.is_empty() {
        if p.n >= u.height() {
            return Err(Error::Bounds(format!("level {} is above the tree", p.n)));
        }
        let mut q = p.clone();
        q.eta.insert(alpha, Seq::zeros(p.n));
        q
    } else {
        add_member(p, alpha, o, u)?
    };
    while q.n < n {
        if q.n + 1 >= u.height() {
            return Err(Error::Bounds(format!("level {n} is not below height {}", u.height())));
        }
        q = q.zero_extended();
    }
    Ok(q)
}

/// Puts `alpha` beside the least member: every member continues by `0`
/// and `alpha` takes the `1` child of the least one, joined to everything
/// by a fresh color.
fn add_member(p: &ForcingCondition, alpha: Elem, o: &RankedModelOracle, u: &mut UniversalTree) -> Result<ForcingCondition> {
    let w = p.members();
    let mut uppers: Vec<Upper> = w
        .iter()
        .enumerate()
        .map(|(i, &elem)| Upper { parent: i, bit: 0, elem })
        .collect();
    uppers.push(Upper {
        parent: 0,
        bit: 1,
        elem: alpha,
    });
    step(
        p,
        &uppers,
        |x, y| (x.bit == 0 && y.bit == 0).then(|| p.color(x.elem, y.elem).unwrap()),
        o,
        u,
    )
}

/// Checks the amalgamation preconditions for `p`, `q` and the order
/// isomorphism `f` from the members of `p` to those of `q`.
pub fn check_amalgamation(
    p: &ForcingCondition,
    q: &ForcingCondition,
    f: &BTreeMap<Elem, Elem>,
    o: &RankedModelOracle,
    cfg: &ApproxConfig,
) -> Report {
    let mut report = Report::new();
    if p.n != q.n {
        report.push("level", format!("levels {} and {} differ", p.n, q.n));
    }
    let (wp, wq) = (p.members(), q.members());
    if f.keys().copied().collect::<Vec<_>>() != wp {
        report.push("map", "the map's domain is not the members of p");
        return report;
    }
    let image: Vec<Elem> = f.values().copied().collect();
    if image.iter().sorted().copied().collect::<Vec<_>>() != wq {
        report.push("map", "the map's image is not the members of q");
        return report;
    }
    if image.windows(2).any(|x| x[0] >= x[1]) {
        report.push("map", "the map does not preserve order");
    }
    for (&a, &b) in f {
        if q.contains(a) && a != b {
            report.push("root", format!("common member {a} is sent to {b}"));
        }
        if p.contains(b) && a != b {
            report.push("root", format!("{a} is sent to {b}, a member of p"));
        }
        if p.eta.get(&a) != q.eta.get(&b) {
            report.push("eta", format!("eta({a}) and eta({b}) differ"));
        }
    }
    for pair in wp.iter().combinations(2) {
        let (a, b) = (*pair[0], *pair[1]);
        if p.color(a, b) != q.color(f[&a], f[&b]) {
            report.push("color", format!("colors of {a},{b} and their images differ"));
        }
    }
    for size in 2..=wp.len().min(cfg.cap) {
        for v in wp.iter().copied().combinations(size) {
            let fv: Vec<Elem> = v.iter().map(|a| f[a]).collect();
            match (o.get(&v), o.get(&fv)) {
                (None, None) => {}
                (Some(x), Some(y)) if x.rank == y.rank && f[&x.crit] == y.crit => {}
                _ => report.push("oracle", format!("{v:?} and {fv:?} carry different rank data")),
            }
        }
    }
    report
}

/// A common extension of `p` and `q`: members outside the common root
/// come in twins, the one from `p` continuing by `0` and the one from `q`
/// by `1`, and twins of distinct roots are joined by one fresh color.
pub fn amalgamate(
    p: &ForcingCondition,
    q: &ForcingCondition,
    f: &BTreeMap<Elem, Elem>,
    o: &RankedModelOracle,
    u: &mut UniversalTree,
) -> Result<ForcingCondition> {
    let report = check_amalgamation(p, q, f, o, &u.cfg);
    if !report.is_ok() {
        return Err(Error::Precondition(format!("cannot amalgamate:\n{report}")));
    }
    if p.eta.is_empty() {
        return Ok(p.clone());
    }
    let w = p.members();
    let root = |a: Elem| f[&a] == a;
    let mut uppers: Vec<Upper> = w
        .iter()
        .enumerate()
        .map(|(i, &elem)| Upper { parent: i, bit: 0, elem })
        .collect();
    uppers.extend(w.iter().enumerate().filter(|(_, &a)| !root(a)).map(|(i, &a)| Upper {
        parent: i,
        bit: 1,
        elem: f[&a],
    }));
    let color = |x: &Upper, y: &Upper| {
        let (a, b) = (w[x.parent], w[y.parent]);
        if x.bit == y.bit || (x.bit == 0 && root(a)) || (y.bit == 0 && root(b)) {
            p.color(a, b)
        } else {
            None
        }
    };
    step(p, &uppers, color, o, u)
}

/// The largest oracle rank plus one: the least `γ` whose ranks cover the
/// oracle.
pub fn matching_gamma(o: &RankedModelOracle) -> OrdinalCNF {
    o.entries
        .values()
        .map(|e| e.rank.succ())
        .max()
        .unwrap_or_else(|| OrdinalCNF::from_nat(1))
}

/// Output of the generic chain.
#[derive(Clone, Debug)]
pub struct GenericFamily {
    pub family: BTreeMap<Elem, Seq>,
    pub colors: BTreeMap<(Elem, Elem), Color>,
    /// Level of the first condition holding both members of a pair.
    pub first_level: BTreeMap<(Elem, Elem), usize>,
    pub chain: Vec<ForcingCondition>,
    pub saturation_steps: usize,
}

impl GenericFamily {
    /// Level at which the members of `w` first all sit in one condition.
    pub fn level_of(&self, w: &[Elem]) -> Option<usize> {
        w.iter()
            .tuple_combinations()
            .map(|(&a, &b)| self.first_level.get(&ordered(a, b)).copied())
            .try_fold(0, |acc, x| Some(acc.max(x?)))
    }

    pub fn approximation(&self, w: &[Elem]) -> Option<BasicApproximation> {
        family_approx(&self.family, &self.colors, w, self.level_of(w)?)
    }
}

/// Meets the dense sets "`α` is a member at level at least `n̂`" in the
/// order of `(n̂, α)` for `n̂ ≤ depth`, then realizes rank witnesses above
/// every approximation of the family of at most `cfg.cap` members.
pub fn generic_homogeneous(o: &RankedModelOracle, u: &mut UniversalTree, depth: usize) -> Result<GenericFamily> {
    let mut p = ForcingCondition::empty();
    let mut chain = vec![p.clone()];
    for n_hat in 0..=depth {
        for alpha in 0..o.size {
            if p.contains(alpha) && p.n >= n_hat {
                continue;
            }
            p = extend_into_dense(&p, alpha, n_hat, o, u).map_err(|e| match e {
                Error::Bounds(msg) => Error::Bounds(format!("dense set ({alpha}, {n_hat}): {msg}")),
                other => other,
            })?;
            chain.push(p.clone());
        }
    }
    let mut first_level = BTreeMap::new();
    for q in &chain {
        for pair in q.members().into_iter().combinations(2) {
            first_level.entry((pair[0], pair[1])).or_insert(q.n);
        }
    }
    let mut out = GenericFamily {
        family: p.eta.clone(),
        colors: p.g.clone(),
        first_level,
        chain,
        saturation_steps: 0,
    };
    let members = p.members();
    for size in 2..=members.len().min(u.cfg.cap) {
        for w in members.iter().copied().combinations(size) {
            let a = out.approximation(&w).expect("family members split by their common level");
            out.saturation_steps += saturate(u, &a)?;
        }
    }
    Ok(out)
}

/// Checks that the family is injective and that each pair's color is a
/// node at every level from its first common level to the family length.
pub fn verify_certificates(t: &RankedTree, gen: &GenericFamily) -> Report {
    let mut report = Report::new();
    let images: BTreeSet<&Seq> = gen.family.values().collect();
    if images.len() != gen.family.len() {
        report.push("injective", "two members share a string");
    }
    for (&(a, b), &k) in &gen.colors {
        let (x, y) = (&gen.family[&a], &gen.family[&b]);
        let Some(&from) = gen.first_level.get(&(a, b)) else {
            report.push("certificate", format!("{a},{b} never meet in a condition"));
            continue;
        };
        for n in from..=x.len().min(y.len()) {
            if !t.base.pair_colors(&x.restrict(n), &y.restrict(n)).contains(&k) {
                report.push("certificate", format!("{a},{b} lack color {k} at level {n}"));
            }
        }
    }
    report
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DominationEntry {
    pub members: Vec<Elem>,
    pub level: usize,
    pub oracle: Option<OrdinalCNF>,
    pub computed: u32,
    pub certifiable: u32,
    pub fail: bool,
}

#[derive(Clone, Debug, Default)]
pub struct DominationReport {
    pub entries: Vec<DominationEntry>,
}

impl DominationReport {
    pub fn failures(&self) -> impl Iterator<Item = &DominationEntry> {
        self.entries.iter().filter(|e| e.fail)
    }

    pub fn is_ok(&self) -> bool {
        self.failures().next().is_none()
    }
}

impl fmt::Display for DominationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            let oracle = e.oracle.as_ref().map_or("-".to_string(), |r| r.to_string());
            writeln!(
                f,
                "{} w={} level={} oracle={oracle} computed={} certifiable={}",
                if e.fail { "FAIL" } else { "PASS" },
                e.members.iter().join(","),
                e.level,
                e.computed,
                e.certifiable
            )?;
        }
        Ok(())
    }
}

/// For every set of `2..=cap` members: the truncation rank of the
/// approximation the family determines must reach the oracle rank, as far
/// as the height above its level can certify.
pub fn verify_domination(
    t: &RankedTree,
    gen: &GenericFamily,
    o: &RankedModelOracle,
    cap: usize,
    cfg: &ApproxConfig,
) -> Result<DominationReport> {
    let general = basic_to_general(&t.base);
    let ranks = rank_all(&general, cfg)?;
    let witnesses: HashMap<Vec<Seq>, Seq> = gen
        .colors
        .iter()
        .map(|(&(a, b), &k)| {
            let (x, y) = (&gen.family[&a], &gen.family[&b]);
            let key = if x < y { vec![x.clone(), y.clone()] } else { vec![y.clone(), x.clone()] };
            (key, Seq::constant(k, x.len()))
        })
        .collect();
    let members: Vec<Elem> = gen.family.keys().copied().collect();
    let mut report = DominationReport::default();
    for size in 2..=members.len().min(cap) {
        for w in members.iter().copied().combinations(size) {
            let level = gen
                .level_of(&w)
                .ok_or_else(|| Error::pre(format!("{w:?} never meet in a condition")))?;
            let points: Vec<Seq> = w.iter().map(|a| gen.family[a].clone()).collect();
            let a = approx_from_family(&general, &points, &witnesses, level)?;
            let computed = ranks
                .value(&a)
                .ok_or_else(|| Error::Internal(format!("{} is missing from the rank table", a.key())))?;
            let certifiable = (t.base.height - 1 - level) as u32;
            let oracle = o.rank(&w).cloned();
            let needed = oracle
                .as_ref()
                .map(|r| r.as_nat().map_or(certifiable, |r| (r as u32).min(certifiable)));
            report.entries.push(DominationEntry {
                members: w,
                level,
                fail: needed.is_some_and(|n| computed < n),
                oracle,
                computed,
                certifiable,
            });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FiniteModel;
    use crate::universal::build_universal;

    fn setup(size: u32, height: usize) -> (RankedModelOracle, UniversalTree) {
        let o = RankedModelOracle::from_model(&FiniteModel::empty(size), 2).unwrap();
        let u = build_universal(&matching_gamma(&o), height).unwrap();
        (o, u)
    }

    #[test]
    fn empty_condition_is_valid_and_least() {
        let (o, u) = setup(4, 4);
        let p = ForcingCondition::empty();
        assert!(validate_condition(&p, &o, &u.tree, &u.cfg).is_ok());
        let q = extend_into_dense(&p, 2, 2, &o, &mut { u }).unwrap();
        assert!(cond_leq(&p, &q) && cond_leq(&q, &q));
    }

    #[test]
    fn density_steps_stay_valid() {
        let (o, mut u) = setup(6, 6);
        let mut p = ForcingCondition::empty();
        for alpha in [0, 3, 1] {
            let q = extend_into_dense(&p, alpha, 1, &o, &mut u).unwrap();
            let rep = validate_condition(&q, &o, &u.tree, &u.cfg);
            assert!(rep.is_ok(), "{rep}");
            assert!(cond_leq(&p, &q) && q.contains(alpha) && q.n >= 1);
            p = q;
        }
        assert!(extend_into_dense(&p, 9, 1, &o, &mut u).is_err());
    }

    #[test]
    fn disjoint_singletons_amalgamate() {
        let (o, mut u) = setup(6, 6);
        let p = extend_into_dense(&ForcingCondition::empty(), 1, 2, &o, &mut u).unwrap();
        let q = ForcingCondition {
            eta: [(4, p.eta[&1].clone())].into(),
            ..p.clone()
        };
        let f = [(1, 4)].into();
        let t = amalgamate(&p, &q, &f, &o, &mut u).unwrap();
        assert_eq!(t.members(), vec![1, 4]);
        assert!(validate_condition(&t, &o, &u.tree, &u.cfg).is_ok());
        assert!(cond_leq(&p, &t) && cond_leq(&q, &t));
        let bad = [(1, 1)].into();
        assert!(amalgamate(&p, &q, &bad, &o, &mut u).is_err());
    }

    #[test]
    fn small_generic_family() {
        let (o, mut u) = setup(4, 6);
        let gen = generic_homogeneous(&o, &mut u, 4).unwrap();
        assert_eq!(gen.family.len(), 4);
        for q in &gen.chain {
            let rep = validate_condition(q, &o, &u.tree, &u.cfg);
            assert!(rep.is_ok(), "{rep}");
        }
        assert!(gen.chain.windows(2).all(|x| cond_leq(&x[0], &x[1])));
        assert!(verify_certificates(&u.tree, &gen).is_ok());
        let rep = verify_domination(&u.tree, &gen, &o, 4, &u.cfg).unwrap();
        assert!(rep.is_ok(), "{rep}");
    }
}
