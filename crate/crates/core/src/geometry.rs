//! Exact realization of a finite pair coloring of binary strings as the
//! defect pattern of a point set on the moment curve: removed interior
//! points, convex-hull membership and relative-interior disjointness, all
//! in rational arithmetic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::report::Report;
use crate::seq::Seq;

pub type Rational = BigRational;

/// Default cap on explicit `2N`-subset determinants before falling back to
/// the Vandermonde certificate.
pub const DEFAULT_GP_LIMIT: usize = 5_000;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalPoint(pub Vec<Rational>);

impl RationalPoint {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    fn scaled_add(&self, a: &Rational, other: &RationalPoint, b: &Rational) -> RationalPoint {
        RationalPoint(self.0.iter().zip(&other.0).map(|(x, y)| a * x + b * y).collect())
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.iter().map(fmt_rational).join(","))
    }
}

impl FromStr for RationalPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.split(',').map(parse_rational).collect::<Result<_>>().map(RationalPoint)
    }
}

pub fn fmt_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `p/q` or a plain integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::parse(0, format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(p, q))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Middle-thirds parameter of a binary string.
pub fn parameter(s: &Seq) -> Rational {
    let mut t = Rational::zero();
    let mut scale = Rational::one();
    let third = rat(1, 3);
    for &bit in &s.0 {
        scale *= &third;
        t += &scale * Rational::from_integer(BigInt::from(bit));
    }
    t
}

/// `(t, t², …, t^(2N−1))` for the parameter `t` of `s`.
pub fn point_of(s: &Seq, arity: usize) -> RationalPoint {
    moment_point(&parameter(s), 2 * arity - 1)
}

fn moment_point(t: &Rational, dim: usize) -> RationalPoint {
    let mut out = Vec::with_capacity(dim);
    let mut power = t.clone();
    for _ in 0..dim {
        out.push(power.clone());
        power *= t;
    }
    RationalPoint(out)
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(m: &mut [Vec<Rational>], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        let Some(found) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, found);
        let inv = m[row][col].recip();
        for x in m[row].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i != row && !m[i][col].is_zero() {
                let factor = m[i][col].clone();
                for j in 0..m[i].len() {
                    let delta = &factor * &m[row][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    pivots
}

pub fn determinant(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(found) = (col..n).find(|&i| !m[i][col].is_zero()) else {
            return Rational::zero();
        };
        if found != col {
            m.swap(found, col);
            det = -det;
        }
        det *= &m[col][col];
        for i in col + 1..n {
            if !m[i][col].is_zero() {
                let factor = &m[i][col] / &m[col][col];
                let (upper, lower) = m.split_at_mut(i);
                for (x, p) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                    *x -= &factor * p;
                }
            }
        }
    }
    det
}

/// Columns `(p, 1)` of the points, one row per coordinate plus the row of
/// ones, with `rhs` appended when given.
fn affine_matrix(points: &[RationalPoint], rhs: Option<&RationalPoint>) -> Vec<Vec<Rational>> {
    let dim = points.first().map_or(0, |p| p.dim());
    let mut rows: Vec<Vec<Rational>> = (0..dim)
        .map(|d| {
            let mut row: Vec<Rational> = points.iter().map(|p| p.0[d].clone()).collect();
            if let Some(b) = rhs {
                row.push(b.0[d].clone());
            }
            row
        })
        .collect();
    let mut ones = vec![Rational::one(); points.len()];
    if rhs.is_some() {
        ones.push(Rational::one());
    }
    rows.push(ones);
    rows
}

pub fn affinely_independent(points: &[RationalPoint]) -> bool {
    if points.is_empty() {
        return true;
    }
    let mut m = affine_matrix(points, None);
    rref(&mut m, points.len()).len() == points.len()
}

fn check_dims(b: &RationalPoint, t: &[RationalPoint]) -> Result<()> {
    if t.iter().any(|p| p.dim() != b.dim()) {
        return Err(Error::pre("points of different dimensions"));
    }
    Ok(())
}

/// Affine coordinates of `b` with respect to `t`, if `b` lies in the
/// affine hull.
pub fn barycentric(b: &RationalPoint, t: &[RationalPoint]) -> Result<Option<Vec<Rational>>> {
    check_dims(b, t)?;
    if t.is_empty() {
        return Err(Error::pre("empty simplex"));
    }
    let mut m = affine_matrix(t, Some(b));
    let pivots = rref(&mut m, t.len() + 1);
    if pivots.iter().filter(|&&c| c < t.len()).count() != t.len() {
        return Err(Error::pre("simplex is affinely dependent"));
    }
    if pivots.contains(&t.len()) {
        return Ok(None);
    }
    Ok(Some((0..t.len()).map(|i| m[i][t.len()].clone()).collect()))
}

pub fn conv_membership(b: &RationalPoint, t: &[RationalPoint]) -> Result<bool> {
    Ok(barycentric(b, t)?.is_some_and(|l| l.iter().all(|x| !x.is_negative())))
}

pub fn relint_membership(b: &RationalPoint, t: &[RationalPoint]) -> Result<bool> {
    Ok(barycentric(b, t)?.is_some_and(|l| l.iter().all(|x| x.is_positive())))
}

pub fn centroid(t: &[RationalPoint]) -> RationalPoint {
    let k = Rational::from_integer(BigInt::from(t.len()));
    let dim = t.first().map_or(0, |p| p.dim());
    RationalPoint(
        (0..dim)
            .map(|d| t.iter().map(|p| &p.0[d]).fold(Rational::zero(), |acc, x| acc + x) / &k)
            .collect(),
    )
}

/// Exact simplex outcome for `max c·x, Ax = b, x ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Infeasible,
    Unbounded,
    Optimal { value: Rational, x: Vec<Rational> },
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.width]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].recip();
        for x in self.rows[row].iter_mut() {
            *x *= &inv;
        }
        for i in 0..self.rows.len() {
            if i != row && !self.rows[i][col].is_zero() {
                let factor = self.rows[i][col].clone();
                for j in 0..=self.width {
                    let delta = &factor * &self.rows[row][j];
                    self.rows[i][j] -= delta;
                }
            }
        }
        self.basis[row] = col;
    }

    /// Bland's rule; `false` when unbounded.
    fn maximize(&mut self, obj: &[Rational], allowed: usize) -> bool {
        loop {
            let entering = (0..allowed).find(|&j| {
                let reduced = self
                    .basis
                    .iter()
                    .enumerate()
                    .fold(obj[j].clone(), |acc, (i, &bj)| acc - &obj[bj] * &self.rows[i][j]);
                reduced.is_positive()
            });
            let Some(col) = entering else { return true };
            let mut best: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                if self.rows[i][col].is_positive() {
                    let ratio = self.rhs(i) / &self.rows[i][col];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = best else { return false };
            self.pivot(row, col);
        }
    }
}

/// Two-phase exact simplex.
pub fn simplex_max(a: &[Vec<Rational>], b: &[Rational], c: &[Rational]) -> LpOutcome {
    let (m, n) = (a.len(), c.len());
    let width = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, (row, bi)) in a.iter().zip(b).enumerate() {
        let flip = bi.is_negative();
        let mut r: Vec<Rational> = row.iter().map(|x| if flip { -x } else { x.clone() }).collect();
        r.extend((0..m).map(|k| if k == i { Rational::one() } else { Rational::zero() }));
        r.push(if flip { -bi } else { bi.clone() });
        rows.push(r);
    }
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        width,
    };
    let mut phase1 = vec![Rational::zero(); width];
    for x in &mut phase1[n..] {
        *x = -Rational::one();
    }
    t.maximize(&phase1, width);
    let infeasibility = t
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &bj)| bj >= n)
        .fold(Rational::zero(), |acc, (i, _)| acc + t.rhs(i));
    if infeasibility.is_positive() {
        return LpOutcome::Infeasible;
    }
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => t.pivot(i, j),
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    let mut obj = c.to_vec();
    obj.resize(width, Rational::zero());
    if !t.maximize(&obj, n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &bj) in t.basis.iter().enumerate() {
        if bj < n {
            x[bj] = t.rhs(i).clone();
        }
    }
    let value = x.iter().zip(c).fold(Rational::zero(), |acc, (xi, ci)| acc + xi * ci);
    LpOutcome::Optimal { value, x }
}

/// Whether the relative interiors of the simplices on `x0` and `x1` are
/// disjoint: maximizes the least barycentric weight of a common point.
pub fn relint_disjoint(x0: &[RationalPoint], x1: &[RationalPoint]) -> Result<bool> {
    if x0.is_empty() || x1.is_empty() {
        return Err(Error::pre("empty simplex"));
    }
    let dim = x0[0].dim();
    if x0.iter().chain(x1).any(|p| p.dim() != dim) {
        return Err(Error::pre("points of different dimensions"));
    }
    if !affinely_independent(x0) || !affinely_independent(x1) {
        return Err(Error::pre("simplex is affinely dependent"));
    }
    let (k0, k1) = (x0.len(), x1.len());
    let tau = k0 + k1;
    let n = tau + 1 + k0 + k1;
    let zero_row = || vec![Rational::zero(); n];
    let mut a = Vec::new();
    let mut b = Vec::new();
    for d in 0..dim {
        let mut row = zero_row();
        for (i, p) in x0.iter().enumerate() {
            row[i] = p.0[d].clone();
        }
        for (j, p) in x1.iter().enumerate() {
            row[k0 + j] = -p.0[d].clone();
        }
        a.push(row);
        b.push(Rational::zero());
    }
    for range in [0..k0, k0..k0 + k1] {
        let mut row = zero_row();
        for i in range {
            row[i] = Rational::one();
        }
        a.push(row);
        b.push(Rational::one());
    }
    for i in 0..k0 + k1 {
        let mut row = zero_row();
        row[i] = Rational::one();
        row[tau] = -Rational::one();
        row[tau + 1 + i] = -Rational::one();
        a.push(row);
        b.push(Rational::zero());
    }
    let mut c = vec![Rational::zero(); n];
    c[tau] = Rational::one();
    Ok(match simplex_max(&a, &b, &c) {
        LpOutcome::Infeasible => true,
        LpOutcome::Optimal { value, .. } => !value.is_positive(),
        LpOutcome::Unbounded => return Err(Error::Internal("weight bound is unbounded".into())),
    })
}

/// A set of `N`-subsets of strings, each sorted.
pub type ColorClass = BTreeSet<Vec<Seq>>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scene {
    pub arity: usize,
    pub height: usize,
    pub points: BTreeMap<Seq, RationalPoint>,
    pub coloring: Vec<ColorClass>,
    /// Per class, one tuple of removed points for each of its subsets.
    pub removed: Vec<Vec<Vec<RationalPoint>>>,
}

impl Scene {
    pub fn point(&self, s: &Seq) -> Result<&RationalPoint> {
        self.points
            .get(s)
            .ok_or_else(|| Error::pre(format!("{s} is not a point of the scene")))
    }

    fn simplex(&self, t: &[Seq]) -> Result<Vec<RationalPoint>> {
        t.iter().map(|s| self.point(s).cloned()).collect()
    }
}

/// Interior points pulled from each vertex towards the centroid by
/// `1/(m+1)`.
pub fn removed_points(scene: &Scene, m: usize) -> Result<Vec<Vec<RationalPoint>>> {
    let class = scene
        .coloring
        .get(m)
        .ok_or_else(|| Error::pre(format!("no color class {m}")))?;
    let mu = rat(1, m as i64 + 1);
    let keep = Rational::one() - &mu;
    class
        .iter()
        .map(|x| {
            let t = scene.simplex(x)?;
            let c = centroid(&t);
            Ok(t.iter().map(|s| s.scaled_add(&keep, &c, &mu)).collect())
        })
        .collect()
}

/// Whether the hull of `t` contains a removed point.
pub fn check_defect(scene: &Scene, t: &[Seq]) -> Result<bool> {
    let simplex = scene.simplex(t)?;
    for tuple in scene.removed.iter().flatten() {
        for p in tuple {
            if conv_membership(p, &simplex)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// How general position was established.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GpCertificate {
    /// Every `2N`-subset had a nonzero determinant.
    Explicit { subsets: usize },
    /// Too many subsets: distinct parameters on the moment curve.
    Vandermonde { parameters: usize },
}

/// Affine independence of every `2N` points, by explicit determinants when
/// there are at most `limit` subsets.
pub fn verify_general_position(scene: &Scene, limit: usize) -> (Report, GpCertificate) {
    let mut report = Report::new();
    let pts: Vec<(&Seq, &RationalPoint)> = scene.points.iter().collect();
    let k = 2 * scene.arity;
    let subsets = crate::approx::binom(pts.len(), k);
    if subsets <= limit {
        for combo in pts.iter().combinations(k) {
            let rows = combo
                .iter()
                .map(|(_, p)| std::iter::once(Rational::one()).chain(p.0.iter().cloned()).collect())
                .collect();
            if determinant(rows).is_zero() {
                report.push(
                    "general-position",
                    format!("{} are affinely dependent", combo.iter().map(|(s, _)| s).join(",")),
                );
            }
        }
        return (report, GpCertificate::Explicit { subsets });
    }
    let dim = 2 * scene.arity - 1;
    let mut seen = BTreeMap::new();
    for (s, p) in &pts {
        let t = p.0.first().cloned().unwrap_or_else(Rational::zero);
        if **p != moment_point(&t, dim) {
            report.push("general-position", format!("{s} is off the moment curve"));
        }
        if let Some(other) = seen.insert(t, *s) {
            report.push("general-position", format!("{s} and {other} share a parameter"));
        }
    }
    (report, GpCertificate::Vandermonde { parameters: seen.len() })
}

/// Summary of the certificates established by `realize`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certification {
    pub general_position: GpCertificate,
    pub interior_points: usize,
    pub disjoint_pairs: usize,
}

/// Builds the scene for `coloring` over all binary strings of length
/// `height` and certifies general position, interiority of removed points
/// and disjointness of the relative interiors of all colored subsets.
pub fn realize(coloring: &[ColorClass], arity: usize, height: usize, max_classes: usize) -> Result<(Scene, Certification)> {
    if arity < 2 {
        return Err(Error::pre("arity must be at least 2"));
    }
    if coloring.len() > max_classes {
        return Err(Error::Bounds(format!(
            "{} color classes exceed the cap {max_classes}",
            coloring.len()
        )));
    }
    if height > 20 {
        return Err(Error::Bounds(format!("height {height} is too large")));
    }
    for (m, class) in coloring.iter().enumerate() {
        for x in class {
            let distinct: BTreeSet<&Seq> = x.iter().collect();
            if x.len() != arity || distinct.len() != arity {
                return Err(Error::pre(format!("class {m} has a member without {arity} distinct strings")));
            }
            if let Some(s) = x.iter().find(|s| s.len() != height || s.0.iter().any(|&b| b > 1)) {
                return Err(Error::pre(format!("{s} is not a binary string of length {height}")));
            }
        }
    }
    let points = crate::seq::binary_strings(height)
        .into_iter()
        .map(|s| {
            let p = point_of(&s, arity);
            (s, p)
        })
        .collect();
    let mut scene = Scene {
        arity,
        height,
        points,
        coloring: coloring.iter().map(|c| c.iter().map(|x| x.iter().cloned().sorted().collect()).collect()).collect(),
        removed: Vec::new(),
    };
    for m in 0..coloring.len() {
        let removed = removed_points(&scene, m)?;
        scene.removed.push(removed);
    }
    let (report, general_position) = verify_general_position(&scene, DEFAULT_GP_LIMIT);
    if !report.is_ok() {
        return Err(Error::Internal(format!("general position failed:\n{report}")));
    }
    let mut interior_points = 0;
    for (class, removed) in scene.coloring.iter().zip(&scene.removed) {
        for (x, tuple) in class.iter().zip(removed) {
            let simplex = scene.simplex(x)?;
            for p in tuple {
                if !relint_membership(p, &simplex)? {
                    return Err(Error::Internal(format!("removed point {p} is not inside {}", x.iter().join(","))));
                }
                interior_points += 1;
            }
        }
    }
    let used: BTreeSet<&Vec<Seq>> = scene.coloring.iter().flatten().collect();
    let mut disjoint_pairs = 0;
    for pair in used.iter().combinations(2) {
        if !relint_disjoint(&scene.simplex(pair[0])?, &scene.simplex(pair[1])?)? {
            return Err(Error::Internal(format!(
                "interiors of {} and {} meet",
                pair[0].iter().join(","),
                pair[1].iter().join(",")
            )));
        }
        disjoint_pairs += 1;
    }
    Ok((
        scene,
        Certification {
            general_position,
            interior_points,
            disjoint_pairs,
        },
    ))
}

/// Compares `check_defect` with membership in the coloring on every
/// `N`-subset of the scene's points, up to `budget` subsets.
pub fn defect_sweep(scene: &Scene, budget: usize) -> Result<Report> {
    let total = crate::approx::binom(scene.points.len(), scene.arity);
    if total > budget {
        return Err(Error::Budget {
            what: "defect sweep subsets",
            limit: budget,
        });
    }
    let colored: BTreeSet<&Vec<Seq>> = scene.coloring.iter().flatten().collect();
    let mut report = Report::new();
    for t in scene.points.keys().cloned().combinations(scene.arity) {
        let defect = check_defect(scene, &t)?;
        if defect != colored.contains(&t) {
            report.push(
                "defect",
                format!("{} has defect {defect} but membership {}", t.iter().join(","), !defect),
            );
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::binary;

    fn pt(xs: &[(i64, i64)]) -> RationalPoint {
        RationalPoint(xs.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    #[test]
    fn moment_points() {
        assert_eq!(point_of(&binary("000"), 2), pt(&[(0, 1), (0, 1), (0, 1)]));
        assert_eq!(point_of(&binary("1"), 2), pt(&[(1, 3), (1, 9), (1, 27)]));
        assert_eq!(parameter(&binary("01")), rat(1, 9));
    }

    #[test]
    fn membership() {
        let t = vec![pt(&[(0, 1), (0, 1)]), pt(&[(1, 1), (0, 1)]), pt(&[(0, 1), (1, 1)])];
        let c = centroid(&t);
        assert_eq!(barycentric(&c, &t).unwrap().unwrap(), vec![rat(1, 3); 3]);
        assert!(relint_membership(&c, &t).unwrap());
        assert!(conv_membership(&t[1], &t).unwrap() && !relint_membership(&t[1], &t).unwrap());
        let outside = pt(&[(1, 1), (1, 1)]);
        assert!(!conv_membership(&outside, &t).unwrap());
        let seg = vec![pt(&[(0, 1), (0, 1)]), pt(&[(1, 1), (0, 1)])];
        assert_eq!(barycentric(&pt(&[(1, 2), (1, 1)]), &seg).unwrap(), None);
        let dup = vec![seg[0].clone(), seg[0].clone()];
        assert!(barycentric(&c, &dup).is_err());
    }

    #[test]
    fn simplex_solves_small_programs() {
        let a = vec![vec![rat(1, 1), rat(1, 1), rat(1, 1)]];
        let out = simplex_max(&a, &[rat(4, 1)], &[rat(1, 1), rat(2, 1), rat(0, 1)]);
        assert!(matches!(out, LpOutcome::Optimal { ref value, .. } if *value == rat(8, 1)));
        let infeasible = simplex_max(&[vec![rat(1, 1)]], &[rat(-1, 1)], &[rat(1, 1)]);
        assert_eq!(infeasible, LpOutcome::Infeasible);
        let unbounded = simplex_max(&[vec![rat(1, 1), rat(-1, 1)]], &[rat(0, 1)], &[rat(1, 1), rat(0, 1)]);
        assert_eq!(unbounded, LpOutcome::Unbounded);
    }

    #[test]
    fn interiors() {
        let p = |s: &str| point_of(&binary(s), 2);
        let a = vec![p("00"), p("11")];
        assert!(!relint_disjoint(&a, &a).unwrap());
        assert!(relint_disjoint(&a, &[p("01"), p("10")]).unwrap());
        assert!(relint_disjoint(&a, &[p("00"), p("10")]).unwrap());
        let square = |x: i64, y: i64| pt(&[(x, 1), (y, 1)]);
        let d1 = vec![square(0, 0), square(2, 2)];
        let d2 = vec![square(0, 2), square(2, 0)];
        assert!(!relint_disjoint(&d1, &d2).unwrap());
    }

    #[test]
    fn general_position_both_ways() {
        let (scene, cert) = realize(&[], 2, 3, 4).unwrap();
        assert_eq!(cert.general_position, GpCertificate::Explicit { subsets: 70 });
        let (rep, cert) = verify_general_position(&scene, 10);
        assert!(rep.is_ok());
        assert_eq!(cert, GpCertificate::Vandermonde { parameters: 8 });
        let mut broken = scene.clone();
        let copy = broken.points[&binary("000")].clone();
        broken.points.insert(binary("111"), copy);
        assert!(!verify_general_position(&broken, 1000).0.is_ok());
        assert!(!verify_general_position(&broken, 10).0.is_ok());
    }

    #[test]
    fn single_pair_scene() {
        let class: ColorClass = [vec![binary("000"), binary("111")]].into();
        let (scene, cert) = realize(&[ColorClass::new(), class], 2, 3, 4).unwrap();
        assert_eq!(cert.interior_points, 2);
        assert!(defect_sweep(&scene, 1000).unwrap().is_ok());
        assert!(check_defect(&scene, &[binary("000"), binary("111")]).unwrap());
        assert!(!check_defect(&scene, &[binary("000"), binary("011")]).unwrap());
        let expected = point_of(&binary("000"), 2).scaled_add(&rat(3, 4), &point_of(&binary("111"), 2), &rat(1, 4));
        let pulled = removed_points(&scene, 1).unwrap();
        assert_eq!(pulled[0][0], expected);
    }
}
