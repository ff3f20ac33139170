//! Finite relational models, independence and rank under a finiteness
//! threshold θ, and rank oracles.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::ordinal::OrdinalCNF;
use crate::report::Report;

pub type Elem = u32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub arity: usize,
    pub tuples: BTreeSet<Vec<Elem>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteModel {
    pub size: u32,
    pub relations: Vec<Relation>,
}

impl FiniteModel {
    /// The model with universe `{0..m-1}` and no relations.
    pub fn empty(size: u32) -> Self {
        FiniteModel {
            size,
            relations: Vec::new(),
        }
    }

    pub fn with_relation(mut self, name: &str, arity: usize, tuples: impl IntoIterator<Item = Vec<Elem>>) -> Result<Self> {
        let tuples: BTreeSet<Vec<Elem>> = tuples.into_iter().collect();
        for t in &tuples {
            if t.len() != arity {
                return Err(Error::pre(format!("tuple {t:?} of {name} has wrong arity")));
            }
            if t.iter().any(|&e| e >= self.size) {
                return Err(Error::pre(format!("tuple {t:?} of {name} leaves the universe")));
            }
        }
        if self.relations.iter().any(|r| r.name == name) {
            return Err(Error::pre(format!("relation {name} declared twice")));
        }
        self.relations.push(Relation {
            name: name.to_string(),
            arity,
            tuples,
        });
        Ok(self)
    }

    pub fn holds(&self, name: &str, args: &[Elem]) -> Option<bool> {
        self.relations
            .iter()
            .find(|r| r.name == name)
            .map(|r| r.tuples.contains(args))
    }

    pub fn universe(&self) -> impl Iterator<Item = Elem> {
        0..self.size
    }
}

/// An argument of an atom: the subject variable or a parameter value.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Subject,
    Param(Elem),
}

/// Atomic formulas mentioning the subject variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Equals(Elem),
    Rel(String, Vec<Term>),
}

impl Atom {
    fn eval(&self, m: &FiniteModel, y: Elem) -> Option<bool> {
        match self {
            Atom::Equals(b) => Some(y == *b),
            Atom::Rel(name, args) => {
                let vals: Vec<Elem> = args
                    .iter()
                    .map(|t| match t {
                        Term::Subject => y,
                        Term::Param(b) => *b,
                    })
                    .collect();
                m.holds(name, &vals)
            }
        }
    }
}

/// A complete quantifier-free type of one element over parameters: the
/// truth value of every atom that mentions the subject.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomicType {
    pub params: Vec<Elem>,
    pub atoms: BTreeMap<Atom, bool>,
}

impl AtomicType {
    pub fn satisfied_by(&self, m: &FiniteModel, y: Elem) -> Result<bool> {
        for (atom, &want) in &self.atoms {
            match atom.eval(m, y) {
                Some(v) if v == want => {}
                Some(_) => return Ok(false),
                None => return Err(Error::pre(format!("model has no relation for {atom:?}"))),
            }
        }
        Ok(true)
    }

    pub fn realizers(&self, m: &FiniteModel) -> Result<Vec<Elem>> {
        let mut out = Vec::new();
        for y in m.universe() {
            if self.satisfied_by(m, y)? {
                out.push(y);
            }
        }
        Ok(out)
    }
}

impl fmt::Display for AtomicType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}:", self.params.iter().join(","))?;
        let atoms = self.atoms.iter().map(|(a, &v)| {
            let body = match a {
                Atom::Equals(b) => format!("y={b}"),
                Atom::Rel(name, args) => format!(
                    "{name}({})",
                    args.iter()
                        .map(|t| match t {
                            Term::Subject => "y".to_string(),
                            Term::Param(b) => b.to_string(),
                        })
                        .join(",")
                ),
            };
            if v {
                body
            } else {
                format!("~{body}")
            }
        });
        write!(f, "{}", atoms.format("&"))
    }
}

impl FromStr for AtomicType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::parse(0, format!("atomic type `{s}`: {msg}"));
        let rest = s.strip_prefix('{').ok_or_else(|| bad("missing `{`"))?;
        let (params, atoms) = rest.split_once("}:").ok_or_else(|| bad("missing `}:`"))?;
        let elem = |t: &str| t.trim().parse::<Elem>().map_err(|_| bad("bad element"));
        let params: Vec<Elem> = if params.is_empty() {
            Vec::new()
        } else {
            params.split(',').map(elem).collect::<Result<_>>()?
        };
        let mut out = BTreeMap::new();
        if !atoms.is_empty() {
            for tok in atoms.split('&') {
                let (neg, body) = match tok.strip_prefix('~') {
                    Some(b) => (true, b),
                    None => (false, tok),
                };
                let atom = if let Some(b) = body.strip_prefix("y=") {
                    Atom::Equals(elem(b)?)
                } else {
                    let (name, args) = body.split_once('(').ok_or_else(|| bad("bad atom"))?;
                    let args = args.strip_suffix(')').ok_or_else(|| bad("missing `)`"))?;
                    let terms = args
                        .split(',')
                        .map(|a| if a == "y" { Ok(Term::Subject) } else { elem(a).map(Term::Param) })
                        .collect::<Result<Vec<_>>>()?;
                    if name.is_empty() || !terms.contains(&Term::Subject) {
                        return Err(bad("relation atoms must mention y"));
                    }
                    Atom::Rel(name.to_string(), terms)
                };
                if out.insert(atom, !neg).is_some() {
                    return Err(bad("atom decided twice"));
                }
            }
        }
        Ok(AtomicType { params, atoms: out })
    }
}

/// The complete atomic type of `a` over the parameter list `params`.
pub fn atomic_type(m: &FiniteModel, a: Elem, params: &[Elem]) -> Result<AtomicType> {
    if params.contains(&a) {
        return Err(Error::pre(format!("{a} is among the parameters")));
    }
    let mut atoms = BTreeMap::new();
    for &b in params {
        atoms.insert(Atom::Equals(b), a == b);
    }
    let terms: Vec<Term> = std::iter::once(Term::Subject)
        .chain(params.iter().map(|&b| Term::Param(b)))
        .collect();
    for rel in &m.relations {
        for args in (0..rel.arity).map(|_| terms.iter().cloned()).multi_cartesian_product() {
            if !args.contains(&Term::Subject) {
                continue;
            }
            let atom = Atom::Rel(rel.name.clone(), args);
            let v = atom.eval(m, a).expect("relation exists");
            atoms.insert(atom, v);
        }
    }
    Ok(AtomicType {
        params: params.to_vec(),
        atoms,
    })
}

fn others(w: &[Elem], a: Elem) -> Vec<Elem> {
    w.iter().copied().filter(|&x| x != a).collect()
}

/// Every member's type over the rest has at least θ realizers.
pub fn independent_theta(m: &FiniteModel, theta: usize, w: &[Elem]) -> Result<bool> {
    for &a in w {
        if atomic_type(m, a, &others(w, a))?.realizers(m)?.len() < theta {
            return Ok(false);
        }
    }
    Ok(true)
}

/// θ-ranks of all nonempty independent sets of a model, memoized.
pub struct ModelRanker<'a> {
    pub model: &'a FiniteModel,
    pub theta: usize,
    memo: HashMap<Vec<Elem>, Option<u32>>,
}

impl<'a> ModelRanker<'a> {
    pub fn new(model: &'a FiniteModel, theta: usize) -> Self {
        ModelRanker {
            model,
            theta,
            memo: HashMap::new(),
        }
    }

    fn normalize(w: &[Elem]) -> Vec<Elem> {
        let mut v = w.to_vec();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Rank of `w`, or `None` when `w` is empty or not independent.
    pub fn rank(&mut self, w: &[Elem]) -> Result<Option<u32>> {
        let w = Self::normalize(w);
        if w.is_empty() || w.iter().any(|&x| x >= self.model.size) {
            return Ok(None);
        }
        if let Some(&r) = self.memo.get(&w) {
            return Ok(r);
        }
        let r = if independent_theta(self.model, self.theta, &w)? {
            Some(self.per_member(&w)?.into_iter().min().unwrap())
        } else {
            None
        };
        self.memo.insert(w, r);
        Ok(r)
    }

    /// For each member `a`: `1 + max rank(w ∪ {a'})` over admissible `a'`,
    /// the empty maximum read as `-1`.
    fn per_member(&mut self, w: &[Elem]) -> Result<Vec<u32>> {
        let mut out = Vec::with_capacity(w.len());
        for &a in w {
            let ty = atomic_type(self.model, a, &others(w, a))?;
            let mut best: i64 = -1;
            for b in ty.realizers(self.model)? {
                if b == a {
                    continue;
                }
                let mut bigger = w.to_vec();
                bigger.push(b);
                if let Some(r) = self.rank(&bigger)? {
                    best = best.max(r as i64);
                }
            }
            out.push((best + 1) as u32);
        }
        Ok(out)
    }

    /// The least member attaining the minimum, with its type over the rest.
    pub fn critical(&mut self, w: &[Elem]) -> Result<(Elem, AtomicType)> {
        let w = Self::normalize(w);
        let r = self
            .rank(&w)?
            .ok_or_else(|| Error::pre("critical data needs a nonempty independent set"))?;
        let values = self.per_member(&w)?;
        let i = values
            .iter()
            .position(|&v| v == r)
            .ok_or_else(|| Error::Internal(format!("no member of {w:?} attains rank {r}")))?;
        Ok((w[i], atomic_type(self.model, w[i], &others(&w, w[i]))?))
    }

    /// `0` if nothing is independent, else `max(rank + 1)`.
    pub fn model_rank(&mut self) -> Result<u32> {
        let mut best = 0;
        for k in 1..=self.model.size {
            for w in (0..self.model.size).combinations(k as usize) {
                if let Some(r) = self.rank(&w)? {
                    best = best.max(r + 1);
                }
            }
        }
        Ok(best)
    }
}

pub fn rank_theta(m: &FiniteModel, theta: usize, w: &[Elem]) -> Result<u32> {
    ModelRanker::new(m, theta)
        .rank(w)?
        .ok_or_else(|| Error::pre(format!("{w:?} is empty or not {theta}-independent")))
}

pub fn rank_theta_model(m: &FiniteModel, theta: usize) -> Result<u32> {
    ModelRanker::new(m, theta).model_rank()
}

pub fn critical(m: &FiniteModel, theta: usize, w: &[Elem]) -> Result<(Elem, AtomicType)> {
    ModelRanker::new(m, theta).critical(w)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleEntry {
    pub rank: OrdinalCNF,
    pub crit: Elem,
    pub phi: AtomicType,
}

/// Ranks with critical elements and types on a family of finite sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedModelOracle {
    pub size: u32,
    /// Keys are sorted, duplicate-free.
    pub entries: BTreeMap<Vec<Elem>, OracleEntry>,
}

impl RankedModelOracle {
    /// Every nonempty θ-independent set of `m` with its rank and critical
    /// data.
    pub fn from_model(m: &FiniteModel, theta: usize) -> Result<Self> {
        let mut ranker = ModelRanker::new(m, theta);
        let mut entries = BTreeMap::new();
        for k in 1..=m.size {
            for w in (0..m.size).combinations(k as usize) {
                if let Some(r) = ranker.rank(&w)? {
                    let (crit, phi) = ranker.critical(&w)?;
                    entries.insert(
                        w,
                        OracleEntry {
                            rank: OrdinalCNF::from_nat(r as u64),
                            crit,
                            phi,
                        },
                    );
                }
            }
        }
        Ok(RankedModelOracle { size: m.size, entries })
    }

    pub fn get(&self, w: &[Elem]) -> Option<&OracleEntry> {
        let mut key = w.to_vec();
        key.sort_unstable();
        key.dedup();
        self.entries.get(&key)
    }

    pub fn rank(&self, w: &[Elem]) -> Option<&OrdinalCNF> {
        self.get(w).map(|e| &e.rank)
    }

    pub fn contains(&self, w: &[Elem]) -> bool {
        self.get(w).is_some()
    }

    /// Elements outside `w \ {crit}` realizing the critical type, evaluated
    /// in `m` (or in the relation-free model on the same universe).
    pub fn realizers(&self, entry: &OracleEntry, m: Option<&FiniteModel>) -> Result<Vec<Elem>> {
        match m {
            Some(m) => entry.phi.realizers(m),
            None => entry.phi.realizers(&FiniteModel::empty(self.size)),
        }
    }
}

/// Checks the critical-drop contract, well-formedness of the critical data
/// and, given a model, agreement with the computed ranks.
pub fn validate_oracle(o: &RankedModelOracle, m: Option<&FiniteModel>, theta: usize) -> Report {
    let mut report = Report::new();
    if let Some(m) = m {
        if m.size != o.size {
            report.push("model", format!("oracle size {} differs from model size {}", o.size, m.size));
            return report;
        }
    }
    for (w, e) in &o.entries {
        let key = w.iter().join(",");
        if w.iter().any(|&x| x >= o.size) {
            report.push("domain", format!("{{{key}}} leaves the universe"));
            continue;
        }
        if !w.contains(&e.crit) {
            report.push("critical", format!("{{{key}}} has c={} outside the set", e.crit));
            continue;
        }
        let rest = others(w, e.crit);
        let mut params = e.phi.params.clone();
        params.sort_unstable();
        if params != rest {
            report.push("critical", format!("{{{key}}} has a type over the wrong parameters"));
            continue;
        }
        let realizers = match o.realizers(e, m) {
            Ok(r) => r,
            Err(err) => {
                report.push("critical", format!("{{{key}}}: {err}"));
                continue;
            }
        };
        if !realizers.contains(&e.crit) {
            report.push("critical", format!("{{{key}}}: c={} does not satisfy its type", e.crit));
        }
        for x in realizers.into_iter().filter(|&x| x != e.crit) {
            let mut bigger = w.clone();
            bigger.push(x);
            if let Some(big) = o.rank(&bigger) {
                if big >= &e.rank {
                    report.push(
                        "A2",
                        format!("{{{key}}} r={} but adding {x} gives r={big}", e.rank),
                    );
                }
            }
        }
    }
    if let Some(m) = m {
        let mut ranker = ModelRanker::new(m, theta);
        for (w, e) in &o.entries {
            let key = w.iter().join(",");
            match ranker.rank(w) {
                Ok(Some(r)) if OrdinalCNF::from_nat(r as u64) == e.rank => {}
                Ok(Some(r)) => report.push("model", format!("{{{key}}} has r={} but computes {r}", e.rank)),
                Ok(None) => report.push("model", format!("{{{key}}} is not independent in the model")),
                Err(err) => report.push("model", format!("{{{key}}}: {err}")),
            }
            if let Ok((c, phi)) = ranker.critical(w) {
                if c != e.crit || phi != e.phi {
                    report.push("model", format!("{{{key}}} critical data differ from the model's"));
                }
            }
        }
    }
    report
}
