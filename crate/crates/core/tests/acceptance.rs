//! Acceptance suite: one PASS/FAIL line per criterion, each within its
//! time limit. Runs as a plain binary so the lines always print.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use colorank::approx::ApproxConfig;
use colorank::basic::{check_rank_bound, derive_ranked, random_basic};
use colorank::forcing::{
    amalgamate, cond_leq, extend_into_dense, generic_homogeneous, matching_gamma, validate_condition,
    verify_certificates, verify_domination, ForcingCondition, GenericFamily,
};
use colorank::geometry::{check_defect, realize, ColorClass};
use colorank::model::{independent_theta, Elem, FiniteModel, ModelRanker, RankedModelOracle};
use colorank::ordinal::OrdinalCNF;
use colorank::seq::binary_strings;
use colorank::tree::{binary_tree, random_tree, rank_all, two_branch_tree, ColoringTree, RankOracle};
use colorank::universal::{build_universal, extend_template_embedding, partial_embeddings, UniversalTree};

type Outcome = Result<String, String>;

fn cfg() -> ApproxConfig {
    ApproxConfig::default()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

// ---- 1. rank oracle equivalence -------------------------------------------

fn oracle_matches(t: &ColoringTree, name: &str) -> Result<usize, String> {
    let report = rank_all(t, &cfg()).map_err(err)?;
    let mut oracle = RankOracle::new(t, &cfg()).map_err(err)?;
    ensure(oracle.approximations().count() == report.len(), || {
        format!("{name}: oracle and report enumerate different approximations")
    })?;
    for (a, v) in report.iter() {
        let o = oracle.rank(a);
        ensure(o == v, || format!("{name}: {} has value {v}, oracle {o}", a.key()))?;
    }
    Ok(report.len())
}

fn criterion_1() -> Outcome {
    let mut checked = 0;
    for h in 3..=5 {
        let t = binary_tree(h);
        checked += oracle_matches(&t, &format!("B({h})"))?;
        let report = rank_all(&t, &cfg()).map_err(err)?;
        for (a, v) in report.iter().filter(|(a, _)| a.v.len() == 2) {
            ensure(v as usize == h - 1 - a.level, || {
                format!("B({h}): pair {} has value {v}, expected {}", a.key(), h - 1 - a.level)
            })?;
        }
    }
    for h in 3..=4 {
        checked += oracle_matches(&two_branch_tree(h), &format!("L({h})"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..50 {
        let h = rng.gen_range(2..=4);
        let branches = rng.gen_range(1..=4);
        let t = random_tree(&mut rng, 2, h, 3, 2, branches);
        checked += oracle_matches(&t, &format!("random tree {i}"))?;
    }
    Ok(format!("{checked} approximations agree"))
}

// ---- 2. truncation monotonicity -------------------------------------------

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut compared = 0;
    for i in 0..25 {
        let h = rng.gen_range(2..=3);
        let branches = rng.gen_range(4..=10);
        let tall = random_tree(&mut rng, 2, h + 1, 3, 2, branches);
        let short = tall.truncate(h).map_err(err)?;
        let low = rank_all(&short, &cfg()).map_err(err)?;
        let high = rank_all(&tall, &cfg()).map_err(err)?;
        for (a, v) in low.iter() {
            let w = high
                .value(a)
                .ok_or_else(|| format!("tree {i}: {} missing at height {}", a.key(), h + 1))?;
            ensure(v <= w, || format!("tree {i}: {} drops from {v} to {w}", a.key()))?;
            compared += 1;
        }
    }
    Ok(format!("{compared} common approximations monotone"))
}

// ---- 3. rank bound --------------------------------------------------------

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..100 {
        let h = rng.gen_range(3..=4);
        let branches = rng.gen_range(1..=5);
        let t = random_basic(&mut rng, h, 2, 3, branches);
        let rt = derive_ranked(&t, &cfg()).map_err(err)?;
        let rep = check_rank_bound(&rt, &cfg()).map_err(err)?;
        ensure(rep.is_ok(), || format!("random basic tree {i}:\n{rep}"))?;
    }
    let gammas = [
        OrdinalCNF::from_nat(1),
        OrdinalCNF::from_nat(2),
        OrdinalCNF::from_nat(3),
        OrdinalCNF::omega(),
    ];
    for g in &gammas {
        for h in 3..=4 {
            let u = build_universal(g, h).map_err(err)?;
            let rep = check_rank_bound(&u.tree, &u.cfg).map_err(err)?;
            ensure(rep.is_ok(), || format!("universal gamma={g} H={h}:\n{rep}"))?;
        }
    }
    Ok("100 derived trees and 8 universal trees within bound".into())
}

// ---- 4. universality ------------------------------------------------------

fn criterion_4() -> Outcome {
    let u = build_universal(&OrdinalCNF::from_nat(3), 5).map_err(err)?;
    let (mut templates, mut embeddings) = (0, 0);
    for n in 1..=3 {
        for s in &u.templates[n] {
            templates += 1;
            for e in partial_embeddings(&u, s, n - 1, usize::MAX).map_err(err)? {
                extend_template_embedding(&u, s, &e)
                    .map_err(|x| format!("level {n}: a template embedding does not extend: {x}"))?;
                embeddings += 1;
            }
        }
    }
    ensure(embeddings > 0, || "no partial embeddings found".into())?;
    Ok(format!("{templates} templates, {embeddings} partial embeddings extended"))
}

// ---- 5 and 6. generic family and domination -------------------------------

struct ForcingRun {
    oracle: RankedModelOracle,
    universal: UniversalTree,
    family: GenericFamily,
}

fn empty_oracle(size: u32) -> Result<RankedModelOracle, String> {
    RankedModelOracle::from_model(&FiniteModel::empty(size), 2).map_err(err)
}

fn criterion_5(runs: &mut Vec<ForcingRun>) -> Outcome {
    for size in [4, 6] {
        let oracle = empty_oracle(size)?;
        let mut universal = build_universal(&matching_gamma(&oracle), 8).map_err(err)?;
        let family = generic_homogeneous(&oracle, &mut universal, 5).map_err(err)?;
        ensure(family.family.len() == size as usize, || {
            format!("m={size}: family has {} members", family.family.len())
        })?;
        let rep = verify_certificates(&universal.tree, &family);
        ensure(rep.is_ok(), || format!("m={size} certificates:\n{rep}"))?;
        for (i, q) in family.chain.iter().enumerate() {
            let rep = validate_condition(q, &oracle, &universal.tree, &universal.cfg);
            ensure(rep.is_ok(), || format!("m={size} condition {i}:\n{rep}"))?;
        }
        ensure(family.chain.windows(2).all(|w| cond_leq(&w[0], &w[1])), || {
            format!("m={size}: chain is not increasing")
        })?;
        runs.push(ForcingRun {
            oracle,
            universal,
            family,
        });
    }
    let pairs: usize = runs.iter().map(|r| r.family.colors.len()).sum();
    Ok(format!("families of size 4 and 6, {pairs} pair certificates"))
}

fn criterion_6(runs: &[ForcingRun]) -> Outcome {
    ensure(!runs.is_empty(), || "criterion 5 produced no families".into())?;
    let mut checked = 0;
    for r in runs {
        let rep = verify_domination(&r.universal.tree, &r.family, &r.oracle, 4, &r.universal.cfg).map_err(err)?;
        ensure(rep.is_ok(), || format!("m={}:\n{rep}", r.oracle.size))?;
        checked += rep.entries.len();
    }
    Ok(format!("{checked} subsets dominated"))
}

// ---- 7. defect equivalence ------------------------------------------------

fn random_coloring(rng: &mut ChaCha8Rng) -> Vec<ColorClass> {
    let strings = binary_strings(5);
    let mut pairs: Vec<Vec<_>> = strings.iter().cloned().combinations(2).collect();
    pairs.shuffle(rng);
    let classes = rng.gen_range(1..=4);
    let mut coloring = vec![ColorClass::new(); classes];
    for x in pairs.into_iter().take(rng.gen_range(1..=20)) {
        coloring[rng.gen_range(0..classes)].insert(x);
    }
    coloring
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut slowest = Duration::ZERO;
    for i in 0..10 {
        let start = Instant::now();
        let coloring = random_coloring(&mut rng);
        let (scene, cert) = realize(&coloring, 2, 5, 4).map_err(err)?;
        let colored: BTreeSet<_> = coloring.iter().flatten().cloned().collect();
        ensure(cert.disjoint_pairs == colored.len() * colored.len().saturating_sub(1) / 2, || {
            format!("coloring {i}: only {} coloring pairs certified disjoint", cert.disjoint_pairs)
        })?;
        let mut pairs = 0;
        for t in scene.points.keys().cloned().combinations(2) {
            let defect = check_defect(&scene, &t).map_err(err)?;
            ensure(defect == colored.contains(&t), || {
                format!("coloring {i}: pair {t:?} has defect {defect}")
            })?;
            pairs += 1;
        }
        ensure(pairs == 496, || format!("coloring {i}: {pairs} pairs swept"))?;
        let took = start.elapsed();
        ensure(took < Duration::from_secs(120), || format!("coloring {i} took {took:?}"))?;
        slowest = slowest.max(took);
    }
    Ok(format!("10 colorings, 496 pairs each, slowest {slowest:.2?}"))
}

// ---- 8. amalgamation ------------------------------------------------------

/// An order-preserving map on `members` fixing `root` whose other values
/// avoid `members`, if one exists in the universe.
fn twin_map(members: &[Elem], root: &[Elem], size: Elem, rng: &mut ChaCha8Rng) -> Option<BTreeMap<Elem, Elem>> {
    let free: Vec<Elem> = (0..size).filter(|e| !members.contains(e)).collect();
    let moved: Vec<Elem> = members.iter().copied().filter(|a| !root.contains(a)).collect();
    let mut options: Vec<BTreeMap<Elem, Elem>> = free
        .into_iter()
        .combinations(moved.len())
        .map(|img| {
            moved
                .iter()
                .copied()
                .zip(img)
                .chain(root.iter().map(|&a| (a, a)))
                .collect::<BTreeMap<_, _>>()
        })
        .filter(|f| f.values().tuple_windows().all(|(x, y)| x < y))
        .collect();
    options.shuffle(rng);
    options.pop()
}

fn criterion_8() -> Outcome {
    let oracle = empty_oracle(6)?;
    let mut u = build_universal(&matching_gamma(&oracle), 8).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut made, mut attempts) = (0, 0);
    while made < 50 {
        attempts += 1;
        ensure(attempts < 10_000, || format!("only {made} pairs generated"))?;
        let k = rng.gen_range(1..=3);
        let mut members: Vec<Elem> = (0..6).collect::<Vec<_>>().choose_multiple(&mut rng, k).copied().collect();
        members.sort_unstable();
        let root: Vec<Elem> = members.iter().copied().filter(|_| rng.gen_bool(0.4)).collect();
        if root.len() == members.len() {
            continue;
        }
        let Some(f) = twin_map(&members, &root, 6, &mut rng) else {
            continue;
        };
        let mut p = ForcingCondition::empty();
        for &a in &members {
            let n = p.n.max(rng.gen_range(1..=3));
            p = extend_into_dense(&p, a, n, &oracle, &mut u).map_err(err)?;
        }
        let q = p.renamed(&f).map_err(err)?;
        let r = amalgamate(&p, &q, &f, &oracle, &mut u).map_err(|e| format!("pair {made}: {e}"))?;
        let rep = validate_condition(&r, &oracle, &u.tree, &u.cfg);
        ensure(rep.is_ok(), || format!("pair {made}: amalgam invalid:\n{rep}"))?;
        ensure(cond_leq(&p, &r) && cond_leq(&q, &r), || {
            format!("pair {made}: amalgam does not extend both conditions")
        })?;
        made += 1;
    }
    Ok(format!("50 amalgams valid and extending, {attempts} draws"))
}

// ---- 9. model-rank reduction ----------------------------------------------

/// Quantifier-free definability by brute force: every subset of the
/// universe cut out by a Boolean combination of atoms in one free variable
/// over the given parameters.
fn definable_sets(m: &FiniteModel, params: &[Elem]) -> BTreeSet<u32> {
    let size = m.size;
    let full: u32 = (1u32 << size) - 1;
    let set = |pred: &dyn Fn(Elem) -> bool| (0..size).filter(|&y| pred(y)).fold(0u32, |acc, y| acc | 1 << y);
    let mut atoms = Vec::new();
    for &b in params {
        atoms.push(set(&|y| y == b));
    }
    for rel in &m.relations {
        let args: Vec<Option<Elem>> = std::iter::once(None).chain(params.iter().map(|&b| Some(b))).collect();
        for tuple in (0..rel.arity).map(|_| args.iter().copied()).multi_cartesian_product() {
            if tuple.iter().all(Option::is_some) {
                continue;
            }
            atoms.push(set(&|y| {
                let vals: Vec<Elem> = tuple.iter().map(|t| t.unwrap_or(y)).collect();
                rel.tuples.contains(&vals)
            }));
        }
    }
    let mut sets: BTreeSet<u32> = [0, full].into();
    let mut frontier: Vec<u32> = atoms;
    while let Some(s) = frontier.pop() {
        if !sets.insert(s) {
            continue;
        }
        frontier.push(full & !s);
        let known: Vec<u32> = sets.iter().copied().collect();
        for t in known {
            frontier.push(s & t);
            frontier.push(s | t);
        }
    }
    sets
}

struct BruteRanker<'a> {
    model: &'a FiniteModel,
    theta: usize,
    memo: HashMap<(Vec<Elem>, u32), bool>,
}

impl BruteRanker<'_> {
    fn formulas_of(&self, w: &[Elem], a: Elem) -> Vec<u32> {
        let params: Vec<Elem> = w.iter().copied().filter(|&x| x != a).collect();
        definable_sets(self.model, &params)
            .into_iter()
            .filter(|s| s & (1 << a) != 0)
            .collect()
    }

    /// Every formula true of a member over the rest has θ realizers.
    fn independent(&self, w: &[Elem]) -> bool {
        w.iter()
            .all(|&a| self.formulas_of(w, a).iter().all(|s| s.count_ones() as usize >= self.theta))
    }

    /// `rank(w) >= alpha`: independent, and for every member and every
    /// formula it satisfies there is another realizer keeping rank `alpha-1`.
    fn at_least(&mut self, w: &[Elem], alpha: u32) -> bool {
        let key = (w.to_vec(), alpha);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let v = self.independent(w)
            && (alpha == 0
                || w.iter().all(|&a| {
                    self.formulas_of(w, a).into_iter().all(|s| {
                        (0..self.model.size).filter(|&b| b != a && s & (1 << b) != 0).any(|b| {
                            let mut bigger = w.to_vec();
                            bigger.push(b);
                            bigger.sort_unstable();
                            bigger.dedup();
                            bigger.len() > w.len() && self.at_least(&bigger, alpha - 1)
                        })
                    })
                }));
        self.memo.insert(key, v);
        v
    }

    fn rank(&mut self, w: &[Elem]) -> Option<u32> {
        if !self.at_least(w, 0) {
            return None;
        }
        let mut r = 0;
        while self.at_least(w, r + 1) {
            r += 1;
        }
        Some(r)
    }
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0;
    for size in 1..=4u32 {
        for _ in 0..20 {
            let tuples: Vec<Vec<Elem>> = (0..size)
                .cartesian_product(0..size)
                .filter(|_| rng.gen_bool(0.35))
                .map(|(a, b)| vec![a, b])
                .collect();
            let m = FiniteModel::empty(size).with_relation("E", 2, tuples).map_err(err)?;
            for theta in 1..=2 {
                let mut fast = ModelRanker::new(&m, theta);
                let mut brute = BruteRanker {
                    model: &m,
                    theta,
                    memo: HashMap::new(),
                };
                for k in 1..=size as usize {
                    for w in (0..size).combinations(k) {
                        let ind = independent_theta(&m, theta, &w).map_err(err)?;
                        ensure(ind == brute.independent(&w), || {
                            format!("independence of {w:?} differs on {m:?} at theta {theta}")
                        })?;
                        let (a, b) = (fast.rank(&w).map_err(err)?, brute.rank(&w));
                        ensure(a == b, || {
                            format!("rank of {w:?} is {a:?}, brute force {b:?} on {m:?} at theta {theta}")
                        })?;
                        checked += 1;
                    }
                }
            }
        }
    }
    Ok(format!("80 models, {checked} sets agree"))
}

fn main() -> ExitCode {
    let mut runs = Vec::new();
    let mut failed = 0;
    let mut record = |n: u32, limit: u64, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let outcome = outcome.and_then(|msg| {
            if took <= Duration::from_secs(limit) {
                Ok(msg)
            } else {
                Err(format!("{msg}, but exceeded the {limit} s limit"))
            }
        });
        match outcome {
            Ok(msg) => println!("PASS criterion {n}: {msg} ({took:.2?})"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {n}: {msg} ({took:.2?})");
            }
        }
    };
    record(1, 30, &mut criterion_1);
    record(2, 30, &mut criterion_2);
    record(3, 60, &mut criterion_3);
    record(4, 120, &mut criterion_4);
    record(5, 120, &mut || criterion_5(&mut runs));
    record(6, 60, &mut || criterion_6(&runs));
    record(7, 1200, &mut criterion_7);
    record(8, 60, &mut criterion_8);
    record(9, 60, &mut criterion_9);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
