//! Universal γ-ranked trees: level-by-level construction from templates,
//! embedding search, and lazy realization of missing extensions.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use itertools::Itertools;

use crate::approx::{Approx, ApproxConfig, Color};
use crate::basic::{derive_ranked, BasicApproximation, BasicColoringTree, BasicNode, RankedTree};
use crate::error::{Error, Result};
use crate::ordinal::{gamma_filtration, OrdinalCNF};
use crate::seq::Seq;
use crate::template::{canonical_key, domain_levels, enumerate_templates, Embedding, Template, TemplateBounds};

/// Number of levels built eagerly from templates; above it only
/// zero-extension happens.
pub const DEFAULT_EAGER_DEPTH: usize = 3;

/// Limit on embedding search steps per call.
pub const DEFAULT_SEARCH_BUDGET: usize = 20_000_000;

#[derive(Clone, Debug)]
pub struct UniversalTree {
    pub tree: RankedTree,
    pub eager_depth: usize,
    /// Template bounds realized at each level, if any.
    pub bounds: Vec<Option<TemplateBounds>>,
    /// Templates enumerated for each level's bounds.
    pub templates: Vec<Vec<Template>>,
    pub cfg: ApproxConfig,
    pub search_budget: usize,
    /// Number of template copies realized, eagerly or on demand.
    pub realized: usize,
    support: Vec<BTreeSet<Seq>>,
    adjacency: HashMap<Seq, BTreeSet<Seq>>,
    by_level: Vec<Vec<BasicApproximation>>,
    tags: Vec<u32>,
    next_color: Color,
}

/// Level-`n` bounds: fewer than `n` lower points, colors and upper nodes,
/// ranks from the `n`-th filtration piece of γ.
pub fn level_bounds(gamma: &OrdinalCNF, n: usize) -> TemplateBounds {
    TemplateBounds {
        max_points: n.saturating_sub(1),
        max_colors: n.saturating_sub(1),
        max_nodes: Some(n.saturating_sub(1)),
        ranks: gamma_filtration(gamma, n as u32),
    }
}

pub fn build_universal(gamma: &OrdinalCNF, height: usize) -> Result<UniversalTree> {
    build_universal_with(gamma, height, DEFAULT_EAGER_DEPTH, ApproxConfig::default())
}

pub fn build_universal_with(
    gamma: &OrdinalCNF,
    height: usize,
    eager_depth: usize,
    cfg: ApproxConfig,
) -> Result<UniversalTree> {
    if gamma.is_zero() {
        return Err(Error::pre("gamma must be positive"));
    }
    if height == 0 {
        return Err(Error::pre("height must be at least 1"));
    }
    let mut u = UniversalTree {
        tree: RankedTree::new(BasicColoringTree::new(height, 0)?, gamma.clone()),
        eager_depth,
        bounds: vec![None; height],
        templates: vec![Vec::new(); height + 1],
        cfg,
        search_budget: DEFAULT_SEARCH_BUDGET,
        realized: 0,
        support: vec![BTreeSet::new(); height],
        adjacency: HashMap::new(),
        by_level: vec![Vec::new(); height],
        tags: vec![1; height],
        next_color: 0,
    };
    u.add_anchor(Seq::empty());
    for level in 1..height {
        u.zero_extend_level(level - 1);
        if level <= eager_depth {
            let templates = u.templates_for(level)?;
            for s in &templates {
                for e in partial_embeddings(&u, s, level - 1, usize::MAX)? {
                    u.realize(s, &e, 1, level - 1)?;
                }
            }
            u.bounds[level] = Some(level_bounds(gamma, level));
        }
        if level < eager_depth {
            let templates = u.templates_for(level + 1)?;
            let mut roots: BTreeMap<String, RankedTree> = BTreeMap::new();
            for s in &templates {
                let lower = s.truncate(2)?;
                roots.entry(canonical_key(&lower)).or_insert(lower);
            }
            for lower in roots.values() {
                u.add_root(lower, level)?;
            }
        }
    }
    Ok(u)
}

impl UniversalTree {
    pub fn height(&self) -> usize {
        self.tree.base.height
    }

    pub fn gamma(&self) -> &OrdinalCNF {
        &self.tree.gamma
    }

    pub fn support_level(&self, n: usize) -> &BTreeSet<Seq> {
        &self.support[n]
    }

    pub fn neighbors(&self, x: &Seq) -> impl Iterator<Item = &Seq> {
        self.adjacency.get(x).into_iter().flatten()
    }

    pub fn templates_for(&mut self, level: usize) -> Result<Vec<Template>> {
        if level < self.templates.len() && !self.templates[level].is_empty() {
            return Ok(self.templates[level].clone());
        }
        let bounds = level_bounds(&self.tree.gamma, level);
        let ts = enumerate_templates(&bounds, &self.tree.gamma, &self.cfg, self.cfg.budget)?;
        if level < self.templates.len() {
            self.templates[level] = ts.clone();
        }
        Ok(ts)
    }

    fn add_anchor(&mut self, s: Seq) {
        self.add_support(&s);
        self.tree.base.anchors.insert(s);
    }

    fn add_support(&mut self, s: &Seq) {
        for m in (0..=s.len()).rev() {
            if !self.support[m].insert(s.restrict(m)) {
                break;
            }
        }
    }

    fn add_pair(&mut self, x: Seq, y: Seq, k: Color) -> Result<()> {
        self.add_support(&x);
        self.add_support(&y);
        self.adjacency.entry(x.clone()).or_default().insert(y.clone());
        self.adjacency.entry(y.clone()).or_default().insert(x.clone());
        self.tree.base.insert(BasicNode::new(x, y, k)?)
    }

    fn set(&mut self, a: BasicApproximation, r: OrdinalCNF, c: Seq) {
        if !self.tree.r.contains_key(&a) {
            self.by_level[a.level].push(a.clone());
        }
        self.tree.set(a, r, c);
    }

    fn fresh_tag(&mut self, level: usize) -> u32 {
        let t = self.tags[level];
        self.tags[level] += 1;
        t
    }

    fn fresh_color(&mut self) -> Color {
        let k = self.next_color;
        self.next_color += 1;
        k
    }

    /// Copies every pair, anchor and table entry of `level` one level up
    /// along `⌢0`.
    fn zero_extend_level(&mut self, level: usize) {
        let pairs: Vec<BasicNode> = self.tree.base.levels[level].iter().cloned().collect();
        let anchors: Vec<Seq> = self
            .tree
            .base
            .anchors
            .iter()
            .filter(|a| a.len() == level)
            .cloned()
            .collect();
        let approxs = self.by_level[level].clone();
        self.lift_once(&pairs, &anchors, &approxs);
    }

    fn lift_once(&mut self, pairs: &[BasicNode], anchors: &[Seq], approxs: &[BasicApproximation]) {
        for p in pairs {
            self.add_pair(p.x.child(0), p.y.child(0), p.k).expect("lifted pair fits");
        }
        for a in anchors {
            self.add_anchor(a.child(0));
        }
        for a in approxs {
            let lifted = Approx {
                level: a.level + 1,
                arity: a.arity,
                v: a.v.iter().map(|s| s.child(0)).collect(),
                h: a.h.clone(),
            };
            let (r, c) = (self.tree.r[a].clone(), self.tree.c[a].child(0));
            self.set(lifted, r, c);
        }
    }

    /// Lifts the given material along `⌢0` up to the top level.
    fn lift_to_top(&mut self, mut pairs: Vec<BasicNode>, mut anchors: Vec<Seq>, mut approxs: Vec<BasicApproximation>, level: usize) {
        for _ in level + 1..self.height() {
            self.lift_once(&pairs, &anchors, &approxs);
            pairs = pairs
                .iter()
                .map(|p| BasicNode::new(p.x.child(0), p.y.child(0), p.k).unwrap())
                .collect();
            anchors = anchors.iter().map(|a| a.child(0)).collect();
            approxs = approxs
                .iter()
                .map(|a| Approx {
                    level: a.level + 1,
                    arity: a.arity,
                    v: a.v.iter().map(|s| s.child(0)).collect(),
                    h: a.h.clone(),
                })
                .collect();
        }
    }

    /// Realizes the next level of `s` above an embedding of its level
    /// `s_level` that lands on `level` of this tree, with fresh tags and
    /// fresh colors. Returns the extended embedding. `lift` controls
    /// whether the new material is copied up to the top.
    fn realize(&mut self, s: &RankedTree, e: &Embedding, s_level_offset: usize, level: usize) -> Result<Embedding> {
        self.realize_inner(s, e, s_level_offset, level, false)
    }

    fn realize_inner(
        &mut self,
        s: &RankedTree,
        e: &Embedding,
        s_level: usize,
        level: usize,
        lift: bool,
    ) -> Result<Embedding> {
        let target = level + 1;
        if target >= self.height() {
            return Err(Error::Bounds(format!(
                "no room above level {level} in a tree of height {}",
                self.height()
            )));
        }
        let upper = s_level + 1;
        let mut out = e.clone();
        let points: Vec<Seq> = s.base.support_level(upper).into_iter().collect();
        for q in &points {
            let parent = out
                .f
                .get(&q.restrict(s_level))
                .ok_or_else(|| Error::pre(format!("parent of {q} is not mapped")))?
                .clone();
            let tag = self.fresh_tag(target);
            out.f.insert(q.clone(), parent.child(tag));
        }
        let mut new_pairs = Vec::new();
        for p in &s.base.levels[upper] {
            let k = match out.f_star.get(&p.k) {
                Some(&k) => k,
                None => {
                    let k = self.fresh_color();
                    out.f_star.insert(p.k, k);
                    k
                }
            };
            let node = BasicNode::new(out.f[&p.x].clone(), out.f[&p.y].clone(), k)?;
            self.add_pair(node.x.clone(), node.y.clone(), k)?;
            new_pairs.push(node);
        }
        let paired: BTreeSet<&Seq> = s.base.levels[upper].iter().flat_map(|p| [&p.x, &p.y]).collect();
        let mut new_anchors = Vec::new();
        for q in points.iter().filter(|q| !paired.contains(q)) {
            let a = out.f[q].clone();
            self.add_anchor(a.clone());
            new_anchors.push(a);
        }
        let mut new_approxs = Vec::new();
        for (a, r) in s.r.iter().filter(|(a, _)| a.level == upper) {
            let image = out.transport(a)?;
            let c = out.f[&s.c[a]].clone();
            self.set(image.clone(), r.clone(), c);
            new_approxs.push(image);
        }
        self.realized += 1;
        if lift {
            self.lift_to_top(new_pairs, new_anchors, new_approxs, target);
        }
        Ok(out)
    }

    /// Places the first level of `s` under the zero sequence of
    /// `level - 1` with fresh tags and colors.
    fn add_root(&mut self, s: &RankedTree, level: usize) -> Result<Embedding> {
        self.add_root_inner(s, level, false)
    }

    fn add_root_inner(&mut self, s: &RankedTree, level: usize, lift: bool) -> Result<Embedding> {
        if level == 0 || level >= self.height() {
            return Err(Error::Bounds(format!("cannot place roots at level {level}")));
        }
        let first = domain_levels(&s.base).start;
        let theta = Seq::zeros(level - 1);
        let mut e = Embedding::default();
        for q in s.base.support_level(first) {
            let tag = self.fresh_tag(level);
            e.f.insert(q, theta.child(tag));
        }
        let mut new_pairs = Vec::new();
        for p in &s.base.levels[first] {
            let k = match e.f_star.get(&p.k) {
                Some(&k) => k,
                None => {
                    let k = self.fresh_color();
                    e.f_star.insert(p.k, k);
                    k
                }
            };
            let node = BasicNode::new(e.f[&p.x].clone(), e.f[&p.y].clone(), k)?;
            self.add_pair(node.x.clone(), node.y.clone(), k)?;
            new_pairs.push(node);
        }
        let paired: BTreeSet<&Seq> = s.base.levels[first].iter().flat_map(|p| [&p.x, &p.y]).collect();
        let mut new_anchors = Vec::new();
        for (q, img) in &e.f {
            if !paired.contains(q) {
                self.add_anchor(img.clone());
                new_anchors.push(img.clone());
            }
        }
        let mut new_approxs = Vec::new();
        for (a, r) in s.r.iter().filter(|(a, _)| a.level == first) {
            let image = e.transport(a)?;
            let c = e.f[&s.c[a]].clone();
            self.set(image.clone(), r.clone(), c);
            new_approxs.push(image);
        }
        if lift {
            self.lift_to_top(new_pairs, new_anchors, new_approxs, level);
        }
        Ok(e)
    }
}

/// Depth-first search for maps of one level of `s` into one level of `u`.
struct Matcher<'a> {
    u: &'a UniversalTree,
    s: &'a RankedTree,
    points: Vec<Seq>,
    parents: Vec<Option<Seq>>,
    level: usize,
    /// Approximations of `s` to check, with the index of their last point.
    checks: Vec<(usize, &'a BasicApproximation)>,
    base: Embedding,
    limit: usize,
    out: Vec<Embedding>,
    steps: usize,
    budget: usize,
}

impl<'a> Matcher<'a> {
    fn new(
        u: &'a UniversalTree,
        s: &'a RankedTree,
        s_level: usize,
        base: Embedding,
        level: usize,
        limit: usize,
    ) -> Result<Self> {
        let points = linked_order(&s.base, s_level);
        let parents = points
            .iter()
            .map(|q| {
                if s_level == 0 || !base.f.contains_key(&q.restrict(s_level - 1)) {
                    Ok(None)
                } else {
                    Ok(Some(base.f[&q.restrict(s_level - 1)].clone()))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let mut checks: Vec<(usize, &BasicApproximation)> = s
            .r
            .keys()
            .filter(|a| a.level == s_level)
            .map(|a| {
                let last = a.v.iter().map(|x| points.iter().position(|p| p == x).unwrap()).max().unwrap();
                (last, a)
            })
            .collect();
        checks.sort_by(|x, y| x.0.cmp(&y.0).then_with(|| x.1.cmp(y.1)));
        Ok(Matcher {
            u,
            s,
            points,
            parents,
            level,
            checks,
            base,
            limit,
            out: Vec::new(),
            steps: 0,
            budget: u.search_budget,
        })
    }

    fn run(mut self) -> Result<Vec<Embedding>> {
        if self.points.is_empty() {
            return Ok(vec![self.base.clone()]);
        }
        let mut cur = self.base.clone();
        self.assign(0, &mut cur)?;
        Ok(self.out)
    }

    fn candidates(&self, i: usize, cur: &Embedding) -> Vec<Seq> {
        let q = &self.points[i];
        let linked = (0..i).find(|&j| !self.s.base.pair_colors(q, &self.points[j]).is_empty());
        let in_range = |c: &Seq| {
            c.len() == self.level && self.parents[i].as_ref().is_none_or(|p| p.is_prefix_of(c))
        };
        let mut out: Vec<Seq> = match (linked, &self.parents[i]) {
            (Some(j), _) => self.u.neighbors(&cur.f[&self.points[j]]).filter(|c| in_range(c)).cloned().collect(),
            (None, Some(p)) => self.u.support[self.level]
                .range(p.clone()..)
                .take_while(|c| p.is_prefix_of(c))
                .cloned()
                .collect(),
            (None, None) => self.u.support[self.level].iter().cloned().collect(),
        };
        let used: BTreeSet<&Seq> = cur.f.values().collect();
        out.retain(|c| !used.contains(c));
        out
    }

    fn assign(&mut self, i: usize, cur: &mut Embedding) -> Result<bool> {
        if i == self.points.len() {
            self.out.push(cur.clone());
            return Ok(self.out.len() >= self.limit);
        }
        for cand in self.candidates(i, cur) {
            self.steps += 1;
            if self.steps > self.budget {
                return Err(Error::Budget {
                    what: "embedding search steps",
                    limit: self.budget,
                });
            }
            cur.f.insert(self.points[i].clone(), cand);
            let pending: Vec<(usize, Color)> = (0..i)
                .flat_map(|j| {
                    self.s
                        .base
                        .pair_colors(&self.points[i], &self.points[j])
                        .into_iter()
                        .map(move |k| (j, k))
                })
                .collect();
            if self.colors(i, &pending, 0, cur)? {
                return Ok(true);
            }
            cur.f.remove(&self.points[i]);
        }
        Ok(false)
    }

    /// Maps the colors of pairs between point `i` and earlier points.
    fn colors(&mut self, i: usize, pending: &[(usize, Color)], at: usize, cur: &mut Embedding) -> Result<bool> {
        if at == pending.len() {
            if !self.check_approxs(i, cur) {
                return Ok(false);
            }
            return self.assign(i + 1, cur);
        }
        let (j, k) = pending[at];
        let (x, y) = (&cur.f[&self.points[i]], &cur.f[&self.points[j]]);
        let present = self.u.tree.base.pair_colors(x, y);
        if let Some(&img) = cur.f_star.get(&k) {
            if present.contains(&img) {
                return self.colors(i, pending, at + 1, cur);
            }
            return Ok(false);
        }
        let used: BTreeSet<Color> = cur.f_star.values().copied().collect();
        for img in present.into_iter().filter(|c| !used.contains(c)) {
            cur.f_star.insert(k, img);
            if self.colors(i, pending, at + 1, cur)? {
                return Ok(true);
            }
            cur.f_star.remove(&k);
        }
        Ok(false)
    }

    fn check_approxs(&self, i: usize, cur: &Embedding) -> bool {
        let start = self.checks.partition_point(|c| c.0 < i);
        self.checks[start..].iter().take_while(|c| c.0 == i).all(|(_, a)| {
            let Ok(image) = cur.transport(a) else { return false };
            match (self.u.tree.r.get(&image), self.u.tree.c.get(&image)) {
                (Some(rt), Some(ct)) => &self.s.r[*a] <= rt && &cur.f[&self.s.c[*a]] == ct,
                _ => false,
            }
        })
    }
}

/// Points of one level, each one after the first of its component
/// sharing a pair with an earlier one.
fn linked_order(s: &BasicColoringTree, level: usize) -> Vec<Seq> {
    let all: Vec<Seq> = s.support_level(level).into_iter().collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(all.len());
    for start in &all {
        if !seen.insert(start.clone()) {
            continue;
        }
        let mut queue = std::collections::VecDeque::from([start.clone()]);
        while let Some(x) = queue.pop_front() {
            for y in &all {
                if !seen.contains(y) && !s.pair_colors(&x, y).is_empty() {
                    seen.insert(y.clone());
                    queue.push_back(y.clone());
                }
            }
            out.push(x);
        }
    }
    out
}

/// Maps of the first level of `s` into `level` of `u` that respect pairs,
/// colors, ranks and critical elements; at most `limit` of them.
pub fn partial_embeddings(u: &UniversalTree, s: &RankedTree, level: usize, limit: usize) -> Result<Vec<Embedding>> {
    check_gamma(u, s)?;
    let first = domain_levels(&s.base).start;
    Matcher::new(u, s, first, Embedding::default(), level, limit)?.run()
}

fn check_gamma(u: &UniversalTree, s: &RankedTree) -> Result<()> {
    match s.r.values().find(|r| *r >= u.gamma()) {
        Some(r) => Err(Error::pre(format!("rank {r} is not below {}", u.gamma()))),
        None => Ok(()),
    }
}

fn image_level(e: &Embedding, s: &RankedTree, s_level: usize) -> Result<usize> {
    s.base
        .support_level(s_level)
        .iter()
        .find_map(|q| e.f.get(q).map(|x| x.len()))
        .ok_or_else(|| Error::pre(format!("no point of level {s_level} is mapped")))
}

/// Extends `e` from level `s_level` of `s` to level `s_level + 1`, searching
/// every higher level of `u`.
pub fn extend_level(u: &UniversalTree, s: &RankedTree, e: &Embedding, s_level: usize) -> Result<Embedding> {
    let from = image_level(e, s, s_level)?;
    for level in from + 1..u.height() {
        let found = Matcher::new(u, s, s_level + 1, e.clone(), level, 1)?.run()?;
        if let Some(x) = found.into_iter().next() {
            return Ok(x);
        }
    }
    Err(Error::NotFound {
        deepest: u.height().saturating_sub(1),
    })
}

/// Extends a partial embedding of a template to its upper level.
pub fn extend_template_embedding(u: &UniversalTree, s: &Template, partial: &Embedding) -> Result<Embedding> {
    check_gamma(u, s)?;
    let report = crate::template::validate_embedding(partial, &s.truncate(2)?, &u.tree, &u.cfg)?;
    if !report.is_ok() {
        return Err(Error::pre(format!("partial map is not an embedding:\n{report}")));
    }
    extend_level(u, s, partial, 1)
}

/// Extension at the next level of `u`, realized on demand when the search
/// finds none.
pub fn ensure_extension(u: &mut UniversalTree, s: &RankedTree, e: &Embedding, s_level: usize) -> Result<Embedding> {
    let from = image_level(e, s, s_level)?;
    if from + 1 < u.height() {
        let found = Matcher::new(u, s, s_level + 1, e.clone(), from + 1, 1)?.run()?;
        if let Some(x) = found.into_iter().next() {
            return Ok(x);
        }
    }
    u.realize_inner(s, e, s_level, from, true)
}

/// Embeds a ranked tree level by level, realizing missing pieces.
pub fn embed_ranked(s: &RankedTree, u: &mut UniversalTree) -> Result<Embedding> {
    check_gamma(u, s)?;
    let levels = domain_levels(&s.base);
    if levels.is_empty() {
        return Ok(Embedding::default());
    }
    let needed = levels.len();
    if needed >= u.height() {
        return Err(Error::Bounds(format!(
            "{needed} levels do not fit below height {}",
            u.height()
        )));
    }
    let mut e = None;
    for level in 1..=u.height() - needed {
        if let Some(found) = Matcher::new(u, s, levels.start, Embedding::default(), level, 1)?.run()?.pop() {
            e = Some(found);
            break;
        }
    }
    let mut e = match e {
        Some(e) => e,
        None => u.add_root_inner(s, 1, true)?,
    };
    for s_level in levels.start..levels.end - 1 {
        e = ensure_extension(u, s, &e, s_level)?;
    }
    Ok(e)
}

/// Realizes, above `a`, successors splitting each of its points, and
/// recursively above those, so that the rank of `a` in `u` reaches `r(a)`
/// or the height allows no more. Returns the number of steps taken.
pub fn saturate(u: &mut UniversalTree, a: &BasicApproximation) -> Result<usize> {
    let mut done = HashSet::new();
    saturate_inner(u, a, &mut done)
}

fn saturate_inner(
    u: &mut UniversalTree,
    a: &BasicApproximation,
    done: &mut HashSet<(BasicApproximation, usize)>,
) -> Result<usize> {
    if a.level + 1 >= u.height() {
        return Ok(0);
    }
    let r = u
        .tree
        .r
        .get(a)
        .ok_or_else(|| Error::pre(format!("{} has no rank in the universal tree", a.key())))?;
    let headroom = u.height() - 1 - a.level;
    let target = r.as_nat().map_or(headroom, |r| headroom.min(r as usize));
    if target == 0 || !done.insert((a.clone(), target)) {
        return Ok(0);
    }
    let mut steps = 0;
    for split in 0..a.v.len() {
        let (s, e) = splitting_template(u, a, split, target)?;
        let full = ensure_extension(u, &s, &e, 1)?;
        let top = s
            .r
            .keys()
            .find(|b| b.level == 2 && b.v.len() == a.v.len() + 1)
            .expect("the full upper set is an approximation");
        let b = full.transport(top)?;
        steps += 1 + saturate_inner(u, &b, done)?;
    }
    Ok(steps)
}

/// Template over the points of `a` with every point continued and point
/// `split` doubled; sets holding both halves get rank `target - 1`.
fn splitting_template(
    u: &UniversalTree,
    a: &BasicApproximation,
    split: usize,
    target: usize,
) -> Result<(RankedTree, Embedding)> {
    let k = a.v.len();
    let lower = |i: usize| Seq(vec![i as u32]);
    let mut base = BasicColoringTree::new(3, 1)?;
    let mut fresh = 0;
    for (pair, &color) in (0..k).combinations(2).zip(a.h.iter()) {
        base.add_pair(lower(pair[0]), lower(pair[1]), color)?;
        fresh = fresh.max(color + 1);
    }
    for (pair, &color) in (0..k).combinations(2).zip(a.h.iter()) {
        base.add_pair(lower(pair[0]).child(0), lower(pair[1]).child(0), color)?;
        if pair[0] == split {
            base.add_pair(lower(split).child(1), lower(pair[1]).child(0), color)?;
        } else if pair[1] == split {
            base.add_pair(lower(pair[0]).child(0), lower(split).child(1), color)?;
        }
    }
    base.add_pair(lower(split).child(0), lower(split).child(1), fresh)?;
    let e = Embedding {
        f: (0..k).map(|i| (lower(i), a.v[i].clone())).collect(),
        f_star: a.h.iter().map(|&c| (c, c)).collect(),
    };
    let mut s = RankedTree::new(base, u.gamma().clone());
    let mut counter = 0;
    for sub in s.base.level_nodes(1).enumerate(&u.cfg, &mut counter)? {
        let image = e.transport(&sub)?;
        let (r, c) = lookup(u, &image)?;
        let c = lower(a.v.iter().position(|p| p == c).expect("critical point lies in v"));
        s.set(sub, r.clone(), c);
    }
    for b in s.base.level_nodes(2).enumerate(&u.cfg, &mut counter)? {
        let halves = b.v.iter().filter(|p| p.0[0] as usize == split).count();
        if halves == 2 {
            let c = lower(split).child(1);
            s.set(b, OrdinalCNF::from_nat(target as u64 - 1), c);
        } else {
            let parents: Vec<Seq> = b.v.iter().map(|p| p.restrict(1)).collect();
            let sub = Approx::from_fn(1, 2, parents, |pair| *b.label(pair));
            let (r, c) = (s.r[&sub].clone(), s.c[&sub].clone());
            let c = b.v.iter().find(|p| c.is_prefix_of(p)).cloned().expect("every parent has one child in b");
            s.set(b, r, c);
        }
    }
    Ok((s, e))
}

fn lookup<'a>(u: &'a UniversalTree, a: &BasicApproximation) -> Result<(&'a OrdinalCNF, &'a Seq)> {
    match (u.tree.r.get(a), u.tree.c.get(a)) {
        (Some(r), Some(c)) => Ok((r, c)),
        _ => Err(Error::pre(format!("{} has no rank in the universal tree", a.key()))),
    }
}

/// Result of embedding a coloring: the string map and its supporting data.
#[derive(Clone, Debug)]
pub struct ColoringEmbedding {
    /// Top-level strings of the augmented tree to sequences of `u`.
    pub phi: BTreeMap<Seq, Seq>,
    pub embedding: Embedding,
    pub augmented: RankedTree,
    /// The base point and the extra color of the augmentation.
    pub base_point: Seq,
    pub base_color: Color,
}

/// Full tree over the alphabet used by `s`, with every pair through the
/// base point colored by a fresh color.
pub fn augment(s: &BasicColoringTree) -> (BasicColoringTree, Seq, Color) {
    let arity = s
        .support()
        .iter()
        .flat_map(|x| x.0.iter().copied())
        .max()
        .map_or(2, |m| (m + 1).max(2));
    let top = s.height - 1;
    let support = s.support();
    let mut x0 = Seq::zeros(top);
    let mut all = vec![Seq::empty()];
    for _ in 0..top {
        all = all.iter().flat_map(|x| (0..arity).map(move |i| x.child(i))).collect();
    }
    if let Some(free) = all.iter().find(|x| !support.contains(*x)) {
        x0 = free.clone();
    }
    let c0 = s.colors().iter().next_back().map_or(0, |k| k + 1);
    let mut out = s.clone();
    out.min_level = out.min_level.min(1.min(top));
    let mut level: Vec<Seq> = vec![Seq::empty()];
    for n in 1..s.height {
        level = level.iter().flat_map(|x| (0..arity).map(move |i| x.child(i))).collect();
        let base = x0.restrict(n);
        for y in &level {
            if y != &base {
                out.add_pair(base.clone(), y.clone(), c0).expect("levels fit");
            }
        }
    }
    (out, x0, c0)
}

/// Embeds the coloring of `s` after augmentation by a base point.
pub fn embed_coloring(s: &BasicColoringTree, u: &mut UniversalTree) -> Result<ColoringEmbedding> {
    let (aug, x0, c0) = augment(s);
    let ranked = derive_ranked(&aug, &u.cfg)?;
    let embedding = embed_ranked(&ranked, u)?;
    let top = aug.height - 1;
    let phi = aug
        .support_level(top)
        .into_iter()
        .filter_map(|x| embedding.f.get(&x).map(|y| (x, y.clone())))
        .collect();
    Ok(ColoringEmbedding {
        phi,
        embedding,
        augmented: ranked,
        base_point: x0,
        base_color: c0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basic::{basic_two_branch, check_rank_bound, validate_ranked};
    use crate::template::validate_embedding;

    #[test]
    fn saturation_lifts_true_ranks() {
        let mut u = build_universal(&OrdinalCNF::from_nat(3), 5).unwrap();
        let mut picked: Vec<BasicApproximation> = u
            .tree
            .r
            .iter()
            .filter(|(a, r)| a.level == 2 && r.as_nat() == Some(2))
            .map(|(a, _)| a.clone())
            .collect();
        picked.sort();
        picked.truncate(3);
        assert!(!picked.is_empty());
        for a in &picked {
            assert!(saturate(&mut u, a).unwrap() > 0);
        }
        assert!(validate_ranked(&u.tree, &u.cfg).unwrap().is_ok());
        assert!(check_rank_bound(&u.tree, &u.cfg).unwrap().is_ok());
        let ranks = crate::basic::basic_rank(&u.tree.base, &u.cfg).unwrap();
        for a in &picked {
            assert_eq!(ranks.value(a), Some(2), "{}", a.key());
        }
    }

    #[test]
    fn gamma_one_is_flat() {
        let u = build_universal(&OrdinalCNF::from_nat(1), 2).unwrap();
        assert!(validate_ranked(&u.tree, &u.cfg).unwrap().is_ok());
        assert!(u.tree.r.values().all(|r| r.is_zero()));
    }

    #[test]
    fn small_universal_is_ranked() {
        let u = build_universal(&OrdinalCNF::from_nat(2), 4).unwrap();
        let rep = validate_ranked(&u.tree, &u.cfg).unwrap();
        assert!(rep.is_ok(), "{rep}");
        assert!(check_rank_bound(&u.tree, &u.cfg).unwrap().is_ok());
        assert!(u.realized > 0);
    }

    #[test]
    fn truncations_nest() {
        let g = OrdinalCNF::from_nat(2);
        let a = build_universal(&g, 3).unwrap();
        let b = build_universal(&g, 4).unwrap();
        let cut = b.tree.truncate(3).unwrap();
        assert_eq!(a.tree.base, cut.base);
        assert_eq!(a.tree.r, cut.r);
        assert_eq!(a.tree.c, cut.c);
    }

    #[test]
    fn two_branches_embed() {
        let s = derive_ranked(&basic_two_branch(3), &ApproxConfig::default()).unwrap();
        let mut u = build_universal(&OrdinalCNF::from_nat(1), 6).unwrap();
        let e = embed_ranked(&s, &mut u).unwrap();
        assert!(validate_embedding(&e, &s, &u.tree, &u.cfg).unwrap().is_ok());
        assert!(validate_ranked(&u.tree, &u.cfg).unwrap().is_ok());
    }
}
