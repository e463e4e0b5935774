//! Backbone paths of currents and the path-expansion weights.
//!
//! A walk starts at a source, and at each vertex scans the unblocked
//! incident edges in rank order. The first odd edge is traversed; every
//! edge scanned before it is rejected. Traversed and rejected edges become
//! blocked for the rest of the sequence.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::check::{Bound, Check};
use crate::currents::{single_fold, EdgeStateConfig, SourceConstraint};
use crate::error::{Error, Result};
use crate::graph::{mask_to_vec, Couplings, Graph, Model};
use crate::spin;
use crate::sum::Neumaier;

/// A path given by its start and edge sequence.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathSpec {
    pub start: usize,
    pub edges: Vec<usize>,
}

/// A walked path with the edges it blocked.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BackbonePath {
    pub start: usize,
    pub end: usize,
    pub edges: Vec<usize>,
    /// Traversed plus scanned-and-rejected edges of this path.
    pub blocked: u64,
}

impl BackbonePath {
    pub fn spec(&self) -> PathSpec {
        PathSpec {
            start: self.start,
            edges: self.edges.clone(),
        }
    }
}

/// Union of the blocked sets.
pub fn blocked_union(paths: &[BackbonePath]) -> u64 {
    paths.iter().fold(0, |m, p| m | p.blocked)
}

/// Deterministic backbone of a current: sources are paired starting from
/// the lowest-ranked unpaired one, and each walk stops at the first
/// unpaired source it reaches.
pub fn extract_backbone(g: &Graph, state: &EdgeStateConfig) -> Vec<BackbonePath> {
    let mut unpaired = state.sources(g);
    let mut blocked = 0u64;
    let mut out = Vec::new();
    while unpaired != 0 {
        let s = unpaired.trailing_zeros() as usize;
        unpaired &= !(1 << s);
        let mut v = s;
        let mut edges = Vec::new();
        let mut mine = 0u64;
        loop {
            let mut next = None;
            for &b in g.incident(v) {
                if blocked >> b & 1 == 1 {
                    continue;
                }
                blocked |= 1 << b;
                mine |= 1 << b;
                if state.odd >> b & 1 == 1 {
                    next = Some(b);
                    break;
                }
            }
            let b = next.expect("backbone walk stalled with unpaired sources");
            edges.push(b);
            v = g.other(b, v);
            if unpaired >> v & 1 == 1 {
                unpaired &= !(1 << v);
                break;
            }
        }
        out.push(BackbonePath {
            start: s,
            end: v,
            edges,
            blocked: mine,
        });
    }
    out
}

/// Replays the walk rule along the given paths with a shared blocked set
/// starting from `blocked0`. Returns `None` when the sequence is not a
/// possible outcome of the rule (the consistency indicator is 0).
pub fn walk_sequence(g: &Graph, blocked0: u64, paths: &[PathSpec]) -> Option<Vec<BackbonePath>> {
    let mut blocked = blocked0;
    let mut out = Vec::with_capacity(paths.len());
    for p in paths {
        if p.edges.is_empty() || p.start >= g.num_vertices() {
            return None;
        }
        let end = path_end(g, p)?;
        if end == p.start {
            return None;
        }
        let mut v = p.start;
        let mut mine = 0u64;
        for (i, &e) in p.edges.iter().enumerate() {
            if i > 0 && v == end {
                return None;
            }
            let mut found = false;
            for &b in g.incident(v) {
                if blocked >> b & 1 == 1 {
                    continue;
                }
                blocked |= 1 << b;
                mine |= 1 << b;
                if b == e {
                    found = true;
                    break;
                }
            }
            if !found {
                return None;
            }
            v = g.other(e, v);
        }
        out.push(BackbonePath {
            start: p.start,
            end,
            edges: p.edges.clone(),
            blocked: mine,
        });
    }
    Some(out)
}

fn path_end(g: &Graph, p: &PathSpec) -> Option<usize> {
    let mut v = p.start;
    for &e in &p.edges {
        if e >= g.num_edges() {
            return None;
        }
        let (a, b) = g.edge(e);
        v = if a == v {
            b
        } else if b == v {
            a
        } else {
            return None;
        };
    }
    Some(v)
}

/// `prod_{b in S} cosh K_b * Z(E \ S) / Z(E)`.
pub fn zeta(model: &Model, depleted: u64) -> Result<f64> {
    let z = spin::partition_function(model)?;
    let zd = spin::partition_function(&deplete(model, depleted))?;
    let c: f64 = mask_to_vec(depleted)
        .into_iter()
        .map(|b| model.k(b).cosh())
        .product();
    Ok(c * zd / z)
}

fn deplete(model: &Model, set: u64) -> Model {
    let mut j = model.couplings.j.clone();
    for b in mask_to_vec(set) {
        j[b] = 0.0;
    }
    model.with_couplings(Couplings::new(j, model.couplings.beta))
}

/// Components of `rho(paths) = I * zeta * prod tanh`.
#[derive(Clone, Debug, PartialEq)]
pub struct RhoWeight {
    pub indicator: bool,
    pub zeta: f64,
    pub tanh_product: f64,
    pub rho: f64,
    pub walked: Vec<BackbonePath>,
}

fn require_ferro(model: &Model) -> Result<()> {
    if model.couplings.is_ferromagnetic() && !model.has_field() && model.boundary.clamped().is_empty() {
        Ok(())
    } else {
        Err(Error::Precondition(
            "path expansion needs ferromagnetic couplings, zero field and free boundary".into(),
        ))
    }
}

pub fn rho_weight(model: &Model, paths: &[PathSpec]) -> Result<RhoWeight> {
    require_ferro(model)?;
    rho_from(model, 0, paths)
}

fn rho_from(model: &Model, blocked0: u64, paths: &[PathSpec]) -> Result<RhoWeight> {
    match walk_sequence(&model.graph, blocked0, paths) {
        None => Ok(RhoWeight {
            indicator: false,
            zeta: 0.0,
            tanh_product: 0.0,
            rho: 0.0,
            walked: Vec::new(),
        }),
        Some(walked) => {
            let t: f64 = walked
                .iter()
                .flat_map(|p| p.edges.iter())
                .map(|&b| model.k(b).tanh())
                .product();
            let zt = zeta(model, blocked0 | blocked_union(&walked))?;
            Ok(RhoWeight {
                indicator: true,
                zeta: zt,
                tanh_product: t,
                rho: zt * t,
                walked,
            })
        }
    }
}

/// Every path from `a` to `b` the walk rule can produce with `blocked0`
/// already blocked, in depth-first order.
pub fn consistent_walks(g: &Graph, blocked0: u64, a: usize, b: usize) -> Vec<BackbonePath> {
    fn go(
        g: &Graph,
        v: usize,
        target: usize,
        blocked: u64,
        mine: u64,
        edges: &mut Vec<usize>,
        start: usize,
        out: &mut Vec<BackbonePath>,
    ) {
        let mut blk = blocked;
        let mut own = mine;
        for &e in g.incident(v) {
            if blk >> e & 1 == 1 {
                continue;
            }
            blk |= 1 << e;
            own |= 1 << e;
            let w = g.other(e, v);
            edges.push(e);
            if w == target {
                out.push(BackbonePath {
                    start,
                    end: target,
                    edges: edges.clone(),
                    blocked: own,
                });
            } else {
                go(g, w, target, blk, own, edges, start, out);
            }
            edges.pop();
        }
    }
    let mut out = Vec::new();
    if a != b {
        go(g, a, b, blocked0, 0, &mut Vec::new(), a, &mut out);
    }
    out
}

/// Current weights grouped by backbone, divided by `Z`.
pub fn backbone_grouping(model: &Model, a: &[usize]) -> Result<Vec<(Vec<BackbonePath>, f64)>> {
    require_ferro(model)?;
    let g = &model.graph;
    let sc = SourceConstraint::Exact(a.to_vec());
    type Acc = BTreeMap<Vec<BackbonePath>, Neumaier>;
    let groups: Acc = single_fold(
        model,
        &sc,
        BTreeMap::new,
        |acc: &mut Acc, s, w| {
            let bb = extract_backbone(g, s);
            for p in &bb {
                let mut path = 0u64;
                for &e in &p.edges {
                    path |= 1 << e;
                }
                debug_assert_eq!(p.blocked & !path & s.odd, 0, "rejected edge is odd");
            }
            acc.entry(bb).or_default().add(w);
        },
        |t: &mut Acc, p: Acc| {
            for (k, v) in p {
                t.entry(k).or_default().merge(&v);
            }
        },
    )?;
    let z = spin::partition_function(model)?;
    Ok(groups.into_iter().map(|(k, v)| (k, v.value() / z)).collect())
}

/// Outcome of the path-expansion property checks.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PathReport {
    pub checks: Vec<Check>,
    pub bounds: Vec<Bound>,
}

impl PathReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.checks.iter().all(|c| c.passes(tol)) && self.bounds.iter().all(|b| b.passes(tol))
    }
}

/// Checks concatenation, partial resummation, `zeta <= 1`,
/// super-multiplicativity and vanishing weight of inconsistent sequences
/// on each sampled path tuple.
pub fn check_path_properties(model: &Model, samples: &[Vec<PathSpec>]) -> Result<PathReport> {
    require_ferro(model)?;
    let g = &model.graph;
    let mut rep = PathReport::default();
    for tuple in samples {
        let r = rho_weight(model, tuple)?;
        if !r.indicator {
            rep.checks.push(Check::new("inconsistent sequence weight", r.rho, 0.0));
            continue;
        }
        rep.bounds.push(Bound::new("zeta at most one", r.zeta, 1.0));
        let n = tuple.len();
        // partial resummation over the last path
        let prefix = &tuple[..n - 1];
        let head = rho_weight(model, prefix)?;
        let blocked = blocked_union(&head.walked);
        let last = &r.walked[n - 1];
        let mut sum = Neumaier::new();
        for w in consistent_walks(g, blocked, last.start, last.end) {
            let mut t = prefix.to_vec();
            t.push(w.spec());
            sum.add(rho_weight(model, &t)?.rho);
        }
        let corr = spin::expectation(&deplete(model, blocked), &[last.start, last.end])?;
        let head_rho = if prefix.is_empty() { 1.0 } else { head.rho };
        rep.checks
            .push(Check::new("partial resummation", sum.value(), head_rho * corr));
        if n >= 2 {
            let (a, b) = (&r.walked[0], &r.walked[1]);
            if a.end == b.start && vertex_simple(g, &[a.spec(), b.spec()]) {
                let mut edges = a.edges.clone();
                edges.extend(&b.edges);
                let cat = rho_weight(
                    model,
                    &[PathSpec {
                        start: a.start,
                        edges,
                    }],
                )?;
                let pair = rho_weight(model, &tuple[..2])?;
                rep.checks.push(Check::new("concatenation", cat.rho, pair.rho));
            }
            let first = zeta(model, r.walked[0].blocked)?;
            let rest = zeta(model, blocked_union(&r.walked[1..]))?;
            rep.bounds
                .push(Bound::new("zeta super-multiplicative", first * rest, r.zeta));
            let alone: f64 = tuple
                .iter()
                .map(|p| rho_weight(model, std::slice::from_ref(p)).map(|w| w.rho))
                .product::<Result<f64>>()?;
            rep.bounds.push(Bound::new("dichotomy", alone, r.rho));
        }
    }
    Ok(rep)
}

fn vertex_simple(g: &Graph, paths: &[PathSpec]) -> bool {
    let mut seen = 0u64;
    let mut v = paths[0].start;
    seen |= 1 << v;
    for p in paths {
        for &e in &p.edges {
            v = g.other(e, v);
            if seen >> v & 1 == 1 {
                return false;
            }
            seen |= 1 << v;
        }
    }
    true
}

/// `zeta` of a path in the graph induced on `keep` against its value in
/// the full graph; the larger domain gives the smaller value.
pub fn zeta_nested(model: &Model, keep: &[bool], path: &[PathSpec]) -> Result<Bound> {
    require_ferro(model)?;
    let (sub, vmap, emap) = model.graph.induced(keep);
    let mut inv = vec![usize::MAX; model.m()];
    for (new, &old) in emap.iter().enumerate() {
        inv[old] = new;
    }
    let mut small_paths = Vec::new();
    for p in path {
        let start = vmap[p.start].ok_or_else(|| Error::Domain("path leaves the subdomain".into()))?;
        let edges = p
            .edges
            .iter()
            .map(|&b| {
                (inv[b] != usize::MAX)
                    .then_some(inv[b])
                    .ok_or_else(|| Error::Domain("path leaves the subdomain".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        small_paths.push(PathSpec { start, edges });
    }
    let j = emap.iter().map(|&b| model.couplings.j[b]).collect();
    let small = Model::new(sub, Couplings::new(j, model.couplings.beta))?.with_caps(model.caps);
    let zs = rho_weight(&small, &small_paths)?;
    let zb = rho_weight(model, path)?;
    if !zs.indicator || !zb.indicator {
        return Err(Error::Domain("path is not walk-consistent".into()));
    }
    Ok(Bound::new("zeta decreasing in the domain", zb.zeta, zs.zeta))
}

/// Random walk-consistent tuples of one or two paths.
pub fn sample_path_tuples(g: &Graph, seed: u64, count: usize) -> Vec<Vec<PathSpec>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.num_vertices();
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < count && attempts < 50 * count.max(1) && n >= 2 {
        attempts += 1;
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        let walks = consistent_walks(g, 0, a, b);
        let Some(first) = walks.choose(&mut rng) else {
            continue;
        };
        let mut tuple = vec![first.spec()];
        if rng.gen_bool(0.5) {
            // continue from the endpoint to obtain a concatenable pair
            let c = rng.gen_range(0..n);
            let more = consistent_walks(g, first.blocked, first.end, c);
            if let Some(second) = more.choose(&mut rng) {
                tuple.push(second.spec());
            }
        }
        out.push(tuple);
    }
    out
}

/// `|U4| <= 2 sum_u prod_j <sigma_{x_j} sigma_u>`.
pub fn tree_diagram_check(model: &Model, x: [usize; 4]) -> Result<Bound> {
    require_ferro(model)?;
    model.check_vertices(&x)?;
    let u4 = spin::ursell4(model, x)?;
    let n = model.n();
    let mut obs = Vec::with_capacity(4 * n);
    for u in 0..n {
        for &xj in &x {
            obs.push(vec![xj, u]);
        }
    }
    let e = spin::gibbs(model, &obs)?.expectations;
    let mut s = Neumaier::new();
    for u in 0..n {
        s.add(e[4 * u..4 * u + 4].iter().product());
    }
    Ok(Bound::new("tree diagram", u4.abs(), 2.0 * s.value()))
}
