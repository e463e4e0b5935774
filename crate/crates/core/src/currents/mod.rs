//! Random currents through their exact (parity, support) pushforward.
//!
//! An integer current on edge `b` enters every implemented quantity only
//! through whether it is zero, odd, or even and positive. Summing the weight
//! `K^n / n!` over each class gives `1`, `sinh K` and `cosh K - 1`, so all
//! sums run over `3^|E|` (or, for two currents on a shared edge, five
//! collapsed joint) states.

mod enumerate;
mod fold;
mod identities;

pub use fold::{
    dobrushin_identities, fold_connection_probability, folded_correlation_identity,
    DobrushinReport,
};
pub use identities::*;

use crate::error::{size_check, Error, Result};
use crate::graph::{mask_to_vec, parity_mask, Graph, Model};
use crate::unionfind::SmallDsu;

pub(crate) use enumerate::{double_opts, single_opts, Plan};

/// Class of the current on one edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeState {
    Zero,
    Odd,
    EvenPos,
}

/// Per-edge trichotomy stored as two edge bit sets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct EdgeStateConfig {
    pub odd: u64,
    pub support: u64,
}

impl EdgeStateConfig {
    pub fn from_states(states: &[EdgeState]) -> Self {
        let mut c = Self::default();
        for (b, s) in states.iter().enumerate() {
            match s {
                EdgeState::Zero => {}
                EdgeState::Odd => {
                    c.odd |= 1 << b;
                    c.support |= 1 << b;
                }
                EdgeState::EvenPos => c.support |= 1 << b,
            }
        }
        c
    }

    pub fn state(&self, b: usize) -> EdgeState {
        if self.odd >> b & 1 == 1 {
            EdgeState::Odd
        } else if self.support >> b & 1 == 1 {
            EdgeState::EvenPos
        } else {
            EdgeState::Zero
        }
    }

    /// Vertex mask of the source set (odd number of odd incident edges).
    pub fn sources(&self, g: &Graph) -> u64 {
        let mut p = 0u64;
        for b in mask_to_vec(self.odd) {
            p ^= g.edge_mask(b);
        }
        p
    }

    /// Product of trichotomy weights at magnitudes `|K_b|`.
    pub fn weight(&self, model: &Model) -> f64 {
        (0..model.m())
            .map(|b| {
                let k = model.k(b).abs();
                match self.state(b) {
                    EdgeState::Zero => 1.0,
                    EdgeState::Odd => k.sinh(),
                    EdgeState::EvenPos => k.cosh() - 1.0,
                }
            })
            .product()
    }
}

/// Two currents summarized by their parities and the support of their sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct DoubleCurrentState {
    pub odd1: u64,
    pub odd2: u64,
    pub support: u64,
}

impl DoubleCurrentState {
    pub fn first(&self) -> EdgeStateConfig {
        EdgeStateConfig {
            odd: self.odd1,
            support: self.support,
        }
    }
}

/// Constraint on the source set of a current.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SourceConstraint {
    /// `∂n = A` exactly.
    Exact(Vec<usize>),
    /// `∂n` agrees with `interior` away from the `free` vertices, whose
    /// parities are unconstrained.
    Relaxed {
        interior: Vec<usize>,
        free: Vec<usize>,
    },
}

impl SourceConstraint {
    /// Sources `a` under the model's boundary: clamped vertices become
    /// free and are dropped from `a`.
    pub fn for_model(model: &Model, a: &[usize]) -> Self {
        let clamped = model.boundary.clamped();
        if clamped.is_empty() {
            Self::Exact(a.to_vec())
        } else {
            Self::Relaxed {
                interior: a
                    .iter()
                    .copied()
                    .filter(|v| !clamped.contains(v))
                    .collect(),
                free: clamped,
            }
        }
    }

    /// (constrained vertex mask, target parity mask).
    pub(crate) fn masks(&self, n: usize) -> Result<(u64, u64)> {
        let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        match self {
            Self::Exact(a) => {
                if a.iter().any(|&v| v >= n) {
                    return Err(Error::Graph("source outside vertex range".into()));
                }
                let t = parity_mask(a);
                if t.count_ones() % 2 == 1 {
                    return Err(Error::Constraint(format!(
                        "source set {:?} has odd cardinality",
                        mask_to_vec(t)
                    )));
                }
                Ok((all, t))
            }
            Self::Relaxed { interior, free } => {
                if interior.iter().chain(free).any(|&v| v >= n) {
                    return Err(Error::Graph("source outside vertex range".into()));
                }
                let f = free.iter().fold(0u64, |m, &v| m | 1 << v);
                let c = all & !f;
                Ok((c, parity_mask(interior) & c))
            }
        }
    }
}

/// Edges whose effective sign is negative: `sign(J_b)` times the clamped
/// spin values at its endpoints.
pub fn effective_negative_mask(model: &Model) -> u64 {
    let mut m = 0u64;
    for b in 0..model.m() {
        let (u, v) = model.graph.edge(b);
        let su = model.boundary.clamp(u).unwrap_or(1) as f64;
        let sv = model.boundary.clamp(v).unwrap_or(1) as f64;
        if model.couplings.j[b] * su * sv < 0.0 {
            m |= 1 << b;
        }
    }
    m
}

#[inline]
pub(crate) fn sign_of(odd: u64, neg: u64) -> f64 {
    if (odd & neg).count_ones() & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

fn no_field(model: &Model) -> Result<()> {
    if model.has_field() {
        Err(Error::Precondition(
            "current expansions take fields through a ghost vertex; pass a zero-field model".into(),
        ))
    } else {
        Ok(())
    }
}

/// Single-current plan under `sc`.
pub(crate) fn single_plan(model: &Model, sc: &SourceConstraint) -> Result<Plan> {
    no_field(model)?;
    size_check(
        "edges for single-current enumeration",
        model.m() as u128,
        model.caps.single_edges as u128,
    )?;
    let (c, t) = sc.masks(model.n())?;
    let opts = (0..model.m()).map(|b| single_opts(model.k(b))).collect();
    Ok(Plan::new(&model.graph, opts, c, t, 0))
}

/// Two-current plan: the second current lives on the `shared` edges.
pub(crate) fn double_plan(
    model: &Model,
    shared: u64,
    sc1: &SourceConstraint,
    sc2: &SourceConstraint,
) -> Result<Plan> {
    no_field(model)?;
    let (c1, t1) = sc1.masks(model.n())?;
    let (c2, t2) = sc2.masks(model.n())?;
    let opts: Vec<_> = (0..model.m())
        .map(|b| {
            if shared >> b & 1 == 1 {
                double_opts(model.k(b))
            } else {
                single_opts(model.k(b))
            }
        })
        .collect();
    // vertices off the second graph carry no second current, so their
    // target parity must be zero; those checks are folded in below
    let plan = Plan::new(&model.graph, opts, c1 | c2, t1, t2 & c2);
    size_check(
        "joint states for double-current enumeration",
        plan.raw_states(),
        model.caps.double_states,
    )?;
    if c1 != c2 {
        return Err(Error::Precondition(
            "both currents must share the boundary relaxation".into(),
        ));
    }
    Ok(plan)
}

/// Weighted sums of `N` functions of single-current states.
pub fn single_sums<const N: usize>(
    model: &Model,
    sc: &SourceConstraint,
    f: impl Fn(&EdgeStateConfig) -> [f64; N] + Sync,
) -> Result<[f64; N]> {
    let plan = single_plan(model, sc)?;
    Ok(enumerate::sums(&plan, None, |s| f(&s.first())))
}

/// Weighted sums of `N` functions of double-current states.
pub fn double_sums<const N: usize>(
    model: &Model,
    shared: u64,
    sc1: &SourceConstraint,
    sc2: &SourceConstraint,
    f: impl Fn(&DoubleCurrentState) -> [f64; N] + Sync,
) -> Result<[f64; N]> {
    let plan = double_plan(model, shared, sc1, sc2)?;
    Ok(enumerate::sums(&plan, None, f))
}

/// Same as [`single_sums`] with an explicit prefix split depth.
pub fn single_sums_split<const N: usize>(
    model: &Model,
    sc: &SourceConstraint,
    split: usize,
    f: impl Fn(&EdgeStateConfig) -> [f64; N] + Sync,
) -> Result<[f64; N]> {
    let plan = single_plan(model, sc)?;
    Ok(enumerate::sums(&plan, Some(split), |s| f(&s.first())))
}

/// Same as [`double_sums`] with an explicit prefix split depth.
pub fn double_sums_split<const N: usize>(
    model: &Model,
    shared: u64,
    sc1: &SourceConstraint,
    sc2: &SourceConstraint,
    split: usize,
    f: impl Fn(&DoubleCurrentState) -> [f64; N] + Sync,
) -> Result<[f64; N]> {
    let plan = double_plan(model, shared, sc1, sc2)?;
    Ok(enumerate::sums(&plan, Some(split), f))
}

/// Generic fold over single-current states (used for grouping).
pub fn single_fold<A: Send>(
    model: &Model,
    sc: &SourceConstraint,
    init: impl Fn() -> A + Sync,
    leaf: impl Fn(&mut A, &EdgeStateConfig, f64) + Sync,
    merge: impl FnMut(&mut A, A),
) -> Result<A> {
    let plan = single_plan(model, sc)?;
    Ok(enumerate::fold(
        &plan,
        None,
        init,
        |a, s, w| leaf(a, &s.first(), w),
        merge,
    ))
}

/// `Σ w(n) [(-1)^F(n)] 1[event]` over currents meeting `sc`.
pub fn current_sum(
    model: &Model,
    sc: &SourceConstraint,
    signed: bool,
    event: Option<&(dyn Fn(&EdgeStateConfig) -> bool + Sync)>,
) -> Result<f64> {
    let neg = if signed {
        effective_negative_mask(model)
    } else {
        0
    };
    let [s] = single_sums(model, sc, |c| {
        if let Some(e) = event {
            if !e(c) {
                return [0.0];
            }
        }
        [sign_of(c.odd, neg)]
    })?;
    Ok(s)
}

/// `<sigma_A>` as a ratio of current sums. Clamped vertices in `A`
/// contribute their fixed value; signs are tracked when any effective
/// coupling is negative.
pub fn correlation_via_currents(model: &Model, a: &[usize]) -> Result<f64> {
    model.check_vertices(a)?;
    let mut fixed = 1.0;
    let mut rest = Vec::new();
    for v in mask_to_vec(parity_mask(a)) {
        match model.boundary.clamp(v) {
            Some(s) => fixed *= s as f64,
            None => rest.push(v),
        }
    }
    if model.boundary.clamped().is_empty() && rest.len() % 2 == 1 {
        return Ok(0.0);
    }
    let signed = effective_negative_mask(model) != 0;
    let num = current_sum(model, &SourceConstraint::for_model(model, &rest), signed, None)?;
    let den = current_sum(model, &SourceConstraint::for_model(model, &[]), signed, None)?;
    Ok(fixed * num / den)
}

/// Built-in events on the support (and parities) of currents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Event {
    Connected(usize, usize),
    SetsConnected(Vec<usize>, Vec<usize>),
    AllConnected(Vec<usize>),
    /// Every support cycle carries an even number of negative edges.
    FrustrationFree,
    /// Every support cycle crosses the given edge set an even number of times.
    CrossingEven(Vec<usize>),
    /// Indicator that `B` is the source set of some sub-current of the sum
    /// restricted to the shared edges.
    Pairable(Vec<usize>),
    Not(Box<Event>),
}

impl Event {
    /// Parses `conn:x:y`, `sets:a,b:c,d`, `all:a,b,c`, `ff`, `cross:e1,e2`,
    /// `pair:a,b`, `not:<event>`.
    pub fn parse(s: &str) -> Result<Self> {
        let list = |t: &str| -> Result<Vec<usize>> {
            if t.is_empty() {
                return Ok(Vec::new());
            }
            t.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Event(format!("bad index '{x}' in '{s}'")))
                })
                .collect()
        };
        if let Some(rest) = s.strip_prefix("not:") {
            return Ok(Self::Not(Box::new(Self::parse(rest)?)));
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["ff"] => Ok(Self::FrustrationFree),
            ["conn", x, y] => {
                let (x, y) = (list(x)?, list(y)?);
                match (x.as_slice(), y.as_slice()) {
                    ([x], [y]) => Ok(Self::Connected(*x, *y)),
                    _ => Err(Error::Event(s.to_string())),
                }
            }
            ["sets", a, b] => Ok(Self::SetsConnected(list(a)?, list(b)?)),
            ["all", a] => Ok(Self::AllConnected(list(a)?)),
            ["cross", f] => Ok(Self::CrossingEven(list(f)?)),
            ["pair", b] => Ok(Self::Pairable(list(b)?)),
            _ => Err(Error::Event(s.to_string())),
        }
    }

    pub fn holds(&self, g: &Graph, neg: u64, support: u64, shared: u64) -> bool {
        let n = g.num_vertices();
        match self {
            Self::Connected(x, y) => support_dsu(g, support, 0).connected(*x, *y),
            Self::SetsConnected(a, b) => {
                let mut d = support_dsu(g, support, 0);
                d.masks_connected(crate::graph::mask_of(a), crate::graph::mask_of(b), n)
            }
            Self::AllConnected(a) => {
                let mut d = support_dsu(g, support, 0);
                a.windows(2).all(|w| d.connected(w[0], w[1]))
            }
            Self::FrustrationFree => !support_dsu(g, support, neg).frustrated,
            Self::CrossingEven(f) => crossing_even(g, support, crate::graph::mask_of(f)),
            Self::Pairable(b) => pairable(g, support & shared, b),
            Self::Not(e) => !e.holds(g, neg, support, shared),
        }
    }
}

/// Union-find over the support with Z2 labels on `neg` edges.
pub(crate) fn support_dsu(g: &Graph, support: u64, neg: u64) -> SmallDsu {
    let mut d = SmallDsu::new(g.num_vertices());
    let mut m = support;
    while m != 0 {
        let b = m.trailing_zeros() as usize;
        let (u, v) = g.edge(b);
        d.union(u, v, (neg >> b & 1) as u8);
        m &= m - 1;
    }
    d
}

/// Whether `x` and `y` are joined by support edges.
pub fn support_connected(g: &Graph, support: u64, x: usize, y: usize) -> bool {
    support_dsu(g, support, 0).connected(x, y)
}

/// Two-colouring test: can vertices be labelled so that labels differ
/// exactly across `marked` support edges?
pub fn crossing_even(g: &Graph, support: u64, marked: u64) -> bool {
    let n = g.num_vertices();
    let mut label = [u8::MAX; 64];
    let mut queue = [0usize; 64];
    for s in 0..n {
        if label[s] != u8::MAX {
            continue;
        }
        label[s] = 0;
        let (mut head, mut tail) = (0, 1);
        queue[0] = s;
        while head < tail {
            let v = queue[head];
            head += 1;
            for &b in g.incident(v) {
                if support >> b & 1 == 0 {
                    continue;
                }
                let w = g.other(b, v);
                let want = label[v] ^ (marked >> b & 1) as u8;
                if label[w] == u8::MAX {
                    label[w] = want;
                    queue[tail] = w;
                    tail += 1;
                } else if label[w] != want {
                    return false;
                }
            }
        }
    }
    true
}

/// Whether some sub-current of a current with support `support` has source
/// set `b`: each support component must hold an even number of `b` vertices.
pub fn pairable(g: &Graph, support: u64, b: &[usize]) -> bool {
    let mut d = support_dsu(g, support, 0);
    let mut roots = 0u64;
    for v in mask_to_vec(parity_mask(b)) {
        roots ^= 1 << d.find(v).0;
    }
    roots == 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{BoundarySpec, Couplings, Designation};

    fn edge(k: f64) -> Model {
        Model::uniform(Graph::from_edges(2, &[(0, 1)]).unwrap(), k).unwrap()
    }

    #[test]
    fn single_edge_sums() {
        let m = edge(0.9);
        let z = current_sum(&m, &SourceConstraint::Exact(vec![]), false, None).unwrap();
        assert!((z - 0.9f64.cosh()).abs() < 1e-15);
        let s = current_sum(&m, &SourceConstraint::Exact(vec![0, 1]), false, None).unwrap();
        assert!((s - 0.9f64.sinh()).abs() < 1e-15);
    }

    #[test]
    fn odd_sources_rejected() {
        let m = edge(0.9);
        let e = current_sum(&m, &SourceConstraint::Exact(vec![0]), false, None);
        assert!(matches!(e, Err(Error::Constraint(_))));
    }

    #[test]
    fn beta_zero_only_empty_state() {
        let m = Model::uniform(Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap(), 0.0).unwrap();
        let z = current_sum(&m, &SourceConstraint::Exact(vec![]), false, None).unwrap();
        assert_eq!(z, 1.0);
    }

    #[test]
    fn triangle_correlation() {
        let k = 0.5f64.atanh();
        let m = Model::uniform(Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap(), k).unwrap();
        let c = correlation_via_currents(&m, &[1, 2]).unwrap();
        assert!((c - 2.0 / 3.0).abs() < 1e-14);
        assert_eq!(correlation_via_currents(&m, &[]).unwrap(), 1.0);
    }

    #[test]
    fn negative_edge_correlation_signed() {
        let m = Model::new(
            Graph::from_edges(2, &[(0, 1)]).unwrap(),
            Couplings::new(vec![-1.0], 0.4),
        )
        .unwrap();
        let c = correlation_via_currents(&m, &[0, 1]).unwrap();
        assert!((c + 0.4f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn clamped_minus_magnetization() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let m = Model::uniform(g, 0.6)
            .unwrap()
            .with_boundary(BoundarySpec::from_pairs(&[(1, Designation::Minus)]))
            .unwrap();
        let c = correlation_via_currents(&m, &[0]).unwrap();
        assert!((c + 0.6f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn split_depth_does_not_matter() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2), (1, 3)]).unwrap();
        let m = Model::uniform(g, 0.8).unwrap();
        let sc = SourceConstraint::Exact(vec![0, 3]);
        let f = |c: &EdgeStateConfig| [1.0, c.support.count_ones() as f64];
        let a = single_sums_split(&m, &sc, 0, f).unwrap();
        for split in 1..=7 {
            let b = single_sums_split(&m, &sc, split, f).unwrap();
            for i in 0..2 {
                assert!((a[i] - b[i]).abs() <= 1e-14 * a[i].abs());
            }
        }
    }

    #[test]
    fn crossing_even_matches_dsu() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 0)]).unwrap();
        for support in 0..32u64 {
            for marked in 0..32u64 {
                let d = !support_dsu(&g, support, marked).frustrated;
                assert_eq!(crossing_even(&g, support, marked), d);
            }
        }
    }

    #[test]
    fn pairable_rules() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(pairable(&g, 0b11, &[0, 1, 2, 3]));
        assert!(!pairable(&g, 0b01, &[0, 1, 2, 3]));
        assert!(!pairable(&g, 0b11, &[0, 2]));
        assert!(pairable(&g, 0, &[]));
    }

    #[test]
    fn event_parsing() {
        assert_eq!(Event::parse("conn:0:3").unwrap(), Event::Connected(0, 3));
        assert_eq!(Event::parse("ff").unwrap(), Event::FrustrationFree);
        assert_eq!(
            Event::parse("not:cross:1,2").unwrap(),
            Event::Not(Box::new(Event::CrossingEven(vec![1, 2])))
        );
        assert!(Event::parse("bogus").is_err());
    }
}
