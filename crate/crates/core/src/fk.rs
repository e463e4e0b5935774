//! Exact random-cluster (q = 2) enumeration over all `2^|E|` edge sets.

use rayon::prelude::*;

use crate::check::{Bound, Check};
use crate::currents;
use crate::error::{size_check, Error, Result};
use crate::graph::Model;
use crate::spin;
use crate::sum::Neumaier;
use crate::unionfind::RollbackDsu;

/// Edge probabilities `p_b = 1 - exp(-2 beta |J_b|)` and cluster weight `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct FkWeights {
    pub p: Vec<f64>,
    pub q: f64,
}

impl FkWeights {
    pub fn new(model: &Model) -> Self {
        Self {
            p: (0..model.m())
                .map(|b| -(-2.0 * model.k(b).abs()).exp_m1())
                .collect(),
            q: 2.0,
        }
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.q = q;
        self
    }
}

/// An enumerated configuration: open edges and their clusters.
pub struct FkView<'a> {
    pub omega: u64,
    pub dsu: &'a RollbackDsu,
}

struct Setup<'a> {
    model: &'a Model,
    w: FkWeights,
    marked: Vec<bool>,
    wired: bool,
    neg: u64,
}

impl Setup<'_> {
    fn new(model: &Model, q: f64) -> Result<Setup<'_>> {
        if model.has_field() {
            return Err(Error::Precondition(
                "random-cluster enumeration takes zero field".into(),
            ));
        }
        size_check(
            "edges for random-cluster enumeration",
            model.m() as u128,
            model.caps.fk_edges as u128,
        )?;
        let clamped = model.boundary.clamped_mask();
        Ok(Setup {
            model,
            w: FkWeights::new(model).with_q(q),
            marked: (0..model.n()).map(|v| clamped >> v & 1 == 1).collect(),
            wired: clamped != 0,
            neg: model.couplings.negative_mask(),
        })
    }

    fn cluster_weight(&self, d: &RollbackDsu) -> f64 {
        let k = if self.wired {
            d.free_components()
        } else {
            d.components()
        };
        self.w.q.powi(k as i32)
    }

    fn join(&self, d: &mut RollbackDsu, b: usize) {
        let (u, v) = self.model.graph.edge(b);
        d.union(u, v, (self.neg >> b & 1) as u8);
    }

    fn descend<A>(
        &self,
        b: usize,
        omega: u64,
        w: f64,
        d: &mut RollbackDsu,
        acc: &mut A,
        leaf: &(impl Fn(&mut A, &FkView, f64) + Sync),
    ) {
        if b == self.model.m() {
            let view = FkView { omega, dsu: d };
            leaf(acc, &view, w * self.cluster_weight(d));
            return;
        }
        let p = self.w.p[b];
        if p < 1.0 {
            self.descend(b + 1, omega, w * (1.0 - p), d, acc, leaf);
        }
        if p > 0.0 {
            self.join(d, b);
            self.descend(b + 1, omega | 1 << b, w * p, d, acc, leaf);
            d.undo();
        }
    }
}

/// Fold over all edge sets with the random-cluster weight (free boundary,
/// or wired over the clamped vertices when any are present). Prefixes of
/// the first `split` edges are processed in parallel and merged in order.
pub fn fk_fold_split<A: Send>(
    model: &Model,
    q: f64,
    split: usize,
    init: impl Fn() -> A + Sync,
    leaf: impl Fn(&mut A, &FkView, f64) + Sync,
    mut merge: impl FnMut(&mut A, A),
) -> Result<A> {
    let s = Setup::new(model, q)?;
    let depth = split.min(model.m());
    let parts: Vec<A> = (0..1u64 << depth)
        .into_par_iter()
        .map(|prefix| {
            let mut acc = init();
            let mut d = RollbackDsu::new(model.n(), &s.marked);
            let mut w = 1.0;
            // prefix bits read most significant first to keep DFS order
            let mut omega = 0u64;
            for b in 0..depth {
                let open = prefix >> (depth - 1 - b) & 1 == 1;
                let p = s.w.p[b];
                if open {
                    w *= p;
                    omega |= 1 << b;
                    s.join(&mut d, b);
                } else {
                    w *= 1.0 - p;
                }
            }
            if w > 0.0 {
                s.descend(depth, omega, w, &mut d, &mut acc, &leaf);
            }
            acc
        })
        .collect();
    let mut total = init();
    for p in parts {
        merge(&mut total, p);
    }
    Ok(total)
}

pub fn fk_fold<A: Send>(
    model: &Model,
    init: impl Fn() -> A + Sync,
    leaf: impl Fn(&mut A, &FkView, f64) + Sync,
    merge: impl FnMut(&mut A, A),
) -> Result<A> {
    fk_fold_split(model, 2.0, 6, init, leaf, merge)
}

fn sums_split<const N: usize>(
    model: &Model,
    q: f64,
    split: usize,
    f: impl Fn(&FkView) -> [f64; N] + Sync,
) -> Result<[f64; N]> {
    let acc = fk_fold_split(
        model,
        q,
        split,
        || [Neumaier::new(); N],
        |acc, v, w| {
            for (a, x) in acc.iter_mut().zip(f(v)) {
                if x != 0.0 {
                    a.add(w * x);
                }
            }
        },
        |t, p| {
            for (a, b) in t.iter_mut().zip(p.iter()) {
                a.merge(b);
            }
        },
    )?;
    Ok(acc.map(|a| a.value()))
}

/// Weighted sums of `N` functions of the configuration.
pub fn fk_sums<const N: usize>(
    model: &Model,
    f: impl Fn(&FkView) -> [f64; N] + Sync,
) -> Result<[f64; N]> {
    sums_split(model, 2.0, 6, f)
}

/// Same as [`fk_sums`] with explicit cluster weight and split depth.
pub fn fk_sums_with<const N: usize>(
    model: &Model,
    q: f64,
    split: usize,
    f: impl Fn(&FkView) -> [f64; N] + Sync,
) -> Result<[f64; N]> {
    sums_split(model, q, split, f)
}

/// Built-in functions of a random-cluster configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FkFunction {
    Connected(usize, usize),
    SetsConnected(Vec<usize>, Vec<usize>),
    /// `x` joined to a clamped vertex.
    ToBoundary(usize),
    Edge(usize),
    EdgeCount,
    Not(Box<FkFunction>),
}

impl FkFunction {
    /// Parses `conn:x:y`, `sets:a,b:c,d`, `bd:x`, `edge:b`, `edges`, `not:<f>`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Event(s.to_string());
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
        let list = |t: &str| -> Result<Vec<usize>> {
            t.split(',').filter(|x| !x.is_empty()).map(num).collect()
        };
        if let Some(rest) = s.strip_prefix("not:") {
            return Ok(Self::Not(Box::new(Self::parse(rest)?)));
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["conn", x, y] => Ok(Self::Connected(num(x)?, num(y)?)),
            ["sets", a, b] => Ok(Self::SetsConnected(list(a)?, list(b)?)),
            ["bd", x] => Ok(Self::ToBoundary(num(x)?)),
            ["edge", b] => Ok(Self::Edge(num(b)?)),
            ["edges"] => Ok(Self::EdgeCount),
            _ => Err(bad()),
        }
    }

    /// Nondecreasing in the edge set.
    pub fn is_monotone(&self) -> bool {
        !matches!(self, Self::Not(_))
    }

    fn validate(&self, model: &Model) -> Result<()> {
        match self {
            Self::Connected(x, y) => model.check_vertices(&[*x, *y]),
            Self::SetsConnected(a, b) => {
                model.check_vertices(a)?;
                model.check_vertices(b)
            }
            Self::ToBoundary(x) => model.check_vertices(&[*x]),
            Self::Edge(b) => model.check_edges(&[*b]),
            Self::EdgeCount => Ok(()),
            Self::Not(f) => f.validate(model),
        }
    }

    pub fn eval(&self, v: &FkView, clamped: &[usize]) -> f64 {
        let ind = |b: bool| if b { 1.0 } else { 0.0 };
        match self {
            Self::Connected(x, y) => ind(v.dsu.connected(*x, *y)),
            Self::SetsConnected(a, b) => ind(v.dsu.sets_connected(a, b)),
            Self::ToBoundary(x) => ind(v.dsu.touches(*x, clamped)),
            Self::Edge(b) => ind(v.omega >> b & 1 == 1),
            Self::EdgeCount => v.omega.count_ones() as f64,
            Self::Not(f) => 1.0 - f.eval(v, clamped),
        }
    }
}

/// Expectation of `f` under the random-cluster measure; wired over the
/// clamped vertices when the model has any.
pub fn fk_measure_expectation(model: &Model, f: &FkFunction) -> Result<f64> {
    f.validate(model)?;
    let clamped = model.boundary.clamped();
    let [num, z] = fk_sums(model, |v| [f.eval(v, &clamped), 1.0])?;
    Ok(num / z)
}

/// `P_FK(x↔y)` and the double-current `P(x↔y)`; the first squared equals
/// the second.
pub fn fk_rcr_bridge(model: &Model, x: usize, y: usize) -> Result<Check> {
    if !model.couplings.is_ferromagnetic() {
        return Err(Error::Precondition("ferromagnetic couplings required".into()));
    }
    let fk = fk_measure_expectation(model, &FkFunction::Connected(x, y))?;
    let all = if model.m() == 64 {
        u64::MAX
    } else {
        (1u64 << model.m()) - 1
    };
    let g = &model.graph;
    let rcr = currents::double_event_probability(model, all, &[], &[], &|s| {
        currents::support_connected(g, s.support, x, y)
    })?;
    Ok(Check::new("fk squared vs double current", fk * fk, rcr))
}

/// Random-cluster forms of the mixed-sign partition ratio and correlation.
#[derive(Clone, Debug, PartialEq)]
pub struct FkFrustrationReport {
    /// `Z(J)/Z(|J|)` against `P_FK(ω is J-frustration free)`.
    pub partition: Check,
    /// `<sigma_u sigma_v>^J` against `E_FK(sgn_J(u,v;ω) | FF)`.
    pub correlation: Option<Check>,
}

pub fn fk_frustration_adjusted(
    model: &Model,
    uv: Option<(usize, usize)>,
) -> Result<FkFrustrationReport> {
    if !model.boundary.clamped().is_empty() {
        return Err(Error::Precondition(
            "frustration-adjusted clusters use free boundary".into(),
        ));
    }
    let (u, v) = uv.unwrap_or((0, 0));
    model.check_vertices(&[u, v])?;
    let abs = model.with_couplings(model.couplings.abs());
    let e = spin::gibbs(model, &[vec![u, v]])?;
    let lhs = e.z / spin::partition_function(&abs)?;
    let [ff, sgn, z] = fk_sums(model, |view| {
        if view.dsu.frustrated() {
            return [0.0, 0.0, 1.0];
        }
        let s = match view.dsu.relative(u, v) {
            Some(0) => 1.0,
            Some(_) => -1.0,
            None => 0.0,
        };
        [1.0, s, 1.0]
    })?;
    let partition = Check::new("fk frustration-free probability", lhs, ff / z);
    let correlation = uv.map(|_| {
        Check::new("fk frustrated correlation", e.expectations[0], sgn / ff)
    });
    Ok(FkFrustrationReport {
        partition,
        correlation,
    })
}

/// Positive correlation of two monotone functions; the bound's slack is
/// the covariance.
pub fn fkg_spot_check(model: &Model, f: &FkFunction, g: &FkFunction) -> Result<Bound> {
    if !model.couplings.is_ferromagnetic() {
        return Err(Error::Precondition("ferromagnetic couplings required".into()));
    }
    for h in [f, g] {
        if !h.is_monotone() {
            return Err(Error::Event(format!("{h:?} is not a monotone event")));
        }
        h.validate(model)?;
    }
    let clamped = model.boundary.clamped();
    let [ef, eg, efg, z] = fk_sums(model, |v| {
        let (a, b) = (f.eval(v, &clamped), g.eval(v, &clamped));
        [a, b, a * b, 1.0]
    })?;
    Ok(Bound::new("fkg", (ef / z) * (eg / z), efg / z))
}

/// Wired random-cluster forms under a clamped boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct FkBoundaryReport {
    /// `Z^±/Z^+` against `P_FK^+(∂− not connected to ∂+)`; absent without
    /// minus vertices.
    pub partition: Option<Check>,
    /// `<sigma_x>^+` against `P_FK^+(x connected to the boundary)`.
    pub plus: Check,
    /// `<sigma_x>^±` against `P(x↔∂+ | FF) − P(x↔∂− | FF)`.
    pub pm: Option<Check>,
}

pub fn fk_boundary_identities(model: &Model, x: usize) -> Result<FkBoundaryReport> {
    if !model.couplings.is_ferromagnetic() {
        return Err(Error::Precondition("ferromagnetic couplings required".into()));
    }
    model.check_vertices(&[x])?;
    let clamped = model.boundary.clamped();
    if clamped.is_empty() {
        return Err(Error::Precondition("no clamped boundary".into()));
    }
    let mut plus = model.clone();
    plus.boundary = model.boundary.all_plus();
    let (bp, bm) = (model.boundary.plus(), model.boundary.minus());
    let [to_bd, ff, to_p, to_m, z] = fk_sums(&plus, |v| {
        let t = if v.dsu.touches(x, &clamped) { 1.0 } else { 0.0 };
        if v.dsu.sets_connected(&bp, &bm) {
            return [t, 0.0, 0.0, 0.0, 1.0];
        }
        let p = if v.dsu.touches(x, &bp) { 1.0 } else { 0.0 };
        let m = if v.dsu.touches(x, &bm) { 1.0 } else { 0.0 };
        [t, 1.0, p, m, 1.0]
    })?;
    let mp = spin::expectation(&plus, &[x])?;
    let plus_check = Check::new("fk plus magnetization", mp, to_bd / z);
    if bm.is_empty() {
        return Ok(FkBoundaryReport {
            partition: None,
            plus: plus_check,
            pm: None,
        });
    }
    let e = spin::gibbs(model, &[vec![x]])?;
    let zp = spin::partition_function(&plus)?;
    Ok(FkBoundaryReport {
        partition: Some(Check::new("fk boundary partition ratio", e.z / zp, ff / z)),
        plus: plus_check,
        pm: Some(Check::new(
            "fk mixed magnetization",
            e.expectations[0],
            (to_p - to_m) / ff,
        )),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Couplings, Graph};
    use crate::lattice::{generate_box_lattice, BoxBoundary};

    fn triangle(k: f64) -> Model {
        Model::uniform(Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap(), k).unwrap()
    }

    #[test]
    fn single_edge_connection() {
        let m = Model::uniform(Graph::from_edges(2, &[(0, 1)]).unwrap(), 0.8).unwrap();
        let p = fk_measure_expectation(&m, &FkFunction::Connected(0, 1)).unwrap();
        assert!((p - 0.8f64.tanh()).abs() < 1e-15);
        let b = fk_rcr_bridge(&m, 0, 1).unwrap();
        assert!(b.passes(1e-14));
    }

    #[test]
    fn triangle_connection() {
        let p = fk_measure_expectation(&triangle(0.5f64.atanh()), &FkFunction::Connected(1, 2))
            .unwrap();
        assert!((p - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn beta_zero_no_connections() {
        let p = fk_measure_expectation(&triangle(0.0), &FkFunction::Connected(0, 2)).unwrap();
        assert_eq!(p, 0.0);
    }

    #[test]
    fn frustration_adjusted_triangle() {
        let k = 0.5f64.atanh();
        let m = triangle(k).with_couplings(Couplings::new(vec![1.0, 1.0, -1.0], k));
        let r = fk_frustration_adjusted(&m, Some((0, 2))).unwrap();
        assert!((r.partition.lhs - 7.0 / 9.0).abs() < 1e-14);
        assert!(r.partition.passes(1e-12));
        assert!(r.correlation.unwrap().passes(1e-12));
    }

    #[test]
    fn single_negative_edge() {
        let m = Model::new(
            Graph::from_edges(2, &[(0, 1)]).unwrap(),
            Couplings::new(vec![-1.0], 0.7),
        )
        .unwrap();
        let r = fk_frustration_adjusted(&m, Some((0, 1))).unwrap();
        let c = r.correlation.unwrap();
        assert!((c.rhs + 0.7f64.tanh()).abs() < 1e-15);
        assert_eq!(r.partition.rhs, 1.0);
    }

    #[test]
    fn fkg_rejects_non_monotone() {
        let m = triangle(0.4);
        let f = FkFunction::parse("not:conn:0:1").unwrap();
        assert!(matches!(
            fkg_spot_check(&m, &f, &FkFunction::EdgeCount),
            Err(Error::Event(_))
        ));
        let c = fkg_spot_check(&m, &FkFunction::Connected(0, 1), &FkFunction::Connected(1, 2))
            .unwrap();
        assert!(c.slack() >= -1e-12);
    }

    #[test]
    fn split_independent() {
        let lat = generate_box_lattice(2, &[3, 3], BoxBoundary::Free).unwrap();
        let m = lat.model(0.45).unwrap();
        let f = |v: &FkView| [1.0, v.omega.count_ones() as f64];
        let a = fk_sums_with(&m, 2.0, 0, f).unwrap();
        for split in [1, 3, 7, 12] {
            let b = fk_sums_with(&m, 2.0, split, f).unwrap();
            for i in 0..2 {
                assert!((a[i] - b[i]).abs() <= 1e-13 * a[i].abs());
            }
        }
    }

    #[test]
    fn wired_boundary_identities() {
        let lat = generate_box_lattice(2, &[3, 4], BoxBoundary::PlusMinus).unwrap();
        let m = lat.model(0.6).unwrap();
        for x in 0..m.n() {
            let r = fk_boundary_identities(&m, x).unwrap();
            assert!(r.plus.passes(1e-12), "{:?}", r.plus);
            assert!(r.partition.unwrap().passes(1e-12));
            assert!(r.pm.unwrap().passes(1e-12));
        }
    }
}
