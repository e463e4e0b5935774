//! Random-current identities, each evaluated against the spin oracle.

use crate::check::Check;
use crate::error::{Error, Result};
use crate::graph::{mask_of, parity_mask, Model};
use crate::spin;

use super::{
    crossing_even, double_sums, effective_negative_mask, pairable, support_dsu, DoubleCurrentState,
    SourceConstraint,
};

/// Function of the summed current used in switching checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupportFn {
    One,
    SupportSize,
}

impl SupportFn {
    pub fn eval(self, s: &DoubleCurrentState) -> f64 {
        match self {
            Self::One => 1.0,
            Self::SupportSize => s.support.count_ones() as f64,
        }
    }
}

fn all_edges(model: &Model) -> u64 {
    if model.m() == 64 {
        u64::MAX
    } else {
        (1u64 << model.m()) - 1
    }
}

fn ratio(num: f64, den: f64, what: &str) -> Result<f64> {
    if den == 0.0 {
        Err(Error::Undefined(format!("{what}: vanishing normalization")))
    } else {
        Ok(num / den)
    }
}

/// Probability of `event` for two independent currents with sources `a1`
/// (on all edges) and `a2` (on the `shared` edges), under `|J|` weights.
pub fn double_event_probability(
    model: &Model,
    shared: u64,
    a1: &[usize],
    a2: &[usize],
    event: &(dyn Fn(&DoubleCurrentState) -> bool + Sync),
) -> Result<f64> {
    model.check_vertices(a1)?;
    model.check_vertices(a2)?;
    let sc1 = SourceConstraint::for_model(model, a1);
    let sc2 = SourceConstraint::for_model(model, a2);
    let [num, den] = double_sums(model, shared, &sc1, &sc2, |s| {
        [if event(s) { 1.0 } else { 0.0 }, 1.0]
    })?;
    ratio(num, den, "double-current probability")
}

/// Both sides of the switching lemma for sources `a1`, `a2`, switched set
/// `b` and weight function `f` of the summed current.
pub fn verify_switching(
    model: &Model,
    shared: u64,
    a1: &[usize],
    a2: &[usize],
    b: &[usize],
    f: SupportFn,
) -> Result<Check> {
    if !model.boundary.clamped().is_empty() {
        return Err(Error::Precondition(
            "switching is checked with exact sources only".into(),
        ));
    }
    for s in [a1, a2, b] {
        model.check_vertices(s)?;
    }
    let g = &model.graph;
    let side = |x: &[usize], y: &[usize]| -> Result<f64> {
        let sc1 = SourceConstraint::Exact(x.to_vec());
        let sc2 = SourceConstraint::Exact(y.to_vec());
        let [v] = double_sums(model, shared, &sc1, &sc2, |s| {
            if pairable(g, s.support & shared, b) {
                [f.eval(s)]
            } else {
                [0.0]
            }
        })?;
        Ok(v)
    };
    let d = |x: &[usize]| -> Vec<usize> {
        crate::graph::mask_to_vec(parity_mask(x) ^ parity_mask(b))
    };
    Ok(Check::new(
        "switching",
        side(a1, a2)?,
        side(&d(a1), &d(a2))?,
    ))
}

/// `<sigma_x sigma_y>^2` against the double-current connection probability.
pub fn two_point_connection(model: &Model, x: usize, y: usize) -> Result<Check> {
    model.check_vertices(&[x, y])?;
    let c = spin::expectation(model, &[x, y])?;
    let g = &model.graph;
    let p = double_event_probability(model, all_edges(model), &[], &[], &|s| {
        support_dsu(g, s.support, 0).connected(x, y)
    })?;
    Ok(Check::new("two-point connection", c * c, p))
}

/// `<sigma_A><sigma_B>/<sigma_A sigma_B>` against `E^{AΔB,∅}(1_A[n1+n2])`.
pub fn source_overlap_ratio(model: &Model, a: &[usize], b: &[usize]) -> Result<Check> {
    model.check_vertices(a)?;
    model.check_vertices(b)?;
    let ab: Vec<usize> = a.iter().chain(b).copied().collect();
    let e = spin::gibbs(model, &[a.to_vec(), b.to_vec(), ab])?.expectations;
    if e[2].abs() < 1e-300 {
        return Err(Error::Undefined(
            "correlation of the symmetric difference vanishes".into(),
        ));
    }
    let lhs = e[0] * e[1] / e[2];
    let delta = crate::graph::mask_to_vec(parity_mask(a) ^ parity_mask(b));
    let g = &model.graph;
    let rhs = double_event_probability(model, all_edges(model), &delta, &[], &|s| {
        pairable(g, s.support, a)
    })?;
    Ok(Check::new("source overlap ratio", lhs, rhs))
}

/// The two current forms of the fourth Ursell function.
pub fn ursell4_via_currents(model: &Model, x: [usize; 4]) -> Result<(f64, f64)> {
    model.check_vertices(&x)?;
    let g = &model.graph;
    let all = all_edges(model);
    let s12 = spin::expectation(model, &[x[0], x[1]])?;
    let s34 = spin::expectation(model, &[x[2], x[3]])?;
    let s4 = spin::expectation(model, &x)?;
    let a = if s12 * s34 == 0.0 {
        0.0
    } else {
        let p = double_event_probability(model, all, &[x[0], x[1]], &[x[2], x[3]], &|s| {
            support_dsu(g, s.support, 0).connected(x[0], x[2])
        })?;
        -2.0 * s12 * s34 * p
    };
    let b = if s4 == 0.0 {
        0.0
    } else {
        let p = double_event_probability(model, all, &x, &[], &|s| {
            let mut d = support_dsu(g, s.support, 0);
            (1..4).all(|i| d.connected(x[0], x[i]))
        })?;
        -2.0 * s4 * p
    };
    Ok((a, b))
}

/// `Z(J)/Z(|J|)` against the probability that the summed `|J|` currents
/// are frustration free.
pub fn frustrated_partition_ratio(model: &Model) -> Result<Check> {
    let abs = model.with_couplings(model.couplings.abs());
    let lhs = spin::partition_function(model)? / spin::partition_function(&abs)?;
    let neg = effective_negative_mask(model);
    let g = &model.graph;
    let rhs = double_event_probability(model, all_edges(model), &[], &[], &|s| {
        !support_dsu(g, s.support, neg).frustrated
    })?;
    Ok(Check::new("frustrated partition ratio", lhs, rhs))
}

/// `<sigma_u sigma_v>^J <sigma_u sigma_v>^{|J|}` against the conditional
/// expectation of the relative sign given frustration freedom.
pub fn frustrated_correlation(model: &Model, u: usize, v: usize) -> Result<Check> {
    model.check_vertices(&[u, v])?;
    let abs = model.with_couplings(model.couplings.abs());
    let lhs = spin::expectation(model, &[u, v])? * spin::expectation(&abs, &[u, v])?;
    let neg = effective_negative_mask(model);
    let g = &model.graph;
    let sc = SourceConstraint::for_model(model, &[]);
    let [num, den] = double_sums(model, all_edges(model), &sc, &sc, |s| {
        let mut d = support_dsu(g, s.support, neg);
        if d.frustrated {
            return [0.0, 0.0];
        }
        let sgn = match d.relative(u, v) {
            Some(0) => 1.0,
            Some(_) => -1.0,
            None => 0.0,
        };
        [sgn, 1.0]
    })?;
    Ok(Check::new(
        "frustrated correlation",
        lhs,
        ratio(num, den, "frustration-free probability")?,
    ))
}

fn plus_model(model: &Model) -> Model {
    let mut m = model.clone();
    m.boundary = model.boundary.all_plus();
    m
}

fn require_ferro(model: &Model) -> Result<()> {
    if model.couplings.is_ferromagnetic() {
        Ok(())
    } else {
        Err(Error::Precondition("ferromagnetic couplings required".into()))
    }
}

/// `Z^±/Z^+` against `P^{∅,∅;+}(∂− not connected to ∂+)`.
pub fn boundary_partition_ratio(model: &Model) -> Result<Check> {
    require_ferro(model)?;
    let plus = plus_model(model);
    let lhs = spin::partition_function(model)? / spin::partition_function(&plus)?;
    let (pm, mm) = (mask_of(&model.boundary.plus()), mask_of(&model.boundary.minus()));
    let n = model.n();
    let g = &model.graph;
    let rhs = double_event_probability(&plus, all_edges(model), &[], &[], &|s| {
        !support_dsu(g, s.support, 0).masks_connected(pm, mm, n)
    })?;
    Ok(Check::new("boundary partition ratio", lhs, rhs))
}

/// Magnetization identities under clamped boundaries.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryMagnetization {
    /// `(<sigma_x>^+)^2` against `P^{∅,∅;+}(x connected to the boundary)`.
    pub plus: Check,
    /// `<sigma_x>^± <sigma_x>^+` against `P(x↔∂+ | FF) − P(x↔∂− | FF)`.
    /// Absent when no vertex is clamped minus.
    pub pm: Option<Check>,
}

pub fn boundary_magnetization(model: &Model, x: usize) -> Result<BoundaryMagnetization> {
    require_ferro(model)?;
    model.check_vertices(&[x])?;
    if model.boundary.clamped().is_empty() {
        return Err(Error::Precondition("no clamped boundary".into()));
    }
    let plus = plus_model(model);
    let mp = spin::expectation(&plus, &[x])?;
    let n = model.n();
    let g = &model.graph;
    let all = all_edges(model);
    let sc = SourceConstraint::for_model(&plus, &[]);
    let clamped = model.boundary.clamped_mask();
    let (bp, bm) = (mask_of(&model.boundary.plus()), mask_of(&model.boundary.minus()));
    let xm = 1u64 << x;
    let [to_bd, ff, to_p, to_m, z] = double_sums(&plus, all, &sc, &sc, |s| {
        let mut d = support_dsu(g, s.support, 0);
        let t = if d.masks_connected(xm, clamped, n) { 1.0 } else { 0.0 };
        if bm != 0 && d.masks_connected(bp, bm, n) {
            return [t, 0.0, 0.0, 0.0, 1.0];
        }
        let p = if d.masks_connected(xm, bp, n) { 1.0 } else { 0.0 };
        let m = if d.masks_connected(xm, bm, n) { 1.0 } else { 0.0 };
        [t, 1.0, p, m, 1.0]
    })?;
    let plus_check = Check::new("plus magnetization squared", mp * mp, to_bd / z);
    let pm = if bm == 0 {
        None
    } else {
        let mpm = spin::expectation(model, &[x])?;
        Some(Check::new(
            "mixed magnetization product",
            mpm * mp,
            ratio(to_p - to_m, ff, "frustration-free probability")?,
        ))
    };
    Ok(BoundaryMagnetization {
        plus: plus_check,
        pm,
    })
}

/// Disorder operator `<T_F>` computed three ways.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderReport {
    /// Spin-oracle `Z(T_F J)/Z(J)`.
    pub oracle: f64,
    /// Probability that every cycle of the summed support crosses `F` evenly.
    pub crossing: f64,
    /// Frustration-free probability for the flipped couplings.
    pub via_frustration: f64,
}

impl DisorderReport {
    pub fn check(&self) -> Check {
        Check::new("disorder operator", self.oracle, self.crossing)
    }
}

pub fn disorder_expectation(model: &Model, flips: &[usize]) -> Result<DisorderReport> {
    require_ferro(model)?;
    model.check_edges(flips)?;
    let flipped = model.with_couplings(model.couplings.flipped(flips));
    let oracle = spin::partition_function(&flipped)? / spin::partition_function(model)?;
    let fm = mask_of(flips);
    let g = &model.graph;
    let crossing = double_event_probability(model, all_edges(model), &[], &[], &|s| {
        crossing_even(g, s.support, fm)
    })?;
    let via_frustration = frustrated_partition_ratio(&flipped)?.rhs;
    Ok(DisorderReport {
        oracle,
        crossing,
        via_frustration,
    })
}

/// `-ln(Z^±/Z^+) / area` from the current representation.
pub fn surface_tension_ratio(model: &Model, area: usize) -> Result<f64> {
    if area == 0 {
        return Err(Error::Domain("interface area must be positive".into()));
    }
    if model.boundary.minus().is_empty() || model.boundary.plus().is_empty() {
        return Err(Error::Precondition(
            "surface tension needs both plus and minus boundary vertices".into(),
        ));
    }
    let r = boundary_partition_ratio(model)?.rhs;
    if r <= 0.0 {
        return Err(Error::Undefined("boundary ratio vanishes".into()));
    }
    Ok(-r.ln() / area as f64)
}

/// Surface tension of a generated box with a ± split on its last axis;
/// the area is the cross-section perpendicular to that axis.
pub fn box_surface_tension(lat: &crate::lattice::BoxLattice, beta: f64) -> Result<f64> {
    let area: usize = lat.sides[..lat.sides.len() - 1].iter().product();
    surface_tension_ratio(&lat.model(beta)?, area)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{BoundarySpec, Couplings, Designation, Graph};
    use crate::lattice::{generate_box_lattice, BoxBoundary};

    fn triangle(k: f64) -> Model {
        Model::uniform(Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap(), k).unwrap()
    }

    #[test]
    fn edge_connection_is_tanh_squared() {
        let m = Model::uniform(Graph::from_edges(2, &[(0, 1)]).unwrap(), 0.7).unwrap();
        let c = two_point_connection(&m, 0, 1).unwrap();
        assert!((c.rhs - 0.7f64.tanh().powi(2)).abs() < 1e-15);
        assert!(c.passes(1e-14));
    }

    #[test]
    fn triangle_connection() {
        let c = two_point_connection(&triangle(0.5f64.atanh()), 1, 2).unwrap();
        assert!((c.rhs - 4.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn switching_single_edge() {
        let m = Model::uniform(Graph::from_edges(2, &[(0, 1)]).unwrap(), 0.8).unwrap();
        let c = verify_switching(&m, 1, &[0, 1], &[], &[0, 1], SupportFn::One).unwrap();
        let want = 0.8f64.sinh() * 0.8f64.cosh();
        assert!((c.lhs - want).abs() < 1e-14 && (c.rhs - want).abs() < 1e-14);
    }

    #[test]
    fn overlap_triangle() {
        let c = source_overlap_ratio(&triangle(0.5f64.atanh()), &[0, 1], &[1, 2]).unwrap();
        assert!((c.lhs - 2.0 / 3.0).abs() < 1e-14);
        assert!(c.passes(1e-12));
    }

    #[test]
    fn ursell_forms_agree() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let m = Model::uniform(g, 0.4).unwrap();
        let u = spin::ursell4(&m, [0, 1, 2, 3]).unwrap();
        let (a, b) = ursell4_via_currents(&m, [0, 1, 2, 3]).unwrap();
        assert!((a - u).abs() < 1e-12 && (b - u).abs() < 1e-12);
    }

    #[test]
    fn frustrated_triangle() {
        let t = 0.5f64;
        let m = triangle(t.atanh());
        let m = m.with_couplings(Couplings::new(vec![1.0, 1.0, -1.0], t.atanh()));
        let c = frustrated_partition_ratio(&m).unwrap();
        assert!((c.lhs - 7.0 / 9.0).abs() < 1e-14);
        assert!(c.passes(1e-12));
        let r = frustrated_correlation(&m, 0, 2).unwrap();
        assert!(r.passes(1e-12), "{r:?}");
    }

    #[test]
    fn chain_boundary_ratio() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let b = BoundarySpec::from_pairs(&[(0, Designation::Plus), (2, Designation::Minus)]);
        let m = Model::uniform(g, 0.6).unwrap().with_boundary(b).unwrap();
        let c = boundary_partition_ratio(&m).unwrap();
        let t2 = 0.6f64.tanh().powi(2);
        assert!((c.lhs - (1.0 - t2) / (1.0 + t2)).abs() < 1e-14);
        assert!(c.passes(1e-12));
        let bm = boundary_magnetization(&m, 1).unwrap();
        assert!(bm.plus.passes(1e-12), "{:?}", bm.plus);
        assert!(bm.pm.unwrap().passes(1e-12));
    }

    #[test]
    fn box_boundary_identities() {
        let lat = generate_box_lattice(2, &[3, 4], BoxBoundary::PlusMinus).unwrap();
        let m = lat.model(0.6).unwrap();
        assert!(boundary_partition_ratio(&m).unwrap().passes(1e-12));
        for x in 0..m.n() {
            let bm = boundary_magnetization(&m, x).unwrap();
            assert!(bm.plus.passes(1e-12), "{x} {:?}", bm.plus);
            assert!(bm.pm.unwrap().passes(1e-12));
        }
    }

    #[test]
    fn disorder_paths_agree_exactly() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let m = Model::uniform(g, 0.5f64.atanh()).unwrap();
        let r = disorder_expectation(&m, &[1]).unwrap();
        assert_eq!(r.crossing, r.via_frustration);
        let t4 = 0.5f64.powi(4);
        assert!((r.oracle - (1.0 - t4) / (1.0 + t4)).abs() < 1e-14);
        assert!(r.check().passes(1e-12));
        let star = disorder_expectation(&m, &[0, 3]).unwrap();
        assert!((star.crossing - 1.0).abs() < 1e-14);
    }

    #[test]
    fn surface_tension_zero_at_infinite_temperature() {
        let lat = generate_box_lattice(2, &[3, 3], BoxBoundary::PlusMinus).unwrap();
        assert_eq!(box_surface_tension(&lat, 0.0).unwrap(), 0.0);
        assert!(box_surface_tension(&lat, 0.5).unwrap() > 0.0);
    }
}
