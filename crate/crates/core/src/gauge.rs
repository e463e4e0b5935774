//! Z2 lattice gauge model: plaquette-chain sums, Wilson loops, the duality
//! with the Ising model on the dual graph and the deconfinement chain.

use crate::check::{Bound, Check};
use crate::complex::{build_dual_complex, DualComplex, PlaquetteComplex};
use crate::error::{size_check, Error, Result};
use crate::fk::{fk_measure_expectation, FkFunction};
use crate::graph::{Couplings, Model};
use crate::lattice::BoxLattice;
use crate::spin;
use crate::sum::Neumaier;

/// Closed edge loop with a spanning plaquette set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WilsonLoop {
    /// Cyclic order when the loop is a simple cycle, ascending otherwise.
    pub edges: Vec<usize>,
    pub surface: Vec<usize>,
    pub side: Option<usize>,
}

impl WilsonLoop {
    /// Boundary of the `side × side` square with lower corner `corner`
    /// spanning `axes`.
    pub fn square(c: &PlaquetteComplex, corner: &[i64], axes: (usize, usize), side: usize) -> Result<Self> {
        if side == 0 {
            return Err(Error::Domain("loop side must be positive".into()));
        }
        let (a, b) = axes;
        let mut surface = Vec::with_capacity(side * side);
        for i in 0..side as i64 {
            for j in 0..side as i64 {
                let mut x = corner.to_vec();
                if x.len() != c.dim || a >= c.dim || b >= c.dim {
                    return Err(Error::Domain("corner or axes do not fit the complex".into()));
                }
                x[a] += i;
                x[b] += j;
                let p = c
                    .plaquette_at(&x, a, b)
                    .ok_or_else(|| Error::Domain("square leaves the box".into()))?;
                surface.push(p);
            }
        }
        surface.sort_unstable();
        let mut l = Self::from_surface(c, &surface)?;
        l.side = Some(side);
        Ok(l)
    }

    pub fn from_surface(c: &PlaquetteComplex, surface: &[usize]) -> Result<Self> {
        let edges = c.boundary(surface)?;
        Ok(Self {
            edges: cyclic_order(c, &edges).unwrap_or(edges),
            surface: surface.to_vec(),
            side: None,
        })
    }

    /// A loop given only by its edges; the surface is left empty.
    pub fn from_edges(c: &PlaquetteComplex, edges: &[usize]) -> Result<Self> {
        check_loop(c, edges)?;
        Ok(Self {
            edges: cyclic_order(c, edges).unwrap_or_else(|| edges.to_vec()),
            surface: Vec::new(),
            side: None,
        })
    }
}

fn cyclic_order(c: &PlaquetteComplex, edges: &[usize]) -> Option<Vec<usize>> {
    let &first = edges.first()?;
    let mut left: Vec<usize> = edges[1..].to_vec();
    let mut out = vec![first];
    let (start, mut at) = c.edges[first];
    while !left.is_empty() {
        let i = left.iter().position(|&b| {
            let (u, v) = c.edges[b];
            u == at || v == at
        })?;
        let b = left.swap_remove(i);
        let (u, v) = c.edges[b];
        at = if u == at { v } else { u };
        out.push(b);
    }
    (at == start).then_some(out)
}

fn check_loop(c: &PlaquetteComplex, edges: &[usize]) -> Result<()> {
    if let Some(&b) = edges.iter().find(|&&b| b >= c.num_edges()) {
        return Err(Error::Graph(format!("edge {b} out of range")));
    }
    let mut seen = edges.to_vec();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Constraint("loop repeats an edge".into()));
    }
    let open = c.edge_boundary(edges);
    if !open.is_empty() {
        return Err(Error::Constraint(format!("loop not closed at vertices {open:?}")));
    }
    Ok(())
}

fn edge_bits(edges: &[usize]) -> u128 {
    edges.iter().fold(0u128, |m, &b| m | 1u128 << b)
}

/// Σ over plaquette sets `S` with `∂S = target` of `sinh^|S| cosh^(|P|-|S|)`.
fn chain_sum(c: &PlaquetteComplex, beta: f64, target: &[usize]) -> Result<f64> {
    let np = c.num_plaquettes();
    size_check("plaquettes", np as u128, c.caps.plaquettes as u128)?;
    size_check("complex edges", c.num_edges() as u128, 128)?;
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::Domain(format!("beta = {beta}")));
    }
    let target = edge_bits(target);
    let pm: Vec<u128> = c.plaquettes.iter().map(|p| edge_bits(&p.edges)).collect();
    let mut finish = vec![0u128; np];
    let mut covered = 0u128;
    for (b, ps) in c.edge_plaquettes.iter().enumerate() {
        if let Some(&last) = ps.iter().max() {
            finish[last] |= 1u128 << b;
            covered |= 1u128 << b;
        }
    }
    if target & !covered != 0 {
        return Ok(0.0);
    }
    let (ch, sh) = (beta.cosh(), beta.sinh());

    struct Walk<'a> {
        pm: &'a [u128],
        finish: &'a [u128],
        target: u128,
        ch: f64,
        sh: f64,
        acc: Neumaier,
    }
    fn go(w: &mut Walk, i: usize, parity: u128, weight: f64) {
        if i == w.pm.len() {
            w.acc.add(weight);
            return;
        }
        for (odd, f) in [(false, w.ch), (true, w.sh)] {
            let p = if odd { parity ^ w.pm[i] } else { parity };
            if (p ^ w.target) & w.finish[i] == 0 && f != 0.0 {
                go(w, i + 1, p, weight * f);
            }
        }
    }
    let mut w = Walk {
        pm: &pm,
        finish: &finish,
        target,
        ch,
        sh,
        acc: Neumaier::new(),
    };
    go(&mut w, 0, 0, 1.0);
    Ok(w.acc.value())
}

/// Gauge model partition function normalized by `2^|E|`.
pub fn lgm_partition(c: &PlaquetteComplex, beta: f64) -> Result<f64> {
    chain_sum(c, beta, &[])
}

pub fn wilson_expectation(c: &PlaquetteComplex, beta: f64, l: &WilsonLoop) -> Result<f64> {
    check_loop(c, &l.edges)?;
    Ok(chain_sum(c, beta, &l.edges)? / chain_sum(c, beta, &[])?)
}

/// Brute force over gauge fields. Returns `(Z, <∏_{b∈γ} A_b>)`. Each field
/// is first acted on by the vertex flips `tau` when given.
pub fn gauge_field_oracle(
    c: &PlaquetteComplex,
    beta: f64,
    loop_edges: &[usize],
    tau: Option<&[bool]>,
) -> Result<(f64, f64)> {
    let ne = c.num_edges();
    size_check("gauge-field edges", ne as u128, c.caps.gauge_edges as u128)?;
    if let Some(t) = tau {
        if t.len() != c.num_vertices() {
            return Err(Error::Graph("gauge transform length differs from vertex count".into()));
        }
    }
    let pm: Vec<u64> = c
        .plaquettes
        .iter()
        .map(|p| p.edges.iter().fold(0u64, |m, &b| m | 1 << b))
        .collect();
    let lm = loop_edges.iter().fold(0u64, |m, &b| m | 1 << b);
    let flip = tau.map_or(0u64, |t| {
        (0..ne).filter(|&b| t[c.edges[b].0] != t[c.edges[b].1]).fold(0, |m, b| m | 1 << b)
    });
    // histogram by (#frustrated plaquettes, loop parity)
    let np = pm.len();
    let mut hist = vec![[0u64; 2]; np + 1];
    for a in 0u64..1 << ne {
        let a = a ^ flip;
        let k = pm.iter().filter(|&&m| (a & m).count_ones() & 1 == 1).count();
        hist[k][((a & lm).count_ones() & 1) as usize] += 1;
    }
    let (mut z, mut w) = (Neumaier::new(), Neumaier::new());
    let scale = (-(ne as f64) * std::f64::consts::LN_2).exp();
    for (k, h) in hist.iter().enumerate() {
        let e = (beta * (np as f64 - 2.0 * k as f64)).exp() * scale;
        z.add(e * (h[0] + h[1]) as f64);
        w.add(e * (h[0] as f64 - h[1] as f64));
    }
    Ok((z.value(), w.value() / z.value()))
}

/// `β* = ½ ln coth β`, evaluated as `atanh(e^{-2β})`.
pub fn dual_beta(beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("dual coupling needs beta > 0, got {beta}")));
    }
    Ok((-2.0 * beta).exp().atanh())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualityReport {
    pub beta_star: Option<f64>,
    /// `Z_LGM` against `2^{|V*|-1} (cosh β sinh β)^{|E*|/2} Z_Ising(Λ*, β*)`.
    pub partition: Check,
    /// Wilson loop of `∂S` against the disorder expectation of `S` on the
    /// dual; absent at `β = 0`.
    pub wilson: Option<Check>,
}

fn dual_model(dual: &DualComplex, beta_star: f64, c: &PlaquetteComplex) -> Result<Model> {
    let m = dual.graph.num_edges();
    Ok(Model::new(dual.graph.clone(), Couplings::uniform(m, 1.0, beta_star))?.with_caps(c.caps))
}

/// Both halves of the 3D duality for the plaquette surface `surface`.
/// At `β = 0` the dual coupling is infinite and the partition identity is
/// reported against its limit 1.
pub fn verify_duality(c: &PlaquetteComplex, beta: f64, surface: &[usize]) -> Result<DualityReport> {
    let dual = build_dual_complex(c)?;
    let z = lgm_partition(c, beta)?;
    if beta == 0.0 {
        return Ok(DualityReport {
            beta_star: None,
            partition: Check::new("lgm duality", z, 1.0),
            wilson: None,
        });
    }
    let bs = dual_beta(beta)?;
    let model = dual_model(&dual, bs, c)?;
    let zi = spin::partition_function(&model)?;
    let nv = dual.graph.num_vertices() as i32;
    let ne = dual.graph.num_edges() as f64;
    let rhs = 2f64.powi(nv - 1) * (beta.cosh() * beta.sinh()).powf(ne / 2.0) * zi;

    let l = WilsonLoop::from_surface(c, surface)?;
    let w = wilson_expectation(c, beta, &l)?;
    let t = match crate::currents::disorder_expectation(&model, surface) {
        Ok(r) => r.crossing,
        Err(Error::Size { .. }) => {
            spin::partition_function(&model.with_couplings(model.couplings.flipped(surface)))? / zi
        }
        Err(e) => return Err(e),
    };
    Ok(DualityReport {
        beta_star: Some(bs),
        partition: Check::new("lgm duality", z, rhs),
        wilson: Some(Check::new("wilson vs disorder", w, t)),
    })
}

/// `g(R)`: the positive root of `1 - R = e^{-gR}`, so that
/// `1 - r ≥ e^{-g r}` on `(0, R]`. The limit 1 is returned at `R = 0`.
pub fn g_of_r(r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::Domain(format!("R = {r} outside [0, 1)")));
    }
    if r == 0.0 {
        return Ok(1.0);
    }
    let f = |g: f64| (-g * r).exp() - (1.0 - r);
    let (mut lo, mut hi) = (1e-12, 1e3);
    if f(hi) > 0.0 {
        return Err(Error::Domain(format!("root for R = {r} exceeds the bracket")));
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Flip set of a dual surface and the two sides it separates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeconfinementGeometry {
    pub flips: Vec<usize>,
    pub upper: Vec<usize>,
    pub lower: Vec<usize>,
}

impl DeconfinementGeometry {
    fn new(flips: Vec<usize>, mut upper: Vec<usize>, mut lower: Vec<usize>) -> Self {
        upper.sort_unstable();
        upper.dedup();
        lower.sort_unstable();
        lower.dedup();
        Self { flips, upper, lower }
    }

    /// Dual edges crossing `surface` in a 3D box.
    pub fn from_surface(dual: &DualComplex, surface: &[usize]) -> Self {
        let lower = surface.iter().map(|&p| dual.sides[p].0).collect();
        let upper = surface.iter().map(|&p| dual.sides[p].1).collect();
        Self::new(surface.to_vec(), upper, lower)
    }

    /// A straight cut of `ell` edges across the middle of a 2D box along
    /// its first axis, centred on the second.
    pub fn box_segment(lat: &BoxLattice, ell: usize) -> Result<Self> {
        if lat.dim() != 2 {
            return Err(Error::Domain("segment geometry needs a 2D box".into()));
        }
        let (rows, cols) = (lat.sides[0], lat.sides[1]);
        if rows < 2 || ell == 0 || ell > cols {
            return Err(Error::Domain(format!("cannot cut {ell} edges in a {rows}×{cols} box")));
        }
        let r = ((rows - 1) / 2) as i64;
        let start = ((cols - ell) / 2) as i64;
        let (mut flips, mut upper, mut lower) = (Vec::new(), Vec::new(), Vec::new());
        for j in start..start + ell as i64 {
            let (lo, up) = (lat.vertex_at(&[r, j]), lat.vertex_at(&[r + 1, j]));
            let (lo, up) = lo.zip(up).ok_or_else(|| Error::Domain("cut leaves the box".into()))?;
            let b = *lat
                .graph
                .edges_between(lo, up)
                .first()
                .ok_or_else(|| Error::Graph("missing cut edge".into()))?;
            flips.push(b);
            upper.push(up);
            lower.push(lo);
        }
        Ok(Self::new(flips, upper, lower))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeconfinementReport {
    /// `<T_S>` on the dual.
    pub w: f64,
    /// FK probability that the two sides are not joined.
    pub b1: f64,
    /// `∏ (1 - <σ_u σ_v>)` over upper × lower.
    pub b2: f64,
    /// `exp(-g(R) Σ <σ_u σ_v>)`.
    pub b3: f64,
    pub r: f64,
    pub g: f64,
    pub chain: [Bound; 3],
}

impl DeconfinementReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.chain.iter().all(|b| b.passes(tol))
    }
}

/// The chain `W ≥ B1 ≥ B2 ≥ B3` on a ferromagnetic free-boundary model.
pub fn deconfinement_chain(model: &Model, geom: &DeconfinementGeometry) -> Result<DeconfinementReport> {
    if !model.couplings.is_ferromagnetic() || model.has_field() || !model.boundary.clamped().is_empty() {
        return Err(Error::Precondition(
            "ferromagnetic couplings, zero field and free boundary required".into(),
        ));
    }
    model.check_edges(&geom.flips)?;
    model.check_vertices(&geom.upper)?;
    model.check_vertices(&geom.lower)?;
    let z = spin::partition_function(model)?;
    let w = spin::partition_function(&model.with_couplings(model.couplings.flipped(&geom.flips)))? / z;
    let b1 = fk_measure_expectation(
        model,
        &FkFunction::Not(Box::new(FkFunction::SetsConnected(geom.upper.clone(), geom.lower.clone()))),
    )?;
    let pairs: Vec<Vec<usize>> = geom
        .upper
        .iter()
        .flat_map(|&u| geom.lower.iter().map(move |&v| vec![u, v]))
        .collect();
    let corr = spin::gibbs(model, &pairs)?.expectations;
    let r = corr.iter().copied().fold(0.0, f64::max);
    let b2 = corr.iter().map(|c| 1.0 - c).product::<f64>();
    let (g, b3) = if r >= 1.0 {
        (f64::INFINITY, 0.0)
    } else {
        let g = g_of_r(r)?;
        (g, (-g * corr.iter().sum::<f64>()).exp())
    };
    Ok(DeconfinementReport {
        w,
        b1,
        b2,
        b3,
        r,
        g,
        chain: [
            Bound::new("W >= B1", b1, w),
            Bound::new("B1 >= B2", b2, b1),
            Bound::new("B2 >= B3", b3, b2),
        ],
    })
}

/// Deconfinement chain for the loop's spanning surface on the dual of a
/// 3D box at `β*`.
pub fn deconfinement_bound_report(c: &PlaquetteComplex, beta: f64, l: &WilsonLoop) -> Result<DeconfinementReport> {
    if l.surface.is_empty() {
        return Err(Error::Precondition("loop carries no spanning surface".into()));
    }
    let dual = build_dual_complex(c)?;
    let model = dual_model(&dual, dual_beta(beta)?, c)?;
    deconfinement_chain(&model, &DeconfinementGeometry::from_surface(&dual, &l.surface))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{generate_box_lattice, BoxBoundary};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cube_face_wilson(b: f64) -> f64 {
        let (c, s) = (b.cosh(), b.sinh());
        (c.powi(5) * s + s.powi(5) * c) / (c.powi(6) + s.powi(6))
    }

    #[test]
    fn closed_forms() {
        let cube = PlaquetteComplex::new(3, &[1, 1, 1]).unwrap();
        let sq = PlaquetteComplex::new(2, &[1, 1]).unwrap();
        for b in [0.0, 0.3, 0.5, 1.2] {
            let (c, s) = (f64::cosh(b), f64::sinh(b));
            assert!((lgm_partition(&cube, b).unwrap() - (c.powi(6) + s.powi(6))).abs() < 1e-12);
            assert!((lgm_partition(&sq, b).unwrap() - c).abs() < 1e-15);
            let face = WilsonLoop::square(&cube, &[0, 0, 0], (0, 1), 1).unwrap();
            assert_eq!(face.edges.len(), 4);
            let w = wilson_expectation(&cube, b, &face).unwrap();
            assert!((w - cube_face_wilson(b)).abs() < 1e-13);
        }
    }

    #[test]
    fn planar_area_law() {
        let c = PlaquetteComplex::new(2, &[3, 3]).unwrap();
        for b in [0.3, 0.5, 0.9] {
            for l in 1..=2 {
                let lp = WilsonLoop::square(&c, &[0, 0], (0, 1), l).unwrap();
                let w = wilson_expectation(&c, b, &lp).unwrap();
                assert!((w - b.tanh().powi((l * l) as i32)).abs() < 1e-12);
            }
        }
        let lp = WilsonLoop::square(&c, &[1, 1], (0, 1), 1).unwrap();
        assert_eq!(wilson_expectation(&c, 0.0, &lp).unwrap(), 0.0);
    }

    #[test]
    fn open_loop_rejected() {
        let c = PlaquetteComplex::new(2, &[2, 2]).unwrap();
        let mut l = WilsonLoop::square(&c, &[0, 0], (0, 1), 1).unwrap();
        l.edges.pop();
        assert!(matches!(wilson_expectation(&c, 0.5, &l), Err(Error::Constraint(_))));
        assert!(WilsonLoop::from_edges(&c, &l.edges).is_err());
    }

    #[test]
    fn chain_sum_matches_gauge_fields() {
        for (d, cells) in [(2, vec![1, 1]), (2, vec![2, 2]), (2, vec![3, 1]), (3, vec![1, 1, 1]), (3, vec![2, 1, 1])] {
            let c = PlaquetteComplex::new(d, &cells).unwrap();
            for b in [0.25, 0.8] {
                let z = lgm_partition(&c, b).unwrap();
                let (zo, _) = gauge_field_oracle(&c, b, &[], None).unwrap();
                assert!((z - zo).abs() / z < 1e-12, "{cells:?} {z} {zo}");
            }
        }
    }

    #[test]
    fn gauge_invariance() {
        let c = PlaquetteComplex::new(3, &[2, 1, 1]).unwrap();
        let l = WilsonLoop::square(&c, &[0, 0, 0], (0, 2), 1).unwrap();
        let b = 0.6;
        let base = gauge_field_oracle(&c, b, &l.edges, None).unwrap();
        assert!((base.1 - wilson_expectation(&c, b, &l).unwrap()).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let tau: Vec<bool> = (0..c.num_vertices()).map(|_| rng.gen()).collect();
            assert_eq!(gauge_field_oracle(&c, b, &l.edges, Some(&tau)).unwrap(), base);
        }
    }

    #[test]
    fn dual_beta_values() {
        assert!((dual_beta(0.5).unwrap() - 0.385_968_4).abs() < 1e-7);
        let fixed = 0.5 * (1.0 + 2f64.sqrt()).ln();
        assert!((dual_beta(fixed).unwrap() - fixed).abs() < 1e-15);
        for b in [0.1, 0.3, 0.5, 1.0, 2.0] {
            assert!((dual_beta(dual_beta(b).unwrap()).unwrap() - b).abs() < 1e-14);
        }
        assert!(dual_beta(0.0).is_err());
        assert!(dual_beta(-1.0).is_err());
        assert!(dual_beta(3.0).unwrap() < dual_beta(2.0).unwrap());
    }

    #[test]
    fn duality_small_boxes() {
        for cells in [[1, 1, 1], [2, 1, 1], [2, 2, 1]] {
            let c = PlaquetteComplex::new(3, &cells).unwrap();
            let s = WilsonLoop::square(&c, &[0, 0, 0], (0, 1), 1).unwrap().surface;
            for b in [0.2, 0.5, 1.0] {
                let r = verify_duality(&c, b, &s).unwrap();
                assert!(r.partition.abs_diff() / r.partition.lhs < 1e-10, "{cells:?} {b} {r:?}");
                assert!(r.wilson.as_ref().unwrap().passes(1e-10), "{cells:?} {b} {r:?}");
            }
        }
        let c = PlaquetteComplex::new(3, &[1, 1, 1]).unwrap();
        let r = verify_duality(&c, 0.0, &[]).unwrap();
        assert_eq!((r.partition.lhs, r.partition.rhs), (1.0, 1.0));
    }

    #[test]
    fn g_root() {
        assert!((g_of_r(0.5).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-12);
        for r_max in [0.05, 0.3, 0.7, 0.95] {
            let g = g_of_r(r_max).unwrap();
            for i in 1..=200 {
                let r = r_max * i as f64 / 200.0;
                assert!(1.0 - r - (-g * r).exp() >= -1e-12);
            }
        }
        assert!(g_of_r(1.0).is_err());
    }

    #[test]
    fn deconfinement_planar_boxes() {
        let lat = generate_box_lattice(2, &[3, 3], BoxBoundary::Free).unwrap();
        for b in [0.1, 0.4, 0.8] {
            for ell in 1..=3 {
                let geom = DeconfinementGeometry::box_segment(&lat, ell).unwrap();
                let rep = deconfinement_chain(&lat.model(b).unwrap(), &geom).unwrap();
                assert!(rep.passes(1e-12), "{b} {ell} {rep:?}");
            }
        }
        let geom = DeconfinementGeometry::box_segment(&lat, 1).unwrap();
        let rep = deconfinement_chain(&lat.model(0.0).unwrap(), &geom).unwrap();
        for q in [rep.w, rep.b1, rep.b2, rep.b3] {
            assert!((q - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn deconfinement_from_gauge_loop() {
        let c = PlaquetteComplex::new(3, &[2, 2, 1]).unwrap();
        let l = WilsonLoop::square(&c, &[0, 0, 1], (0, 1), 1).unwrap();
        for b in [0.5, 1.0, 2.0] {
            let rep = deconfinement_bound_report(&c, b, &l).unwrap();
            assert!(rep.passes(1e-12), "{rep:?}");
            let w = wilson_expectation(&c, b, &l).unwrap();
            assert!((w - rep.w).abs() < 1e-10);
        }
    }
}
