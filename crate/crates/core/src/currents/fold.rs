//! Reflection folding of a single current: `n + R(n)`.

use std::collections::BTreeMap;

use crate::check::{Bound, Check};
use crate::error::{Error, Result};
use crate::graph::{mask_of, BoundarySpec, Couplings, Model};
use crate::lattice::{ReflectionSymmetry, Side};
use crate::spin;
use crate::sum::Neumaier;

use super::{single_fold, single_sums, support_dsu, SourceConstraint};

fn check_symmetry(model: &Model, r: &ReflectionSymmetry) -> Result<()> {
    if r.map.len() != model.n() || r.edge_map.len() != model.m() {
        return Err(Error::NotSymmetric(
            "symmetry does not match the model".into(),
        ));
    }
    Ok(())
}

/// Support of `n + R(n)`.
#[inline]
fn folded(r: &ReflectionSymmetry, support: u64) -> u64 {
    support | r.reflect_edges(support)
}

/// `P^A(from ↔ to under n + R(n))` for a single current with sources `a`.
pub fn fold_connection_probability(
    model: &Model,
    r: &ReflectionSymmetry,
    a: &[usize],
    from: &[usize],
    to: &[usize],
) -> Result<f64> {
    check_symmetry(model, r)?;
    model.check_vertices(a)?;
    model.check_vertices(from)?;
    model.check_vertices(to)?;
    let (fm, tm, n) = (mask_of(from), mask_of(to), model.n());
    let g = &model.graph;
    let sc = SourceConstraint::for_model(model, a);
    let [num, den] = single_sums(model, &sc, |c| {
        let hit = support_dsu(g, folded(r, c.support), 0).masks_connected(fm, tm, n);
        [if hit { 1.0 } else { 0.0 }, 1.0]
    })?;
    if den == 0.0 {
        return Err(Error::Undefined("no current with these sources".into()));
    }
    Ok(num / den)
}

/// `<sigma_x sigma_{R y}>` against `<sigma_x sigma_y> P^{x,y}(y ↔ plane)`.
pub fn folded_correlation_identity(
    model: &Model,
    r: &ReflectionSymmetry,
    x: usize,
    y: usize,
) -> Result<Check> {
    check_symmetry(model, r)?;
    model.check_vertices(&[x, y])?;
    let opposite = matches!(
        (r.side[x], r.side[y]),
        (Side::Lower, Side::Upper) | (Side::Upper, Side::Lower)
    );
    if opposite {
        return Err(Error::Precondition(
            "x and y must lie on the same side of the plane".into(),
        ));
    }
    let e = spin::gibbs(model, &[vec![x, r.map[y]], vec![x, y]])?.expectations;
    let rhs = if e[1] == 0.0 {
        0.0
    } else {
        e[1] * fold_connection_probability(model, r, &[x, y], &[y], &r.plane())?
    };
    Ok(Check::new("folded correlation", e[0], rhs))
}

/// Results of the mixed-boundary reflection identities.
#[derive(Clone, Debug, PartialEq)]
pub struct DobrushinReport {
    /// `Z^{±;+}/Z^{+;+}` against `P^{+;+}(∂− not connected to the plane)`.
    pub partition: Check,
    /// `<sigma_x>^{±;+}` against `E(<sigma_x>^{F;+}_Γ | FF)`.
    pub magnetization: Check,
    /// Plane magnetization with plus boundary bounded by `<sigma_x>^{±;+}`.
    pub van_beijeren: Bound,
}

/// Mixed-boundary identities for a reflection whose plane carries `x`.
/// The model's minus boundary must be the mirror image of the plus
/// boundary off the plane.
pub fn dobrushin_identities(model: &Model, r: &ReflectionSymmetry, x: usize) -> Result<DobrushinReport> {
    check_symmetry(model, r)?;
    model.check_vertices(&[x])?;
    if !model.couplings.is_ferromagnetic() {
        return Err(Error::Precondition("ferromagnetic couplings required".into()));
    }
    if r.side[x] != Side::Plane {
        return Err(Error::Precondition("x must lie on the reflection plane".into()));
    }
    let minus = model.boundary.minus();
    if minus.is_empty() {
        return Err(Error::Precondition("no minus boundary".into()));
    }
    let n = model.n();
    let g = &model.graph;
    let plane = r.plane_mask();
    let minus_m = mask_of(&minus);
    let outer = model.boundary.clamped_mask() & !plane;

    let mut plus = model.clone();
    plus.boundary = model.boundary.all_plus();
    let z_pm = spin::gibbs(model, &[vec![x]])?;
    let z_p = spin::partition_function(&plus)?;

    let sc = SourceConstraint::for_model(&plus, &[]);
    // per Γ: total weight of frustration-free currents
    type Acc = (Neumaier, BTreeMap<u64, Neumaier>);
    let (total, groups): Acc = single_fold(
        &plus,
        &sc,
        || (Neumaier::new(), BTreeMap::new()),
        |acc: &mut Acc, c, w| {
            acc.0.add(w);
            let mut d = support_dsu(g, folded(r, c.support), 0);
            if d.masks_connected(minus_m, plane, n) {
                return;
            }
            let gamma = !d.closure(outer, n) & all_vertices(n);
            acc.1.entry(gamma).or_default().add(w);
        },
        |t: &mut Acc, p: Acc| {
            t.0.merge(&p.0);
            for (k, v) in p.1 {
                t.1.entry(k).or_default().merge(&v);
            }
        },
    )?;
    let mut ff = Neumaier::new();
    let mut num = Neumaier::new();
    for (&gamma, w) in &groups {
        if gamma >> x & 1 == 0 {
            return Err(Error::Undefined(
                "x joined to the outer boundary on a frustration-free current".into(),
            ));
        }
        let m = restricted_plus(model, gamma)?;
        let e = spin::expectation(&m.0, &[m.1[x].expect("x in Γ")])?;
        ff.add(w.value());
        num.add(w.value() * e);
    }
    let p_ff = ff.value() / total.value();
    let partition = Check::new("dobrushin partition ratio", z_pm.z / z_p, p_ff);
    let cond = if ff.value() > 0.0 {
        num.value() / ff.value()
    } else {
        return Err(Error::Undefined("frustration-free event has probability 0".into()));
    };
    let m_pm = z_pm.expectations[0];
    let magnetization = Check::new("dobrushin magnetization", m_pm, cond);

    let (plane_model, vmap) = restricted_plus(model, plane)?;
    let m_plane = spin::expectation(&plane_model, &[vmap[x].expect("x on plane")])?;
    let van_beijeren = Bound::new("van beijeren", m_plane, m_pm);
    Ok(DobrushinReport {
        partition,
        magnetization,
        van_beijeren,
    })
}

fn all_vertices(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Model induced on `keep` with its clamped vertices turned plus.
fn restricted_plus(model: &Model, keep: u64) -> Result<(Model, Vec<Option<usize>>)> {
    let n = model.n();
    let flags: Vec<bool> = (0..n).map(|v| keep >> v & 1 == 1).collect();
    let (sub, vmap, emap) = model.graph.induced(&flags);
    let j = emap.iter().map(|&b| model.couplings.j[b]).collect();
    let mut bd = BoundarySpec::new();
    for v in model.boundary.clamped() {
        if let Some(w) = vmap[v] {
            bd.set(w, crate::graph::Designation::Plus);
        }
    }
    let m = Model::new(sub, Couplings::new(j, model.couplings.beta))?
        .with_caps(model.caps)
        .with_boundary(bd)?;
    Ok((m, vmap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::lattice::{generate_box_lattice, reflection_for_axis, BoxBoundary};

    #[test]
    fn path_fold() {
        // path -2..2 with the plane at 0
        let lat = generate_box_lattice(2, &[1, 5], BoxBoundary::Free).unwrap();
        let k = 0.6;
        let rf = reflection_for_axis(&lat, &lat.unit_couplings(k), 1, 2.0).unwrap();
        let m = rf.model().unwrap();
        let c = folded_correlation_identity(&m, &rf.symmetry, 0, 1).unwrap();
        let t = k.tanh();
        assert!((c.lhs - t.powi(3)).abs() < 1e-14);
        assert!(c.passes(1e-13), "{c:?}");
        let p = fold_connection_probability(&m, &rf.symmetry, &[0, 1], &[1], &[2]).unwrap();
        assert!((p - t * t).abs() < 1e-14);
    }

    #[test]
    fn fold_on_plane_is_trivial() {
        let lat = generate_box_lattice(2, &[3, 3], BoxBoundary::Free).unwrap();
        let rf = reflection_for_axis(&lat, &lat.unit_couplings(0.5), 1, 1.0).unwrap();
        let m = rf.model().unwrap();
        let c = folded_correlation_identity(&m, &rf.symmetry, 0, 4).unwrap();
        assert!(c.passes(1e-13));
        assert!((c.lhs - spin::expectation(&m, &[0, 4]).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn opposite_sides_rejected() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let m = Model::uniform(g.clone(), 0.5).unwrap();
        let r = ReflectionSymmetry::new(
            &g,
            &m.couplings,
            vec![2, 1, 0],
            vec![Side::Lower, Side::Plane, Side::Upper],
        )
        .unwrap();
        assert!(folded_correlation_identity(&m, &r, 0, 2).is_err());
    }

    #[test]
    fn dobrushin_three_by_three() {
        let lat = generate_box_lattice(2, &[3, 3], BoxBoundary::PlusMinus).unwrap();
        let rf = reflection_for_axis(&lat, &lat.unit_couplings(0.7), 1, 1.0).unwrap();
        let m = rf.model().unwrap();
        let x = lat.vertex_at(&[1, 1]).unwrap();
        let rep = dobrushin_identities(&m, &rf.symmetry, x).unwrap();
        assert!(rep.partition.passes(1e-10), "{:?}", rep.partition);
        assert!(rep.magnetization.passes(1e-10), "{:?}", rep.magnetization);
        assert!(rep.van_beijeren.passes(1e-12), "{:?}", rep.van_beijeren);
    }
}
