//! Brute-force Gibbs sums over all spin configurations.
//!
//! A configuration is summarized by two bit masks: `up` over vertices and
//! `disagree` over edges. The Boltzmann weight is a fixed-order product of
//! byte-indexed tables of these masks, so the weight of a configuration
//! does not depend on how it was reached. Enumeration walks a Gray code
//! over the unclamped spins and updates both masks with one XOR each.

use rayon::prelude::*;

use crate::error::{size_check, Result};
use crate::graph::{parity_mask, Model};
use crate::sum::Neumaier;

/// Partition function (with the `1/2^#unclamped` normalization) and the
/// requested expectations, in request order.
#[derive(Clone, Debug, PartialEq)]
pub struct GibbsResult {
    pub z: f64,
    pub expectations: Vec<f64>,
}

struct Tables {
    edge: Vec<[f64; 256]>,
    field: Vec<[f64; 256]>,
}

impl Tables {
    fn new(model: &Model) -> Self {
        let m = model.m();
        let n = model.n();
        let mut edge = Vec::new();
        for chunk in 0..m.div_ceil(8) {
            let mut t = [1.0; 256];
            for (byte, slot) in t.iter_mut().enumerate() {
                let mut w = 1.0;
                for i in 0..8 {
                    let b = chunk * 8 + i;
                    if b >= m {
                        break;
                    }
                    let k = model.k(b);
                    w *= if byte >> i & 1 == 1 { (-k).exp() } else { k.exp() };
                }
                *slot = w;
            }
            edge.push(t);
        }
        let mut field = Vec::new();
        if model.has_field() {
            for chunk in 0..n.div_ceil(8) {
                let mut t = [1.0; 256];
                for (byte, slot) in t.iter_mut().enumerate() {
                    let mut w = 1.0;
                    for i in 0..8 {
                        let v = chunk * 8 + i;
                        if v >= n {
                            break;
                        }
                        let bh = model.couplings.beta * model.field[v];
                        w *= if byte >> i & 1 == 1 { bh.exp() } else { (-bh).exp() };
                    }
                    *slot = w;
                }
                field.push(t);
            }
        }
        Self { edge, field }
    }

    #[inline]
    fn weight(&self, disagree: u64, up: u64) -> f64 {
        let mut w = 1.0;
        for (j, t) in self.edge.iter().enumerate() {
            w *= t[(disagree >> (8 * j) & 0xff) as usize];
        }
        for (j, t) in self.field.iter().enumerate() {
            w *= t[(up >> (8 * j) & 0xff) as usize];
        }
        w
    }
}

struct Setup {
    free: Vec<usize>,
    base_up: u64,
    inc: Vec<u64>,
    obs: Vec<u64>,
    tables: Tables,
}

fn setup(model: &Model, observables: &[Vec<usize>]) -> Result<Setup> {
    let n = model.n();
    let free: Vec<usize> = (0..n).filter(|&v| !model.boundary.is_clamped(v)).collect();
    size_check(
        "unclamped spins",
        free.len() as u128,
        model.caps.spin_vertices as u128,
    )?;
    for o in observables {
        model.check_vertices(o)?;
    }
    let mut base_up = 0u64;
    for v in model.boundary.plus() {
        base_up |= 1 << v;
    }
    let mut inc = vec![0u64; n];
    for b in 0..model.m() {
        let (u, v) = model.graph.edge(b);
        inc[u] |= 1 << b;
        inc[v] |= 1 << b;
    }
    Ok(Setup {
        free,
        base_up,
        inc,
        obs: observables.iter().map(|o| parity_mask(o)).collect(),
        tables: Tables::new(model),
    })
}

fn disagreement(model: &Model, up: u64) -> u64 {
    let mut d = 0u64;
    for (b, &(u, v)) in model.graph.edges().iter().enumerate() {
        if (up >> u ^ up >> v) & 1 == 1 {
            d |= 1 << b;
        }
    }
    d
}

/// Sum over one block: the top `free.len() - low` free spins fixed by
/// `prefix`, Gray code over the lowest `low` free spins.
fn block(model: &Model, s: &Setup, low: usize, prefix: u64, acc: &mut [Neumaier]) {
    let mut up = s.base_up;
    for (i, &v) in s.free.iter().enumerate() {
        let bit = if i < low { 1 } else { prefix >> (i - low) & 1 };
        if bit == 1 {
            up |= 1 << v;
        }
    }
    let mut dis = disagreement(model, up);
    let steps: u64 = 1 << low;
    for i in 0..steps {
        if i > 0 {
            let v = s.free[i.trailing_zeros() as usize];
            up ^= 1 << v;
            dis ^= s.inc[v];
        }
        record(s, dis, up, acc);
    }
}

#[inline]
fn record(s: &Setup, dis: u64, up: u64, acc: &mut [Neumaier]) {
    let w = s.tables.weight(dis, up);
    acc[0].add(w);
    for (k, &a) in s.obs.iter().enumerate() {
        if (a & !up).count_ones() & 1 == 1 {
            acc[k + 1].add(-w);
        } else {
            acc[k + 1].add(w);
        }
    }
}

fn finish(s: &Setup, total: &[Neumaier]) -> GibbsResult {
    let z_raw = total[0].value();
    GibbsResult {
        z: z_raw / 2f64.powi(s.free.len() as i32),
        expectations: total[1..].iter().map(|a| a.value() / z_raw).collect(),
    }
}

/// Gibbs sums with an explicit block split: `2^split` blocks of the top
/// free spins, reduced in block order.
pub fn gibbs_split(model: &Model, observables: &[Vec<usize>], split: usize) -> Result<GibbsResult> {
    let s = setup(model, observables)?;
    let nf = s.free.len();
    let split = split.min(nf);
    let low = nf - split;
    let blocks: Vec<Vec<Neumaier>> = (0..1u64 << split)
        .into_par_iter()
        .map(|p| {
            let mut acc = vec![Neumaier::new(); s.obs.len() + 1];
            block(model, &s, low, p, &mut acc);
            acc
        })
        .collect();
    let mut total = vec![Neumaier::new(); s.obs.len() + 1];
    for b in &blocks {
        for (t, a) in total.iter_mut().zip(b) {
            t.merge(a);
        }
    }
    Ok(finish(&s, &total))
}

/// Partition function and expectations `<prod_{x in A} sigma_x>` for each
/// multiset `A` in `observables`.
pub fn gibbs(model: &Model, observables: &[Vec<usize>]) -> Result<GibbsResult> {
    let nf = (0..model.n())
        .filter(|&v| !model.boundary.is_clamped(v))
        .count();
    let split = nf.saturating_sub(14).min(8);
    gibbs_split(model, observables, split)
}

/// Same sums, recomputing both masks from scratch at every step of the
/// single-block Gray order. Used to certify the incremental updates.
pub fn gibbs_naive(model: &Model, observables: &[Vec<usize>]) -> Result<GibbsResult> {
    let s = setup(model, observables)?;
    let nf = s.free.len();
    let mut acc = vec![Neumaier::new(); s.obs.len() + 1];
    for i in 0..1u64 << nf {
        let gray = i ^ (i >> 1);
        let mut up = s.base_up;
        for (k, &v) in s.free.iter().enumerate() {
            // the block walk starts from all free spins up
            if gray >> k & 1 == 0 {
                up |= 1 << v;
            }
        }
        let dis = disagreement(model, up);
        record(&s, dis, up, &mut acc);
    }
    Ok(finish(&s, &acc))
}

pub fn partition_function(model: &Model) -> Result<f64> {
    Ok(gibbs(model, &[])?.z)
}

/// `<sigma_A>`; repeated vertices cancel.
pub fn expectation(model: &Model, a: &[usize]) -> Result<f64> {
    Ok(gibbs(model, &[a.to_vec()])?.expectations[0])
}

/// Fourth Ursell function at the model's field (callers pass zero field).
pub fn ursell4(model: &Model, x: [usize; 4]) -> Result<f64> {
    let obs = vec![
        x.to_vec(),
        vec![x[0], x[1]],
        vec![x[2], x[3]],
        vec![x[0], x[2]],
        vec![x[1], x[3]],
        vec![x[0], x[3]],
        vec![x[1], x[2]],
    ];
    let e = gibbs(model, &obs)?.expectations;
    Ok(e[0] - (e[1] * e[2] + e[3] * e[4] + e[5] * e[6]))
}

/// `<sigma_x sigma_y> - <sigma_x><sigma_y>`.
pub fn truncated_pair(model: &Model, x: usize, y: usize) -> Result<f64> {
    let e = gibbs(model, &[vec![x, y], vec![x], vec![y]])?.expectations;
    Ok(e[0] - e[1] * e[2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{BoundarySpec, Designation, Graph};

    fn triangle(beta: f64) -> Model {
        Model::uniform(Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap(), beta).unwrap()
    }

    #[test]
    fn single_edge() {
        let m = Model::uniform(Graph::from_edges(2, &[(0, 1)]).unwrap(), 0.7).unwrap();
        let r = gibbs(&m, &[vec![0, 1]]).unwrap();
        assert!((r.z - 0.7f64.cosh()).abs() < 1e-15);
        assert!((r.expectations[0] - 0.7f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn beta_zero_gives_one() {
        let m = triangle(0.0);
        assert_eq!(partition_function(&m).unwrap(), 1.0);
    }

    #[test]
    fn triangle_values() {
        let k = 0.5f64.atanh();
        let m = triangle(k);
        let z = partition_function(&m).unwrap();
        assert!((z - k.cosh().powi(3) * 1.125).abs() < 1e-14);
        assert!((expectation(&m, &[1, 2]).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        assert!(expectation(&m, &[0]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn multiset_cancels() {
        let m = triangle(0.4);
        assert!((expectation(&m, &[0, 0]).unwrap() - 1.0).abs() < 1e-15);
        let a = expectation(&m, &[0, 1, 1, 2]).unwrap();
        let b = expectation(&m, &[0, 2]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn clamped_single_spin() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let b = BoundarySpec::from_pairs(&[(1, Designation::Minus)]);
        let m = Model::uniform(g, 0.3).unwrap().with_boundary(b).unwrap();
        assert!((expectation(&m, &[0]).unwrap() + 0.3f64.tanh()).abs() < 1e-15);
        assert!((partition_function(&m).unwrap() - 0.3f64.cosh()).abs() < 1e-15);
    }

    #[test]
    fn field_on_single_vertex() {
        let m = Model::uniform(Graph::new(1), 1.0)
            .unwrap()
            .with_field(vec![0.8])
            .unwrap();
        assert!((expectation(&m, &[0]).unwrap() - 0.8f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn ursell_vanishes_for_disconnected_pairs() {
        let m = Model::uniform(Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap(), 0.9).unwrap();
        assert!(ursell4(&m, [0, 1, 2, 3]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn ursell_negative_on_cycle() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let m = Model::uniform(g, 0.5).unwrap();
        assert!(ursell4(&m, [0, 1, 2, 3]).unwrap() < 0.0);
    }

    #[test]
    fn truncated_pair_single_edge() {
        let m = Model::uniform(Graph::from_edges(2, &[(0, 1)]).unwrap(), 0.6).unwrap();
        assert!((truncated_pair(&m, 0, 1).unwrap() - 0.6f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn cap_enforced() {
        let mut m = Model::uniform(Graph::new(5), 0.1).unwrap();
        m.caps.spin_vertices = 4;
        assert!(partition_function(&m).is_err());
    }

    #[test]
    fn gray_matches_naive_bitwise() {
        let g = Graph::from_edges(
            6,
            &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)],
        )
        .unwrap();
        let m = Model::new(g, crate::graph::Couplings::new(vec![0.3, -0.7, 1.1, 0.2, 0.5, 0.9, -0.4], 1.3))
            .unwrap()
            .with_field(vec![0.1, 0.0, 0.3, 0.0, 0.0, 0.7])
            .unwrap();
        let obs = vec![vec![0, 3], vec![1], vec![2, 4, 5]];
        assert_eq!(gibbs_split(&m, &obs, 0).unwrap(), gibbs_naive(&m, &obs).unwrap());
    }
}
