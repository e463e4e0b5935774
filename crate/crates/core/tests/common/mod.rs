#![allow(dead_code)]

use ising_rc::{Couplings, Graph, Model};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Simple graph on `2..=max_n` vertices with `1..=max_m` distinct edges.
pub fn random_graph(r: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> Graph {
    let n = r.gen_range(2..=max_n);
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    pairs.shuffle(r);
    let m = r.gen_range(1..=max_m.min(pairs.len()));
    pairs.truncate(m);
    pairs.sort_unstable();
    Graph::from_edges(n, &pairs).unwrap()
}

/// Couplings with `beta = 1`: `J` in `[lo, hi]`.
pub fn random_model(r: &mut ChaCha8Rng, g: Graph, lo: f64, hi: f64) -> Model {
    let j: Vec<f64> = (0..g.num_edges()).map(|_| r.gen_range(lo..=hi)).collect();
    Model::new(g, Couplings::new(j, 1.0)).unwrap()
}

pub fn ferro(r: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> Model {
    let g = random_graph(r, max_n, max_m);
    random_model(r, g, 0.05, 1.5)
}

/// At least one negative coupling.
pub fn mixed(r: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> Model {
    let g = random_graph(r, max_n, max_m);
    let mut m = random_model(r, g, -1.5, 1.5);
    let b = r.gen_range(0..m.m());
    m.couplings.j[b] = -m.couplings.j[b].abs().max(0.05);
    m
}

/// Random subset of `0..n` with even size.
pub fn even_subset(r: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut s: Vec<usize> = (0..n).filter(|_| r.gen_bool(0.4)).collect();
    if s.len() % 2 == 1 {
        s.pop();
    }
    s
}

pub fn distinct(r: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(r);
    v.truncate(k);
    v
}

pub fn all_edges(m: &Model) -> u64 {
    if m.m() == 64 {
        u64::MAX
    } else {
        (1u64 << m.m()) - 1
    }
}

/// `Σ_{n ∈ {0..=cutoff}^E, ∂n = A} Π K_b^{n_b} / n_b!` by direct
/// enumeration of integer fluxes.
pub fn truncated_flux_sum(m: &Model, a: &[usize], cutoff: usize) -> f64 {
    let g = &m.graph;
    let target = a.iter().fold(0u64, |t, &v| t ^ (1 << v));
    let terms: Vec<Vec<f64>> = (0..m.m())
        .map(|b| {
            let k = m.k(b);
            let mut t = vec![1.0; cutoff + 1];
            for n in 1..=cutoff {
                t[n] = t[n - 1] * k / n as f64;
            }
            t
        })
        .collect();
    fn go(g: &Graph, terms: &[Vec<f64>], b: usize, parity: u64, w: f64, target: u64) -> f64 {
        if b == terms.len() {
            return if parity == target { w } else { 0.0 };
        }
        let (u, v) = g.edge(b);
        let flip = (1u64 << u) | (1u64 << v);
        let mut s = 0.0;
        for (n, t) in terms[b].iter().enumerate() {
            let p = if n % 2 == 1 { parity ^ flip } else { parity };
            s += go(g, terms, b + 1, p, w * t, target);
        }
        s
    }
    go(g, &terms, 0, 0, 1.0, target)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(1.0)
}
