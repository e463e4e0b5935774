mod common;

use std::collections::HashMap;

use common::*;
use ising_rc::currents::{EdgeStateConfig, Event};
use ising_rc::samplers::{
    current_rejection_sampler, metropolis_spin, swendsen_wang, ChainSpec, CurrentProposal, Metropolis, SwendsenWang,
};
use ising_rc::{Couplings, Graph, Model};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn path2(k1: f64, k2: f64) -> Model {
    let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
    Model::new(g, Couplings::new(vec![k1, k2], 1.0)).unwrap()
}

fn code(s: &[i8]) -> usize {
    s.iter().enumerate().fold(0, |c, (i, &x)| c | usize::from(x > 0) << i)
}

/// Upper tail probability of Pearson's statistic.
fn chi_square_p(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    let stat: f64 = counts
        .iter()
        .zip(probs)
        .map(|(&c, &p)| {
            let e = p * n as f64;
            (c as f64 - e).powi(2) / e
        })
        .sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64).unwrap().cdf(stat)
}

fn spin_probs(m: &Model) -> Vec<f64> {
    let w: Vec<f64> = (0..8usize)
        .map(|c| {
            let s = |i: usize| if c >> i & 1 == 1 { 1.0 } else { -1.0 };
            (m.k(0) * s(0) * s(1) + m.k(1) * s(1) * s(2)).exp()
        })
        .collect();
    let z: f64 = w.iter().sum();
    w.iter().map(|x| x / z).collect()
}

#[test]
fn swendsen_wang_matches_gibbs_on_two_edges() {
    let m = path2(0.5, 0.9);
    let mut r = rng(11);
    let mut sw = SwendsenWang::new(&m, &mut r).unwrap();
    let mut counts = vec![0u64; 8];
    for _ in 0..20_000 {
        for _ in 0..8 {
            sw.sweep(&mut r);
        }
        counts[code(sw.spins())] += 1;
    }
    let p = chi_square_p(&counts, &spin_probs(&m));
    assert!(p > 1e-3, "p-value {p}, counts {counts:?}");
}

#[test]
fn metropolis_matches_gibbs_on_two_edges() {
    let m = path2(0.5, 0.9);
    let mut r = rng(12);
    let mut mc = Metropolis::new(&m, &mut r);
    let mut counts = vec![0u64; 8];
    for _ in 0..20_000 {
        for _ in 0..8 {
            mc.sweep(&mut r);
        }
        counts[code(mc.spins())] += 1;
    }
    let p = chi_square_p(&counts, &spin_probs(&m));
    assert!(p > 1e-3, "p-value {p}, counts {counts:?}");
    assert!(mc.acceptance() > 0.0 && mc.acceptance() < 1.0);
}

#[test]
fn current_draws_follow_trichotomy_weights() {
    let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
    let m = Model::new(g, Couplings::new(vec![0.4, 0.8, 1.1], 1.0)).unwrap();
    let prop = CurrentProposal::new(&m, &[]).unwrap();
    let mut r = rng(13);
    let mut hist: HashMap<EdgeStateConfig, u64> = HashMap::new();
    let mut proposals = 0;
    for _ in 0..30_000 {
        *hist.entry(prop.draw(&mut r, &mut proposals).unwrap()).or_default() += 1;
    }
    // sourceless states: no odd edge or all three odd, any even support
    let mut states = Vec::new();
    for support in 0u64..8 {
        states.push(EdgeStateConfig { odd: 0, support });
    }
    states.push(EdgeStateConfig { odd: 7, support: 7 });
    assert!(hist.keys().all(|s| states.contains(s)), "{hist:?}");
    let w: Vec<f64> = states.iter().map(|s| s.weight(&m)).collect();
    let z: f64 = w.iter().sum();
    let probs: Vec<f64> = w.iter().map(|x| x / z).collect();
    let counts: Vec<u64> = states.iter().map(|s| hist.get(s).copied().unwrap_or(0)).collect();
    let p = chi_square_p(&counts, &probs);
    assert!(p > 1e-3, "p-value {p}, counts {counts:?}");
}

#[test]
fn identical_specs_give_identical_streams() {
    let m = path2(0.7, 0.3);
    let obs = vec![vec![0, 2], vec![1]];
    for seed in [0, 5, u64::MAX] {
        let mut spec = ChainSpec::new(seed, 2000);
        spec.chains = 3;
        assert_eq!(metropolis_spin(&m, &obs, &spec).unwrap(), metropolis_spin(&m, &obs, &spec).unwrap());
        assert_eq!(swendsen_wang(&m, &obs, &[], &spec).unwrap(), swendsen_wang(&m, &obs, &[], &spec).unwrap());
        let a = current_rejection_sampler(&m, &[], &[], &Event::Connected(0, 2), &spec).unwrap();
        let b = current_rejection_sampler(&m, &[], &[], &Event::Connected(0, 2), &spec).unwrap();
        assert_eq!(a.stream, b.stream);
        assert_eq!(a.estimate, b.estimate);
    }
}

#[test]
fn stderr_vanishes_only_for_constant_observables() {
    let m = path2(0.7, 0.3);
    let spec = ChainSpec::new(3, 2000);
    let est = metropolis_spin(&m, &[vec![0, 2], vec![1, 1]], &spec).unwrap();
    assert!(est[0].stderr > 0.0);
    assert_eq!(est[1].stderr, 0.0);
    assert_eq!(est[1].mean, 1.0);
}
