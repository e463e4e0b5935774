//! Seeded Monte Carlo estimators: single-site Metropolis, Swendsen–Wang and
//! a rejection sampler for current parities and supports.
//!
//! Every chain owns a `ChaCha8Rng` seeded with `seed ^ chain_index`; chains
//! run in parallel and are merged in index order, so a fixed [`ChainSpec`]
//! reproduces its results bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::currents::{effective_negative_mask, EdgeStateConfig, Event, SourceConstraint};
use crate::error::{Error, Result};
use crate::fk::{FkFunction, FkView};
use crate::graph::Model;
use crate::unionfind::{RollbackDsu, UnionFind};

pub const BATCHES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChainSpec {
    pub seed: u64,
    pub burn_in: usize,
    /// Measurement sweeps per chain (accepted draws for the rejection sampler).
    pub sweeps: usize,
    pub thin: usize,
    pub chains: usize,
}

impl ChainSpec {
    pub fn new(seed: u64, sweeps: usize) -> Self {
        Self {
            seed,
            burn_in: sweeps / 10,
            sweeps,
            thin: 1,
            chains: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.thin == 0 || self.chains == 0 {
            return Err(Error::Domain("thinning and chain count must be positive".into()));
        }
        let per = self.sweeps / self.thin * self.chains;
        if per < BATCHES {
            return Err(Error::Domain(format!(
                "{per} measurements cannot fill {BATCHES} batches"
            )));
        }
        Ok(())
    }

    fn rng(&self, chain: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ chain as u64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorResult {
    pub mean: f64,
    /// Batch-means standard error over [`BATCHES`] batches.
    pub stderr: f64,
    pub samples: usize,
    pub acceptance: Option<f64>,
}

impl EstimatorResult {
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        if xs.len() < BATCHES {
            return Err(Error::Domain(format!("{} samples for {BATCHES} batches", xs.len())));
        }
        let size = xs.len() / BATCHES;
        let means: Vec<f64> = xs
            .chunks_exact(size)
            .take(BATCHES)
            .map(|c| c.iter().sum::<f64>() / size as f64)
            .collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let bm = means.iter().sum::<f64>() / BATCHES as f64;
        let var = means.iter().map(|m| (m - bm).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
        Ok(Self {
            mean,
            stderr: (var / BATCHES as f64).sqrt(),
            samples: xs.len(),
            acceptance: None,
        })
    }

    /// `|mean - exact| <= z * stderr`, with exact agreement required when
    /// the error bar vanishes.
    pub fn covers(&self, exact: f64, z: f64) -> bool {
        (self.mean - exact).abs() <= z * self.stderr + 1e-12
    }
}

fn product(spins: &[i8], a: &[usize]) -> f64 {
    a.iter().map(|&v| spins[v] as f64).product()
}

fn initial_spins(model: &Model, rng: &mut ChaCha8Rng) -> Vec<i8> {
    (0..model.n())
        .map(|v| model.boundary.clamp(v).unwrap_or(if rng.gen() { 1 } else { -1 }))
        .collect()
}

fn check_observables(model: &Model, obs: &[Vec<usize>]) -> Result<()> {
    for a in obs {
        if let Some(&v) = a.iter().find(|&&v| v >= model.n()) {
            return Err(Error::Graph(format!("observable vertex {v} out of range")));
        }
    }
    Ok(())
}

/// Runs every chain and merges each observable's stream by chain index.
fn run_chains(
    spec: &ChainSpec,
    n_obs: usize,
    chain: impl Fn(&mut ChaCha8Rng, &mut dyn FnMut(&[f64])) + Sync,
) -> Result<Vec<EstimatorResult>> {
    spec.validate()?;
    let streams: Vec<Vec<Vec<f64>>> = (0..spec.chains)
        .into_par_iter()
        .map(|i| {
            let mut rng = spec.rng(i);
            let mut out = vec![Vec::with_capacity(spec.sweeps / spec.thin); n_obs];
            chain(&mut rng, &mut |vals| {
                for (s, &x) in out.iter_mut().zip(vals) {
                    s.push(x);
                }
            });
            out
        })
        .collect();
    (0..n_obs)
        .map(|k| {
            let all: Vec<f64> = streams.iter().flat_map(|s| s[k].iter().copied()).collect();
            EstimatorResult::from_samples(&all)
        })
        .collect()
}

/// Single-site Metropolis chain; each sweep makes one proposal per free
/// vertex at uniformly random sites.
pub struct Metropolis<'a> {
    model: &'a Model,
    free: Vec<usize>,
    spins: Vec<i8>,
    accepted: u64,
    proposed: u64,
}

impl<'a> Metropolis<'a> {
    pub fn new(model: &'a Model, rng: &mut ChaCha8Rng) -> Self {
        let free = (0..model.n()).filter(|&v| !model.boundary.is_clamped(v)).collect();
        Self {
            model,
            free,
            spins: initial_spins(model, rng),
            accepted: 0,
            proposed: 0,
        }
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn acceptance(&self) -> f64 {
        self.accepted as f64 / self.proposed.max(1) as f64
    }

    pub fn sweep(&mut self, rng: &mut ChaCha8Rng) {
        let g = &self.model.graph;
        let beta = self.model.couplings.beta;
        for _ in 0..self.free.len() {
            let x = self.free[rng.gen_range(0..self.free.len())];
            let local: f64 = g
                .incident(x)
                .iter()
                .map(|&b| self.model.k(b) * self.spins[g.other(b, x)] as f64)
                .sum::<f64>()
                + beta * self.model.field[x];
            // log-weight change of flipping x
            let delta = -2.0 * self.spins[x] as f64 * local;
            self.proposed += 1;
            if delta >= 0.0 || rng.gen::<f64>() < delta.exp() {
                self.spins[x] = -self.spins[x];
                self.accepted += 1;
            }
        }
    }
}

/// Spin-product expectations from Metropolis chains.
pub fn metropolis_spin(model: &Model, observables: &[Vec<usize>], spec: &ChainSpec) -> Result<Vec<EstimatorResult>> {
    check_observables(model, observables)?;
    run_chains(spec, observables.len(), |rng, emit| {
        let mut m = Metropolis::new(model, rng);
        for _ in 0..spec.burn_in {
            m.sweep(rng);
        }
        let mut vals = vec![0.0; observables.len()];
        for s in 0..spec.sweeps {
            m.sweep(rng);
            if (s + 1) % spec.thin == 0 {
                for (v, a) in vals.iter_mut().zip(observables) {
                    *v = product(m.spins(), a);
                }
                emit(&vals);
            }
        }
    })
}

/// Swendsen–Wang chain alternating the edge and spin conditionals of the
/// joint spin–cluster measure.
pub struct SwendsenWang<'a> {
    model: &'a Model,
    p: Vec<f64>,
    spins: Vec<i8>,
    omega: u64,
}

impl<'a> SwendsenWang<'a> {
    pub fn new(model: &'a Model, rng: &mut ChaCha8Rng) -> Result<Self> {
        if !model.couplings.is_ferromagnetic() {
            return Err(Error::Precondition("Swendsen–Wang needs ferromagnetic couplings".into()));
        }
        if model.has_field() {
            return Err(Error::Precondition("Swendsen–Wang runs at zero field".into()));
        }
        let p = (0..model.m()).map(|b| -(-2.0 * model.k(b)).exp_m1()).collect();
        Ok(Self {
            model,
            p,
            spins: initial_spins(model, rng),
            omega: 0,
        })
    }

    pub fn spins(&self) -> &[i8] {
        &self.spins
    }

    pub fn omega(&self) -> u64 {
        self.omega
    }

    pub fn sweep(&mut self, rng: &mut ChaCha8Rng) {
        let g = &self.model.graph;
        let n = self.model.n();
        let mut uf = UnionFind::new(n);
        self.omega = 0;
        for (b, &(u, v)) in g.edges().iter().enumerate() {
            if self.spins[u] == self.spins[v] && rng.gen::<f64>() < self.p[b] {
                self.omega |= 1 << b;
                uf.union(u, v);
            }
        }
        let mut label = vec![0i8; n];
        for v in 0..n {
            if let Some(s) = self.model.boundary.clamp(v) {
                label[uf.find(v)] = s;
            }
        }
        for v in 0..n {
            let r = uf.find(v);
            if label[r] == 0 {
                label[r] = if rng.gen() { 1 } else { -1 };
            }
            self.spins[v] = label[r];
        }
    }

    /// Cluster structure of the current edge configuration.
    pub fn clusters(&self) -> RollbackDsu {
        let n = self.model.n();
        let marked: Vec<bool> = (0..n).map(|v| self.model.boundary.is_clamped(v)).collect();
        let mut d = RollbackDsu::new(n, &marked);
        for (b, &(u, v)) in self.model.graph.edges().iter().enumerate() {
            if self.omega >> b & 1 == 1 {
                d.union(u, v, 0);
            }
        }
        d
    }
}

/// Swendsen–Wang estimates: spin products first, then FK functions.
pub fn swendsen_wang(
    model: &Model,
    spins: &[Vec<usize>],
    fk: &[FkFunction],
    spec: &ChainSpec,
) -> Result<Vec<EstimatorResult>> {
    check_observables(model, spins)?;
    let mut probe = ChaCha8Rng::seed_from_u64(0);
    SwendsenWang::new(model, &mut probe)?;
    let clamped = model.boundary.clamped();
    run_chains(spec, spins.len() + fk.len(), |rng, emit| {
        let mut sw = SwendsenWang::new(model, rng).expect("checked above");
        for _ in 0..spec.burn_in {
            sw.sweep(rng);
        }
        let mut vals = vec![0.0; spins.len() + fk.len()];
        for s in 0..spec.sweeps {
            sw.sweep(rng);
            if (s + 1) % spec.thin != 0 {
                continue;
            }
            for (v, a) in vals.iter_mut().zip(spins) {
                *v = product(sw.spins(), a);
            }
            if !fk.is_empty() {
                let d = sw.clusters();
                let view = FkView {
                    omega: sw.omega(),
                    dsu: &d,
                };
                for (v, f) in vals[spins.len()..].iter_mut().zip(fk) {
                    *v = f.eval(&view, &clamped);
                }
            }
            emit(&vals);
        }
    })
}

/// Independent per-edge draws of the current trichotomy, accepted when the
/// parity matches the source constraint.
pub struct CurrentProposal {
    /// Cumulative thresholds for (zero, odd) per edge.
    thresholds: Vec<(f64, f64)>,
    edge_masks: Vec<u64>,
    constrained: u64,
    target: u64,
}

const PROBE: u64 = 1 << 20;
const MIN_ACCEPTANCE: f64 = 1e-6;

impl CurrentProposal {
    pub fn new(model: &Model, a: &[usize]) -> Result<Self> {
        if !model.couplings.is_ferromagnetic() || effective_negative_mask(model) != 0 {
            return Err(Error::Precondition(
                "rejection sampling needs nonnegative effective couplings".into(),
            ));
        }
        let sc = SourceConstraint::for_model(model, a);
        let (constrained, target) = match sc.masks(model.n()) {
            Ok(m) => m,
            Err(Error::Constraint(msg)) => {
                return Err(Error::Sampler(format!("acceptance is 0: {msg}")));
            }
            Err(e) => return Err(e),
        };
        let thresholds = (0..model.m())
            .map(|b| {
                let k = model.k(b);
                let p0 = (-k).exp();
                (p0, p0 - 0.5 * (-2.0 * k).exp_m1())
            })
            .collect();
        let edge_masks = (0..model.m()).map(|b| model.graph.edge_mask(b)).collect();
        Ok(Self {
            thresholds,
            edge_masks,
            constrained,
            target,
        })
    }

    pub fn propose(&self, rng: &mut ChaCha8Rng) -> (EdgeStateConfig, bool) {
        let mut c = EdgeStateConfig::default();
        let mut src = 0u64;
        for (b, &(z, o)) in self.thresholds.iter().enumerate() {
            let u: f64 = rng.gen();
            if u < z {
                continue;
            }
            c.support |= 1 << b;
            if u < o {
                c.odd |= 1 << b;
                src ^= self.edge_masks[b];
            }
        }
        (c, src & self.constrained == self.target)
    }

    /// Next accepted draw; gives up when a probe batch accepts at a rate
    /// below `1e-6`.
    pub fn draw(&self, rng: &mut ChaCha8Rng, proposals: &mut u64) -> Result<EdgeStateConfig> {
        let mut batch = 0u64;
        loop {
            let (c, ok) = self.propose(rng);
            *proposals += 1;
            batch += 1;
            if ok {
                return Ok(c);
            }
            if batch >= PROBE {
                return Err(Error::Sampler(format!(
                    "no acceptance in {batch} proposals (rate below {MIN_ACCEPTANCE})"
                )));
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurrentSample {
    /// Accepted first currents, in chain order.
    pub stream: Vec<EdgeStateConfig>,
    /// Probability of `event` under independent pairs with sources `a1`, `a2`.
    pub estimate: EstimatorResult,
}

/// Rejection sampler for pairs of currents; `event` is evaluated on the
/// summed support. `spec.sweeps` counts accepted pairs per chain.
pub fn current_rejection_sampler(
    model: &Model,
    a1: &[usize],
    a2: &[usize],
    event: &Event,
    spec: &ChainSpec,
) -> Result<CurrentSample> {
    spec.validate()?;
    let p1 = CurrentProposal::new(model, a1)?;
    let p2 = CurrentProposal::new(model, a2)?;
    let g = &model.graph;
    let all = if model.m() == 64 { u64::MAX } else { (1u64 << model.m()) - 1 };
    type Chain = Result<(Vec<EdgeStateConfig>, Vec<f64>, u64, u64)>;
    let chains: Vec<Chain> = (0..spec.chains)
        .into_par_iter()
        .map(|i| {
            let mut rng = spec.rng(i);
            let (mut stream, mut xs) = (Vec::new(), Vec::new());
            let mut proposals = 0u64;
            let mut accepted = 0u64;
            for s in 0..spec.sweeps {
                let c1 = p1.draw(&mut rng, &mut proposals)?;
                let c2 = p2.draw(&mut rng, &mut proposals)?;
                accepted += 2;
                if (s + 1) % spec.thin != 0 {
                    continue;
                }
                let hit = event.holds(g, 0, c1.support | c2.support, all);
                xs.push(if hit { 1.0 } else { 0.0 });
                stream.push(c1);
            }
            Ok((stream, xs, accepted, proposals))
        })
        .collect();
    let (mut stream, mut xs, mut acc, mut prop) = (Vec::new(), Vec::new(), 0u64, 0u64);
    for c in chains {
        let (s, x, a, p) = c?;
        stream.extend(s);
        xs.extend(x);
        acc += a;
        prop += p;
    }
    let mut estimate = EstimatorResult::from_samples(&xs)?;
    estimate.acceptance = Some(acc as f64 / prop as f64);
    Ok(CurrentSample { stream, estimate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn edge(k: f64) -> Model {
        Model::uniform(Graph::from_edges(2, &[(0, 1)]).unwrap(), k).unwrap()
    }

    #[test]
    fn metropolis_single_edge() {
        let spec = ChainSpec {
            chains: 4,
            ..ChainSpec::new(11, 50_000)
        };
        let r = metropolis_spin(&edge(0.8), &[vec![0, 1]], &spec).unwrap();
        assert!(r[0].covers(0.8f64.tanh(), 4.0), "{r:?}");
        assert!(r[0].stderr > 0.0);
        assert_eq!(r, metropolis_spin(&edge(0.8), &[vec![0, 1]], &spec).unwrap());
    }

    #[test]
    fn sw_single_edge() {
        let spec = ChainSpec::new(3, 40_000);
        let r = swendsen_wang(&edge(0.6), &[vec![0, 1]], &[FkFunction::Connected(0, 1)], &spec).unwrap();
        let t = 0.6f64.tanh();
        assert!(r[0].covers(t, 4.0) && r[1].covers(t, 4.0), "{r:?}");
        let zero = swendsen_wang(&edge(0.0), &[], &[FkFunction::Connected(0, 1)], &spec).unwrap();
        assert_eq!(zero[0].mean, 0.0);
    }

    #[test]
    fn sw_rejects_mixed_signs() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let m = Model::new(g, crate::Couplings::new(vec![1.0, -1.0], 0.5)).unwrap();
        assert!(swendsen_wang(&m, &[], &[], &ChainSpec::new(0, 100)).is_err());
    }

    #[test]
    fn rejection_single_edge() {
        let k: f64 = 0.7;
        let spec = ChainSpec::new(5, 40_000);
        let r = current_rejection_sampler(&edge(k), &[], &[], &Event::Connected(0, 1), &spec).unwrap();
        assert!(r.estimate.covers(k.tanh().powi(2), 4.0), "{r:?}");
        let acc = r.estimate.acceptance.unwrap();
        assert!((acc - k.cosh() / k.exp()).abs() < 0.01, "{acc}");
        assert!(matches!(
            current_rejection_sampler(&edge(k), &[0], &[], &Event::Connected(0, 1), &spec),
            Err(Error::Sampler(_))
        ));
    }

    #[test]
    fn too_few_measurements() {
        assert!(metropolis_spin(&edge(0.1), &[vec![0]], &ChainSpec::new(0, 10)).is_err());
    }
}
