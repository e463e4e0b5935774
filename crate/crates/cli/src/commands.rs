use std::path::Path;
use std::time::Instant;

use ising_rc::backbone::{backbone_grouping, check_path_properties, rho_weight, sample_path_tuples};
use ising_rc::check::Check;
use ising_rc::complex::PlaquetteComplex;
use ising_rc::currents::{
    box_surface_tension, boundary_magnetization, boundary_partition_ratio, correlation_via_currents,
    disorder_expectation, dobrushin_identities, folded_correlation_identity, frustrated_correlation,
    frustrated_partition_ratio, two_point_connection, ursell4_via_currents, verify_switching, Event, SupportFn,
};
use ising_rc::fk::{fk_boundary_identities, fk_frustration_adjusted, fk_rcr_bridge};
use ising_rc::gauge::{
    dual_beta, gauge_field_oracle, lgm_partition, verify_duality, wilson_expectation, deconfinement_bound_report,
    deconfinement_chain, DeconfinementGeometry, DeconfinementReport, WilsonLoop,
};
use ising_rc::graph::GraphFile;
use ising_rc::ineq::{run_suite, Instance, Suite};
use ising_rc::lattice::{generate_box_lattice, reflection_for_axis, BoxBoundary, BoxLattice, Side};
use ising_rc::samplers::{current_rejection_sampler, metropolis_spin, swendsen_wang, ChainSpec, EstimatorResult};
use ising_rc::sum::Neumaier;
use ising_rc::{spin, Caps, Model};

use crate::args::*;
use crate::output::{elapsed_ms, io_err, usage, CliError, CliResult, Row};

/// Width of the acceptance window for Monte Carlo rows, in standard errors.
const Z_SCORE: f64 = 4.0;

pub enum Source {
    File(GraphFile),
    Lattice(BoxLattice),
}

impl Source {
    pub fn load(c: &Common) -> CliResult<Self> {
        match (&c.graph, &c.lattice) {
            (Some(p), None) => {
                let text = std::fs::read_to_string(p).map_err(io_err(p))?;
                Ok(Self::File(GraphFile::parse(&text)?))
            }
            (None, Some(s)) => {
                let (d, sides, bc) = parse_lattice(s)?;
                Ok(Self::Lattice(generate_box_lattice(d, &sides, bc)?))
            }
            (None, None) => Err(usage("one of --graph or --lattice is required")),
            (Some(_), Some(_)) => Err(usage("--graph and --lattice are exclusive")),
        }
    }

    pub fn model(&self, beta: f64, caps: Caps) -> CliResult<Model> {
        let m = match self {
            Self::File(f) => f.model(beta)?,
            Self::Lattice(l) => l.model(beta)?,
        };
        Ok(m.with_caps(caps))
    }

    fn lattice(&self) -> CliResult<&BoxLattice> {
        match self {
            Self::Lattice(l) => Ok(l),
            Self::File(_) => Err(usage("this check needs --lattice")),
        }
    }
}

/// `box:d=2,L=3x4,bc=pm`; side lists may also be comma separated
/// (`L=3,4`), and a single side is used on every axis.
pub fn parse_lattice(s: &str) -> CliResult<(usize, Vec<usize>, BoxBoundary)> {
    let bad = |m: &str| usage(format!("lattice '{s}': {m}"));
    let body = s.strip_prefix("box:").ok_or_else(|| bad("expected prefix 'box:'"))?;
    let (mut d, mut sides, mut bc) = (None, Vec::new(), BoxBoundary::Free);
    let mut key = "";
    for tok in body.split(',') {
        let (k, v) = match tok.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => (key, tok.trim()),
        };
        key = k;
        match k {
            "d" => d = Some(v.parse::<usize>().map_err(|_| bad("bad dimension"))?),
            "L" => {
                for x in v.split('x') {
                    sides.push(x.parse::<usize>().map_err(|_| bad("bad side length"))?);
                }
            }
            "bc" => bc = BoxBoundary::parse(v).ok_or_else(|| bad("bc must be free, plus or pm"))?,
            _ => return Err(bad(&format!("unknown key '{k}'"))),
        }
    }
    let d = d.unwrap_or(sides.len());
    if sides.len() == 1 {
        sides = vec![sides[0]; d];
    }
    if sides.is_empty() {
        return Err(bad("missing L"));
    }
    Ok((d, sides, bc))
}

/// Inclusive `start:end:step`.
pub fn parse_sweep(s: &str) -> CliResult<Vec<f64>> {
    let bad = || usage(format!("beta sweep '{s}' is not start:end:step"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|x| x.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<CliResult<_>>()?;
    let [a, b, h] = parts[..] else { return Err(bad()) };
    if !(h > 0.0) || b < a {
        return Err(bad());
    }
    let n = ((b - a) / h + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| ((a + i as f64 * h) * 1e12).round() / 1e12).collect())
}

pub fn betas(c: &Common) -> CliResult<Vec<f64>> {
    match (c.beta, &c.beta_sweep) {
        (Some(b), None) => Ok(vec![b]),
        (None, Some(s)) => parse_sweep(s),
        _ => Err(usage("one of --beta or --beta-sweep is required")),
    }
}

fn parse_cells(s: &str, dim: usize) -> CliResult<Vec<usize>> {
    let v: Vec<usize> = s
        .split(['x', ','])
        .map(|x| x.trim().parse::<usize>().map_err(|_| usage(format!("bad cell list '{s}'"))))
        .collect::<CliResult<_>>()?;
    if v.len() != dim {
        return Err(usage(format!("cell list '{s}' does not have {dim} entries")));
    }
    Ok(v)
}

fn id(beta: f64, tail: &str) -> String {
    if tail.is_empty() {
        format!("b={beta}")
    } else {
        format!("b={beta}/{tail}")
    }
}

fn timed<T>(f: impl FnOnce() -> CliResult<T>) -> CliResult<(T, f64)> {
    let t = Instant::now();
    let v = f()?;
    Ok((v, elapsed_ms(t)))
}

fn free_vertices(m: &Model) -> Vec<usize> {
    (0..m.n()).filter(|&v| !m.boundary.is_clamped(v)).collect()
}

/// `(x, y)` pairs: consecutive entries of `--sites`, or `0` against every
/// other free vertex.
fn pairs(sites: &[usize], m: &Model) -> CliResult<Vec<(usize, usize)>> {
    if !sites.is_empty() {
        if !sites.len().is_multiple_of(2) {
            return Err(usage("--sites needs an even number of entries here"));
        }
        return Ok(sites.chunks(2).map(|p| (p[0], p[1])).collect());
    }
    let free = free_vertices(m);
    match free.split_first() {
        Some((&x, rest)) if !rest.is_empty() => Ok(rest.iter().map(|&y| (x, y)).collect()),
        _ => Err(usage("need at least two free vertices")),
    }
}

fn quad(sites: &[usize], m: &Model) -> CliResult<[usize; 4]> {
    let s = if sites.is_empty() { free_vertices(m) } else { sites.to_vec() };
    match s[..] {
        [a, b, c, d, ..] => Ok([a, b, c, d]),
        _ => Err(usage("four sites are required")),
    }
}

pub fn exact(what: ExactKind, c: &Common) -> CliResult<Vec<Row>> {
    let src = Source::load(c)?;
    let caps = c.caps.caps();
    let mut rows = Vec::new();
    for beta in betas(c)? {
        let m = src.model(beta, caps)?;
        match what {
            ExactKind::Z => {
                let (ch, ms) = timed(|| {
                    let a = spin::partition_function(&m)?;
                    let b = spin::gibbs_naive(&m, &[])?.z;
                    Ok(Check::new("Z", a, b))
                })?;
                rows.push(Row::relative(&id(beta, ""), &ch, c.tol, ms));
            }
            ExactKind::Corr => {
                for (x, y) in pairs(&c.sites, &m)? {
                    let (ch, ms) = timed(|| {
                        Ok(Check::new(
                            "corr",
                            spin::expectation(&m, &[x, y])?,
                            correlation_via_currents(&m, &[x, y])?,
                        ))
                    })?;
                    rows.push(Row::check(&id(beta, &format!("x={x},y={y}")), &ch, c.tol, ms));
                }
            }
            ExactKind::U4 => {
                let x = quad(&c.sites, &m)?;
                let ((u, a, b), ms) = timed(|| {
                    let (a, b) = ursell4_via_currents(&m, x)?;
                    Ok((spin::ursell4(&m, x)?, a, b))
                })?;
                let tail = format!("x={},{},{},{}", x[0], x[1], x[2], x[3]);
                rows.push(Row::check(&id(beta, &tail), &Check::new("u4 connection form", u, a), c.tol, ms));
                rows.push(Row::check(&id(beta, &tail), &Check::new("u4 split form", u, b), c.tol, ms));
            }
            ExactKind::Tension => {
                let lat = src.lattice()?;
                let (ch, ms) = timed(|| {
                    let area: usize = lat.sides[..lat.sides.len() - 1].iter().product();
                    let mut plus = m.clone();
                    plus.boundary = m.boundary.all_plus();
                    let r = spin::partition_function(&m)? / spin::partition_function(&plus)?;
                    let oracle = -r.ln() / area as f64;
                    Ok(Check::new(
                        "surface tension",
                        box_surface_tension(lat, beta)?,
                        oracle,
                    ))
                })?;
                rows.push(Row::check(&id(beta, ""), &ch, c.tol, ms));
            }
        }
    }
    Ok(rows)
}

fn or_default(v: &[usize], d: Vec<usize>) -> Vec<usize> {
    if v.is_empty() {
        d
    } else {
        v.to_vec()
    }
}

fn reflection_args(lat: &BoxLattice, x: &VerifyArgs) -> (usize, f64) {
    let axis = x.axis.unwrap_or(lat.dim() - 1);
    let plane = x
        .plane
        .unwrap_or_else(|| (lat.sides.get(axis).copied().unwrap_or(1) as f64 - 1.0) / 2.0);
    (axis, plane)
}

pub fn verify(what: VerifyKind, c: &Common, x: &VerifyArgs) -> CliResult<Vec<Row>> {
    if what == VerifyKind::Duality {
        return duality_rows(c, x);
    }
    let src = Source::load(c)?;
    let caps = c.caps.caps();
    let tol = c.tol;
    let mut rows = Vec::new();
    for beta in betas(c)? {
        let m = src.model(beta, caps)?;
        let last = m.n().saturating_sub(1);
        match what {
            VerifyKind::Switching => {
                let a1 = or_default(&x.a1, vec![0, last]);
                let a2 = x.a2.clone();
                let b = or_default(&x.switch, vec![0, last]);
                let all = if m.m() == 64 { u64::MAX } else { (1u64 << m.m()) - 1 };
                let tail = format!("a1={a1:?},a2={a2:?},b={b:?}").replace(' ', "");
                for f in [SupportFn::One, SupportFn::SupportSize] {
                    let (ch, ms) = timed(|| Ok(verify_switching(&m, all, &a1, &a2, &b, f)?))?;
                    rows.push(Row::check(&id(beta, &tail), &ch, tol, ms));
                }
            }
            VerifyKind::Xtoy => {
                for (u, v) in pairs(&c.sites, &m)? {
                    let (ch, ms) = timed(|| Ok(two_point_connection(&m, u, v)?))?;
                    rows.push(Row::check(&id(beta, &format!("x={u},y={v}")), &ch, tol, ms));
                }
            }
            VerifyKind::Ursell => {
                let q = quad(&c.sites, &m)?;
                let ((u, a, b), ms) = timed(|| {
                    let (a, b) = ursell4_via_currents(&m, q)?;
                    Ok((spin::ursell4(&m, q)?, a, b))
                })?;
                let tail = format!("x={},{},{},{}", q[0], q[1], q[2], q[3]);
                rows.push(Row::check(&id(beta, &tail), &Check::new("u4 connection form", u, a), tol, ms));
                rows.push(Row::check(&id(beta, &tail), &Check::new("u4 split form", u, b), tol, ms));
            }
            VerifyKind::Frustration => {
                let fm = m.with_couplings(m.couplings.flipped(&x.flips));
                let (ch, ms) = timed(|| Ok(frustrated_partition_ratio(&fm)?))?;
                rows.push(Row::check(&id(beta, ""), &ch, tol, ms));
                for (u, v) in pairs(&c.sites, &fm)? {
                    let tail = format!("x={u},y={v}");
                    let (ch, ms) = timed(|| Ok(frustrated_correlation(&fm, u, v)?))?;
                    rows.push(Row::check(&id(beta, &tail), &ch, tol, ms));
                    if fm.boundary.clamped().is_empty() {
                        let (r, ms) = timed(|| Ok(fk_frustration_adjusted(&fm, Some((u, v)))?))?;
                        rows.push(Row::check(&id(beta, &tail), &named(&r.partition, "fk frustration partition"), tol, ms));
                        if let Some(cc) = &r.correlation {
                            rows.push(Row::check(&id(beta, &tail), &named(cc, "fk frustration correlation"), tol, ms));
                        }
                    }
                }
            }
            VerifyKind::Boundary => {
                if m.boundary.clamped().is_empty() {
                    return Err(usage("boundary identities need clamped vertices"));
                }
                if !m.boundary.minus().is_empty() {
                    let (ch, ms) = timed(|| Ok(boundary_partition_ratio(&m)?))?;
                    rows.push(Row::check(&id(beta, ""), &ch, tol, ms));
                }
                let xs = or_default(&c.sites, free_vertices(&m));
                for v in xs {
                    let tail = format!("x={v}");
                    let (bm, ms) = timed(|| Ok(boundary_magnetization(&m, v)?))?;
                    rows.push(Row::check(&id(beta, &tail), &bm.plus, tol, ms));
                    if let Some(p) = &bm.pm {
                        rows.push(Row::check(&id(beta, &tail), p, tol, ms));
                    }
                    let (fk, ms) = timed(|| Ok(fk_boundary_identities(&m, v)?))?;
                    if let Some(p) = &fk.partition {
                        rows.push(Row::check(&id(beta, &tail), &named(p, "fk boundary partition"), tol, ms));
                    }
                    rows.push(Row::check(&id(beta, &tail), &named(&fk.plus, "fk plus magnetization"), tol, ms));
                    if let Some(p) = &fk.pm {
                        rows.push(Row::check(&id(beta, &tail), &named(p, "fk pm magnetization"), tol, ms));
                    }
                }
            }
            VerifyKind::Disorder => {
                let flips = or_default(&x.flips, vec![0]);
                let tail = format!("flips={flips:?}").replace(' ', "");
                let (r, ms) = timed(|| Ok(disorder_expectation(&m, &flips)?))?;
                rows.push(Row::check(&id(beta, &tail), &r.check(), tol, ms));
                rows.push(Row::check(
                    &id(beta, &tail),
                    &Check::new("disorder via frustration", r.oracle, r.via_frustration),
                    tol,
                    ms,
                ));
            }
            VerifyKind::Fold | VerifyKind::Dobrushin => {
                let lat = src.lattice()?;
                let (axis, plane) = reflection_args(lat, x);
                let rf = reflection_for_axis(lat, &m.couplings, axis, plane)?;
                let rm = rf.model()?.with_caps(caps);
                let sym = &rf.symmetry;
                if what == VerifyKind::Fold {
                    let not_upper: Vec<usize> = (0..rm.n()).filter(|&v| sym.side[v] != Side::Upper).collect();
                    let (x0, ys) = match c.sites.split_first() {
                        Some((&x0, ys)) => (x0, ys.to_vec()),
                        None => {
                            let x0 = *not_upper.first().ok_or_else(|| usage("no vertex below the plane"))?;
                            (x0, not_upper.iter().copied().filter(|&y| y != x0).collect())
                        }
                    };
                    for y in ys {
                        let (ch, ms) = timed(|| Ok(folded_correlation_identity(&rm, sym, x0, y)?))?;
                        rows.push(Row::check(&id(beta, &format!("x={x0},y={y}")), &ch, tol, ms));
                    }
                } else {
                    let xs = or_default(
                        &c.sites,
                        (0..rm.n())
                            .filter(|&v| sym.side[v] == Side::Plane && !rm.boundary.is_clamped(v))
                            .collect(),
                    );
                    for v in xs {
                        let tail = format!("x={v}");
                        let (r, ms) = timed(|| Ok(dobrushin_identities(&rm, sym, v)?))?;
                        rows.push(Row::check(&id(beta, &tail), &r.partition, tol, ms));
                        rows.push(Row::check(&id(beta, &tail), &r.magnetization, tol, ms));
                        rows.push(Row::bound(&id(beta, &tail), &r.van_beijeren, tol, ms));
                    }
                }
            }
            VerifyKind::Fkrcr => {
                for (u, v) in pairs(&c.sites, &m)? {
                    let (ch, ms) = timed(|| Ok(fk_rcr_bridge(&m, u, v)?))?;
                    rows.push(Row::check(&id(beta, &format!("x={u},y={v}")), &ch, tol, ms));
                }
            }
            VerifyKind::Pathprops => {
                let count = c.trials.unwrap_or(40);
                let (rep, ms) = timed(|| {
                    let tuples = sample_path_tuples(&m.graph, c.seed, count);
                    Ok(check_path_properties(&m, &tuples)?)
                })?;
                for ch in &rep.checks {
                    rows.push(Row::check(&id(beta, "paths"), ch, tol, ms));
                }
                for b in &rep.bounds {
                    rows.push(Row::bound(&id(beta, "paths"), b, tol, ms));
                }
                for (u, v) in pairs(&c.sites, &m)? {
                    let ((tot, worst, corr), ms) = timed(|| {
                        let groups = backbone_grouping(&m, &[u, v])?;
                        let mut tot = Neumaier::new();
                        let mut worst = 0.0f64;
                        for (paths, w) in &groups {
                            let specs: Vec<_> = paths.iter().map(|p| p.spec()).collect();
                            worst = worst.max((rho_weight(&m, &specs)?.rho - w).abs());
                            tot.add(*w);
                        }
                        Ok((tot.value(), worst, spin::expectation(&m, &[u, v])?))
                    })?;
                    let tail = format!("x={u},y={v}");
                    rows.push(Row::check(&id(beta, &tail), &Check::new("backbone completeness", tot, corr), tol, ms));
                    rows.push(Row::check(&id(beta, &tail), &Check::new("backbone rho mismatch", worst, 0.0), tol, ms));
                }
            }
            VerifyKind::Duality => unreachable!(),
        }
    }
    Ok(rows)
}

fn named(c: &Check, q: &str) -> Check {
    Check::new(q, c.lhs, c.rhs)
}

fn complex(dim: usize, cells: &str, caps: Caps) -> CliResult<PlaquetteComplex> {
    Ok(PlaquetteComplex::new(dim, &parse_cells(cells, dim)?)?.with_caps(caps))
}

fn origin_square(c: &PlaquetteComplex, ell: usize) -> CliResult<WilsonLoop> {
    Ok(WilsonLoop::square(c, &vec![0; c.dim], (0, 1), ell)?)
}

fn duality_rows(c: &Common, x: &VerifyArgs) -> CliResult<Vec<Row>> {
    let cx = complex(3, &x.cells, c.caps.caps())?;
    let l = origin_square(&cx, 1)?;
    let mut rows = Vec::new();
    for beta in betas(c)? {
        let (r, ms) = timed(|| Ok(verify_duality(&cx, beta, &l.surface)?))?;
        let tail = format!("cells={}", x.cells);
        rows.push(Row::relative(&id(beta, &tail), &r.partition, c.tol, ms));
        if let Some(w) = &r.wilson {
            rows.push(Row::check(&id(beta, &tail), w, c.tol, ms));
        }
    }
    Ok(rows)
}

/// Dual couplings printed to stdout, one per line.
pub fn dual_beta_lines(c: &Common) -> CliResult<(Vec<String>, Vec<Row>)> {
    let mut lines = Vec::new();
    let mut rows = Vec::new();
    for beta in betas(c)? {
        let ((bs, back), ms) = timed(|| {
            let bs = dual_beta(beta)?;
            Ok((bs, dual_beta(bs)?))
        })?;
        lines.push(format!("{bs:.7}"));
        rows.push(Row::check(&id(beta, ""), &Check::new("dual beta involution", back, beta), c.tol, ms));
    }
    Ok((lines, rows))
}

fn deconfinement_rows(beta: f64, tail: &str, r: &DeconfinementReport, tol: f64, ms: f64) -> Vec<Row> {
    r.chain.iter().map(|b| Row::bound(&id(beta, tail), b, tol, ms)).collect()
}

pub fn gauge(what: GaugeKind, c: &Common, g: &GaugeArgs) -> CliResult<Vec<Row>> {
    if what == GaugeKind::Dualcheck {
        let x = VerifyArgs {
            cells: g.cells.clone(),
            ..Default::default()
        };
        return duality_rows(c, &x);
    }
    let caps = c.caps.caps();
    let tol = c.tol;
    let mut rows = Vec::new();
    let tail = format!("d={},cells={},ell={}", g.dim, g.cells, g.ell);
    for beta in betas(c)? {
        match what {
            GaugeKind::Z => {
                let cx = complex(g.dim, &g.cells, caps)?;
                let (ch, ms) = timed(|| {
                    let z = lgm_partition(&cx, beta)?;
                    let rhs = if g.dim == 2 {
                        beta.cosh().powi(cx.num_plaquettes() as i32)
                    } else {
                        match gauge_field_oracle(&cx, beta, &[], None) {
                            Ok((zo, _)) => zo,
                            Err(ising_rc::Error::Size { .. }) => verify_duality(&cx, beta, &[0])?.partition.rhs,
                            Err(e) => return Err(e.into()),
                        }
                    };
                    Ok(Check::new("lgm partition", z, rhs))
                })?;
                rows.push(Row::relative(&id(beta, &tail), &ch, tol, ms));
            }
            GaugeKind::Wilson => {
                let cx = complex(g.dim, &g.cells, caps)?;
                let l = origin_square(&cx, g.ell)?;
                let (ch, ms) = timed(|| {
                    let w = wilson_expectation(&cx, beta, &l)?;
                    let rhs = if g.dim == 2 {
                        beta.tanh().powi((g.ell * g.ell) as i32)
                    } else {
                        match gauge_field_oracle(&cx, beta, &l.edges, None) {
                            Ok((_, w)) => w,
                            Err(ising_rc::Error::Size { .. }) => verify_duality(&cx, beta, &l.surface)?
                                .wilson
                                .map_or(0.0, |w| w.rhs),
                            Err(e) => return Err(e.into()),
                        }
                    };
                    Ok(Check::new("wilson loop", w, rhs))
                })?;
                rows.push(Row::check(&id(beta, &tail), &ch, tol, ms));
            }
            GaugeKind::Deconfine => {
                let (r, ms) = if g.dim == 2 {
                    let sides = parse_cells(&g.cells, 2)?;
                    let lat = generate_box_lattice(2, &sides, BoxBoundary::Free)?;
                    timed(|| {
                        let geom = DeconfinementGeometry::box_segment(&lat, g.ell)?;
                        Ok(deconfinement_chain(&lat.model(beta)?.with_caps(caps), &geom)?)
                    })?
                } else {
                    let cx = complex(g.dim, &g.cells, caps)?;
                    let l = origin_square(&cx, g.ell)?;
                    timed(|| Ok(deconfinement_bound_report(&cx, beta, &l)?))?
                };
                rows.extend(deconfinement_rows(beta, &tail, &r, tol, ms));
            }
            GaugeKind::Dualbeta | GaugeKind::Dualcheck => unreachable!(),
        }
    }
    Ok(rows)
}

fn chain_spec(c: &Common, ch: &ChainArgs) -> ChainSpec {
    let mut s = ChainSpec::new(c.seed, ch.sweeps);
    if let Some(b) = ch.burn_in {
        s.burn_in = b;
    }
    s.thin = ch.thin;
    s.chains = ch.chains;
    s
}

pub fn sample(what: SampleKind, c: &Common, ch: &ChainArgs) -> CliResult<Vec<Row>> {
    let src = Source::load(c)?;
    let caps = c.caps.caps();
    let spec = chain_spec(c, ch);
    let mut rows = Vec::new();
    for beta in betas(c)? {
        let m = src.model(beta, caps)?;
        let push = |rows: &mut Vec<Row>, tail: String, q: &str, e: &EstimatorResult, exact: f64, ms: f64| {
            rows.push(Row::estimate(&id(beta, &tail), q, e.mean, e.stderr, exact, Z_SCORE, ms));
        };
        match what {
            SampleKind::Metropolis | SampleKind::Sw => {
                let obs: Vec<Vec<usize>> = if c.sites.is_empty() {
                    pairs(&[], &m)?.into_iter().map(|(u, v)| vec![u, v]).collect()
                } else {
                    vec![c.sites.clone()]
                };
                let exact = spin::gibbs(&m, &obs)?.expectations;
                let (est, ms) = timed(|| {
                    Ok(if what == SampleKind::Metropolis {
                        metropolis_spin(&m, &obs, &spec)?
                    } else {
                        swendsen_wang(&m, &obs, &[], &spec)?
                    })
                })?;
                let q = if what == SampleKind::Metropolis { "metropolis" } else { "swendsen-wang" };
                for ((a, e), x) in obs.iter().zip(&est).zip(&exact) {
                    push(&mut rows, format!("sites={a:?}").replace(' ', ""), q, e, *x, ms);
                }
            }
            SampleKind::Currents => {
                for (u, v) in pairs(&c.sites, &m)? {
                    let (s, ms) = timed(|| Ok(current_rejection_sampler(&m, &[], &[], &Event::Connected(u, v), &spec)?))?;
                    let corr = spin::expectation(&m, &[u, v])?;
                    push(&mut rows, format!("x={u},y={v}"), "double current connection", &s.estimate, corr * corr, ms);
                }
            }
        }
    }
    Ok(rows)
}

pub struct IneqOutcome {
    pub rows: Vec<Row>,
    pub worst: Option<Instance>,
}

pub fn ineq(kind: IneqKind, c: &Common) -> CliResult<IneqOutcome> {
    let suite = suite_of(kind);
    let budget = c.trials.unwrap_or(100);
    let t = Instant::now();
    let res = run_suite(suite, c.seed, budget)?;
    let ms = elapsed_ms(t) / res.reports.len().max(1) as f64;
    let rows = res.reports.iter().map(|r| Row::ineq(r, ms)).collect();
    Ok(IneqOutcome { rows, worst: res.worst })
}

fn suite_of(k: IneqKind) -> Suite {
    match k {
        IneqKind::Griffiths => Suite::Griffiths,
        IneqKind::Ghs => Suite::Ghs,
        IneqKind::Simonlieb => Suite::SimonLieb,
        IneqKind::Dss => Suite::Dss,
        IneqKind::Smms => Suite::Smms,
        IneqKind::Vanbeijeren => Suite::VanBeijeren,
        IneqKind::Tree => Suite::Tree,
    }
}

pub fn replay(file: &Path, tol: f64) -> CliResult<Vec<Row>> {
    let text = std::fs::read_to_string(file).map_err(io_err(file))?;
    let inst = Instance::parse(&text)?;
    let suite = inst.suite;
    let (reps, ms) = timed(|| Ok(suite.check(&inst)?))?;
    Ok(reps
        .iter()
        .map(|r| {
            let mut row = Row::ineq(r, ms);
            if r.asserted {
                row.verdict = crate::output::Verdict::of(r.slack >= -tol);
            }
            row
        })
        .collect())
}

pub fn write_worst(path: &Path, inst: &Instance) -> CliResult<()> {
    std::fs::write(path, inst.to_text()).map_err(io_err(path))
}

impl From<std::io::Error> for CliError {
    fn from(source: std::io::Error) -> Self {
        CliError::Io {
            path: "<stdio>".into(),
            source,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_strings() {
        let (d, s, bc) = parse_lattice("box:d=2,L=3x4,bc=pm").unwrap();
        assert_eq!((d, s, bc), (2, vec![3, 4], BoxBoundary::PlusMinus));
        let (d, s, _) = parse_lattice("box:d=3,L=2,3,4,bc=free").unwrap();
        assert_eq!((d, s), (3, vec![2, 3, 4]));
        let (d, s, bc) = parse_lattice("box:d=2,L=2,bc=free").unwrap();
        assert_eq!((d, s, bc), (2, vec![2, 2], BoxBoundary::Free));
        assert!(parse_lattice("grid:d=2,L=2").is_err());
        assert!(parse_lattice("box:d=2,L=2,bc=wired").is_err());
    }

    #[test]
    fn sweeps_are_inclusive() {
        let v = parse_sweep("0.1:0.5:0.1").unwrap();
        assert_eq!(v.len(), 5);
        assert!((v[4] - 0.5).abs() < 1e-12);
        assert!(parse_sweep("1:0:0.1").is_err());
        assert!(parse_sweep("0:1").is_err());
    }
}
