//! Correlation inequalities checked on seeded random instances.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::backbone::tree_diagram_check;
use crate::check::{Bound, Check};
use crate::currents::{dobrushin_identities, fold_connection_probability};
use crate::error::{Error, Result};
use crate::graph::{ghost_augment, Couplings, FieldSpec, Graph, GraphFile, Model};
use crate::lattice::{generate_box_lattice, reflection_for_axis, BoxBoundary, Side};
use crate::spin;

pub const DEFAULT_TOL: f64 = 1e-10;

/// One inequality (or identity) evaluated on one instance. For identities
/// the slack is `-|lhs - rhs|`.
#[derive(Clone, Debug, PartialEq)]
pub struct IneqReport {
    pub id: String,
    pub instance: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
    /// Reported-only rows never fail a suite.
    pub asserted: bool,
}

impl IneqReport {
    pub fn from_bound(id: &str, instance: &str, b: &Bound, tol: f64) -> Self {
        Self {
            id: id.into(),
            instance: instance.into(),
            lhs: b.lhs,
            rhs: b.rhs,
            slack: b.slack(),
            pass: b.passes(tol),
            asserted: true,
        }
    }

    pub fn from_check(id: &str, instance: &str, c: &Check, tol: f64) -> Self {
        Self {
            id: id.into(),
            instance: instance.into(),
            lhs: c.lhs,
            rhs: c.rhs,
            slack: -c.abs_diff(),
            pass: c.passes(tol),
            asserted: true,
        }
    }

    fn reported(mut self) -> Self {
        self.asserted = false;
        self
    }
}

/// Box geometry of a lattice instance.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxSpec {
    pub sides: Vec<usize>,
    pub bc: BoxBoundary,
    pub axis: usize,
    pub plane: f64,
}

/// A replayable instance: a graph file at inverse temperature `beta`
/// plus site lists, or a box with uniform couplings.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub name: String,
    pub suite: Suite,
    pub beta: f64,
    pub file: GraphFile,
    pub sites: Vec<Vec<usize>>,
    pub lattice: Option<BoxSpec>,
}

fn bc_name(bc: BoxBoundary) -> &'static str {
    match bc {
        BoxBoundary::Free => "free",
        BoxBoundary::Plus => "plus",
        BoxBoundary::PlusMinus => "pm",
    }
}

impl Instance {
    pub fn model(&self) -> Result<Model> {
        self.file.model(self.beta)
    }

    /// Graph file text with a `# instance` header carrying the rest.
    pub fn to_text(&self) -> String {
        let sites: Vec<String> = self
            .sites
            .iter()
            .map(|s| s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        let mut s = format!(
            "# instance name={} suite={} beta={:e} sites={}",
            self.name,
            self.suite.name(),
            self.beta,
            sites.join(";")
        );
        if let Some(b) = &self.lattice {
            let sides: Vec<String> = b.sides.iter().map(|x| x.to_string()).collect();
            let _ = write!(s, " box={}:{}:{}:{:e}", sides.join("x"), bc_name(b.bc), b.axis, b.plane);
        }
        s.push('\n');
        s.push_str(&self.file.to_text());
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::Parse { line: 1, msg };
        let header = text
            .lines()
            .find_map(|l| l.trim().strip_prefix("# instance"))
            .ok_or_else(|| bad("missing '# instance' header".into()))?;
        let (mut name, mut suite, mut beta, mut sites, mut lattice) = (None, None, None, Vec::new(), None);
        for tok in header.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got '{tok}'")))?;
            match k {
                "name" => name = Some(v.to_string()),
                "suite" => suite = Some(Suite::parse(v).ok_or_else(|| bad(format!("unknown suite '{v}'")))?),
                "beta" => beta = Some(v.parse::<f64>().map_err(|_| bad(format!("bad beta '{v}'")))?),
                "sites" => {
                    for part in v.split(';') {
                        let list: std::result::Result<Vec<usize>, _> =
                            part.split(',').filter(|x| !x.is_empty()).map(str::parse).collect();
                        sites.push(list.map_err(|_| bad(format!("bad site list '{part}'")))?);
                    }
                }
                "box" => {
                    let p: Vec<&str> = v.split(':').collect();
                    if p.len() != 4 {
                        return Err(bad(format!("bad box spec '{v}'")));
                    }
                    let sides: std::result::Result<Vec<usize>, _> = p[0].split('x').map(str::parse).collect();
                    lattice = Some(BoxSpec {
                        sides: sides.map_err(|_| bad(format!("bad sides '{}'", p[0])))?,
                        bc: BoxBoundary::parse(p[1]).ok_or_else(|| bad(format!("bad boundary '{}'", p[1])))?,
                        axis: p[2].parse().map_err(|_| bad(format!("bad axis '{}'", p[2])))?,
                        plane: p[3].parse().map_err(|_| bad(format!("bad plane '{}'", p[3])))?,
                    });
                }
                _ => return Err(bad(format!("unknown key '{k}'"))),
            }
        }
        Ok(Self {
            name: name.unwrap_or_default(),
            suite: suite.ok_or_else(|| bad("missing suite".into()))?,
            beta: beta.ok_or_else(|| bad("missing beta".into()))?,
            file: GraphFile::parse(text)?,
            sites,
            lattice,
        })
    }

    fn site(&self, i: usize) -> Result<&[usize]> {
        self.sites
            .get(i)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Precondition(format!("instance lacks site list {i}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Suite {
    Griffiths,
    Ghs,
    SimonLieb,
    Dss,
    Smms,
    VanBeijeren,
    Tree,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Griffiths,
        Suite::Ghs,
        Suite::SimonLieb,
        Suite::Dss,
        Suite::Smms,
        Suite::VanBeijeren,
        Suite::Tree,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Griffiths => "griffiths",
            Suite::Ghs => "ghs",
            Suite::SimonLieb => "simonlieb",
            Suite::Dss => "dss",
            Suite::Smms => "smms",
            Suite::VanBeijeren => "vanbeijeren",
            Suite::Tree => "tree",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }

    /// Random instance number `i` of a run seeded with `seed`.
    pub fn generate(self, seed: u64, i: u64) -> Result<Instance> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
        let name = format!("{}-{i}", self.name());
        match self {
            Suite::Smms => smms_instance(&mut rng, name),
            Suite::VanBeijeren => vanb_instance(&mut rng, name),
            Suite::Tree => Ok(tree_instance(&mut rng, name)),
            _ => Ok(graph_instance(self, &mut rng, name)),
        }
    }

    pub fn check(self, inst: &Instance) -> Result<Vec<IneqReport>> {
        let tol = DEFAULT_TOL;
        match self {
            Suite::Griffiths => griffiths_checks(inst, tol),
            Suite::Ghs => ghs_checks(inst, tol),
            Suite::SimonLieb => simon_lieb_checks(inst, tol),
            Suite::Dss => dss_checks(inst, tol),
            Suite::Smms => smms_checks(inst, tol),
            Suite::VanBeijeren => vanb_checks(inst, tol),
            Suite::Tree => tree_checks(inst, tol),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub suite: Suite,
    pub reports: Vec<IneqReport>,
    /// Instance holding the smallest asserted slack.
    pub worst: Option<Instance>,
}

impl SuiteResult {
    pub fn min_slack(&self) -> f64 {
        self.reports
            .iter()
            .filter(|r| r.asserted)
            .map(|r| r.slack)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn passes(&self) -> bool {
        self.reports.iter().all(|r| !r.asserted || r.pass)
    }

    pub fn violations(&self) -> usize {
        self.reports.iter().filter(|r| r.asserted && !r.pass).count()
    }
}

/// Runs `budget` seeded instances in parallel; reports keep instance order.
pub fn run_suite(suite: Suite, seed: u64, budget: usize) -> Result<SuiteResult> {
    let per: Vec<(Instance, Vec<IneqReport>)> = (0..budget as u64)
        .into_par_iter()
        .map(|i| {
            let inst = suite.generate(seed, i)?;
            let reps = suite.check(&inst)?;
            Ok((inst, reps))
        })
        .collect::<Result<_>>()?;
    let mut worst: Option<(f64, Instance)> = None;
    let mut reports = Vec::new();
    for (inst, reps) in per {
        let s = reps
            .iter()
            .filter(|r| r.asserted)
            .map(|r| r.slack)
            .fold(f64::INFINITY, f64::min);
        if worst.as_ref().is_none_or(|(w, _)| s < *w) {
            worst = Some((s, inst));
        }
        reports.extend(reps);
    }
    Ok(SuiteResult {
        suite,
        reports,
        worst: worst.map(|(_, i)| i),
    })
}

/// At most six vertices, `βJ ∈ [0, 1.5]`, fields in `[0, 1]`.
fn random_file(rng: &mut ChaCha8Rng, field: bool, g_field: bool) -> GraphFile {
    let n = rng.gen_range(2..=6);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(0.5) {
                edges.push((u, v));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, 1));
    }
    let j = edges.iter().map(|_| rng.gen_range(0.0..=1.5)).collect();
    let mut f = FieldSpec::zero(n);
    if field {
        for h in &mut f.h {
            *h = rng.gen_range(0.0..=1.0);
        }
    }
    if g_field {
        for g in &mut f.g {
            *g = rng.gen_range(-1.0..=1.0);
        }
    }
    GraphFile {
        graph: Graph::from_edges(n, &edges).expect("valid random graph"),
        j,
        field: f,
        boundary: Default::default(),
    }
}

fn distinct(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    v.shuffle(rng);
    v.truncate(k);
    v
}

fn graph_instance(suite: Suite, rng: &mut ChaCha8Rng, name: String) -> Instance {
    let with_field = suite == Suite::Dss || (suite == Suite::Griffiths && rng.gen_bool(0.5));
    let file = random_file(rng, with_field, suite == Suite::Dss);
    let n = file.graph.num_vertices();
    let sites = match suite {
        Suite::Griffiths => {
            let (k1, k2) = (rng.gen_range(1..=3.min(n)), rng.gen_range(1..=3.min(n)));
            vec![distinct(rng, n, k1), distinct(rng, n, k2)]
        }
        Suite::Ghs => vec![(0..4).map(|_| rng.gen_range(0..n)).collect()],
        Suite::SimonLieb => {
            let xy = distinct(rng, n, 2);
            let mut s: Vec<usize> = file.graph.incident(xy[0]).iter().map(|&b| file.graph.other(b, xy[0])).collect();
            for v in 0..n {
                if v != xy[0] && rng.gen_bool(0.25) {
                    s.push(v);
                }
            }
            s.sort_unstable();
            s.dedup();
            vec![xy, s]
        }
        _ => vec![distinct(rng, n, 2)],
    };
    Instance {
        name,
        suite,
        beta: 1.0,
        file,
        sites,
        lattice: None,
    }
}

fn tree_instance(rng: &mut ChaCha8Rng, name: String) -> Instance {
    let n = rng.gen_range(3..=6);
    let edges: Vec<(usize, usize)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    let graph = Graph::from_edges(n, &edges).expect("valid tree");
    let xy = distinct(rng, n, 2);
    // vertices strictly between x and y
    let mut parent = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::from([xy[0]]);
    parent[xy[0]] = xy[0];
    while let Some(u) = queue.pop_front() {
        for &b in graph.incident(u) {
            let w = graph.other(b, u);
            if parent[w] == usize::MAX {
                parent[w] = u;
                queue.push_back(w);
            }
        }
    }
    let mut between = Vec::new();
    let mut at = parent[xy[1]];
    while at != xy[0] {
        between.push(at);
        at = parent[at];
    }
    let cut = between.choose(rng).copied().unwrap_or(xy[1]);
    let four = (0..4).map(|_| rng.gen_range(0..n)).collect();
    Instance {
        name,
        suite: Suite::Tree,
        beta: 1.0,
        file: GraphFile {
            j: edges.iter().map(|_| rng.gen_range(0.0..=1.5)).collect(),
            graph,
            field: FieldSpec::zero(n),
            boundary: Default::default(),
        },
        sites: vec![xy, vec![cut], four],
        lattice: None,
    }
}

/// On a tree a single cut vertex saturates the site form.
fn tree_checks(inst: &Instance, tol: f64) -> Result<Vec<IneqReport>> {
    let m = inst.model()?;
    let (xy, s) = (inst.site(0)?, inst.site(1)?);
    let b = simon_lieb_site(&m, xy[0], xy[1], s)?;
    let four: [usize; 4] = inst
        .site(2)?
        .try_into()
        .map_err(|_| Error::Precondition("tree bound needs four sites".into()))?;
    let t = tree_diagram_check(&m, four)?;
    Ok(vec![
        IneqReport::from_check(
            "tree-saturation",
            &inst.name,
            &Check::new("simon-lieb on a tree", b.lhs, b.rhs),
            tol.min(1e-12),
        ),
        IneqReport::from_bound("tree-diagram", &inst.name, &t, tol.min(1e-12)),
    ])
}

fn griffiths_checks(inst: &Instance, tol: f64) -> Result<Vec<IneqReport>> {
    let m = inst.model()?;
    if !m.couplings.is_ferromagnetic() || m.field.iter().any(|&h| h < 0.0) {
        return Err(Error::Precondition("Griffiths needs J >= 0 and h >= 0".into()));
    }
    let (a1, a2) = (inst.site(0)?, inst.site(1)?);
    let both: Vec<usize> = a1.iter().chain(a2).copied().collect();
    let e = spin::gibbs(&m, &[a1.to_vec(), a2.to_vec(), both])?.expectations;
    Ok(vec![
        IneqReport::from_bound("griffiths-1", &inst.name, &Bound::new("griffiths-1", 0.0, e[0]), tol),
        IneqReport::from_bound("griffiths-2", &inst.name, &Bound::new("griffiths-2", e[0] * e[1], e[2]), tol),
    ])
}

/// Largest second difference of `<sigma_x>` over the uniform-field grid.
pub fn magnetization_curvature(model: &Model, x: usize, grid: &[f64]) -> Result<f64> {
    let m: Vec<f64> = grid
        .iter()
        .map(|&h| spin::expectation(&model.clone().with_field(vec![h; model.n()])?, &[x]))
        .collect::<Result<_>>()?;
    Ok(m.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).fold(f64::NEG_INFINITY, f64::max))
}

fn ghs_checks(inst: &Instance, tol: f64) -> Result<Vec<IneqReport>> {
    let m = inst.model()?;
    let x = inst.site(0)?;
    let x: [usize; 4] = x
        .try_into()
        .map_err(|_| Error::Precondition("GHS needs four sites".into()))?;
    let u4 = spin::ursell4(&m, x)?;
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let curv = magnetization_curvature(&m, x[0], &grid)?;
    let e = spin::gibbs(&m, &[vec![x[0], x[1]], vec![x[0], x[2]], vec![x[0], x[3]]])?.expectations;
    let prod = e[0] * e[1] * e[2];
    let n = &inst.name;
    Ok(vec![
        IneqReport::from_bound("ghs-u4", n, &Bound::new("-U4 >= 0", 0.0, -u4), tol),
        IneqReport::from_bound("ghs-convexity", n, &Bound::new("second difference", curv, 0.0), tol),
        IneqReport::from_bound("ghs-strong-half", n, &Bound::new("-U4/2", prod, -u4 / 2.0), tol).reported(),
        IneqReport::from_bound("ghs-strong-quarter", n, &Bound::new("-U4/4", prod, -u4 / 4.0), tol).reported(),
    ])
}

/// Model on `keep` with interactions restricted to edges inside it, minus
/// the edges joining two vertices of `drop_between`.
fn submodel(model: &Model, keep: &[bool], drop_between: &[bool]) -> Result<(Model, Vec<Option<usize>>)> {
    let g = &model.graph;
    let mut vmap = vec![None; g.num_vertices()];
    let mut n = 0;
    for v in 0..g.num_vertices() {
        if keep[v] {
            vmap[v] = Some(n);
            n += 1;
        }
    }
    let mut sub = Graph::new(n);
    let mut j = Vec::new();
    for (b, &(u, v)) in g.edges().iter().enumerate() {
        if let (Some(a), Some(c)) = (vmap[u], vmap[v]) {
            if !(drop_between[u] && drop_between[v]) {
                sub.add_edge(a, c)?;
                j.push(model.couplings.j[b]);
            }
        }
    }
    Ok((Model::new(sub, Couplings::new(j, model.couplings.beta))?, vmap))
}

fn require_plain_ferro(model: &Model) -> Result<()> {
    if model.couplings.is_ferromagnetic() && !model.has_field() && model.boundary.clamped().is_empty() {
        Ok(())
    } else {
        Err(Error::Precondition(
            "ferromagnetic couplings, zero field and free boundary required".into(),
        ))
    }
}

/// Site form: `<xy> <= Σ_{u∈S} <xu>_{G_{S,x}} <uy>` for a cut set `S`.
pub fn simon_lieb_site(model: &Model, x: usize, y: usize, s: &[usize]) -> Result<Bound> {
    require_plain_ferro(model)?;
    model.check_vertices(&[x, y])?;
    model.check_vertices(s)?;
    let n = model.n();
    let mut in_s = vec![false; n];
    for &u in s {
        in_s[u] = true;
    }
    if in_s[x] {
        return Err(Error::Precondition("x must not lie in S".into()));
    }
    let g = &model.graph;
    let inner = g.reachable(x, |b| {
        let (u, v) = g.edge(b);
        !in_s[u] && !in_s[v]
    });
    if inner[y] {
        return Err(Error::Precondition("S does not separate x from y".into()));
    }
    let mut keep = inner.clone();
    for v in 0..n {
        if in_s[v] && g.incident(v).iter().any(|&b| inner[g.other(b, v)]) {
            keep[v] = true;
        }
    }
    let (sub, vmap) = submodel(model, &keep, &in_s)?;
    let mut obs_sub = Vec::new();
    let mut obs_full = vec![vec![x, y]];
    let terms: Vec<usize> = s.iter().copied().filter(|&u| vmap[u].is_some()).collect();
    for &u in &terms {
        obs_sub.push(vec![vmap[x].expect("x kept"), vmap[u].expect("u kept")]);
        obs_full.push(vec![u, y]);
    }
    let full = spin::gibbs(model, &obs_full)?.expectations;
    let part = spin::gibbs(&sub, &obs_sub)?.expectations;
    let rhs = part.iter().zip(&full[1..]).map(|(a, b)| a * b).sum();
    Ok(Bound::new("simon-lieb site", full[0], rhs))
}

/// Edge form: `<xy> <= Σ_{u∈B, v∉B} <xu>_B tanh(K_uv) <vy>`.
pub fn simon_lieb_edge(model: &Model, x: usize, y: usize, b_set: &[usize]) -> Result<Bound> {
    require_plain_ferro(model)?;
    model.check_vertices(&[x, y])?;
    model.check_vertices(b_set)?;
    let n = model.n();
    let mut in_b = vec![false; n];
    for &u in b_set {
        in_b[u] = true;
    }
    if !in_b[x] || in_b[y] {
        return Err(Error::Precondition("B must contain x and not y".into()));
    }
    let (sub, vmap) = submodel(model, &in_b, &vec![false; n])?;
    let g = &model.graph;
    let mut obs_sub = Vec::new();
    let mut obs_full = vec![vec![x, y]];
    let mut tanh = Vec::new();
    for (b, &(u, v)) in g.edges().iter().enumerate() {
        let (inside, outside) = match (in_b[u], in_b[v]) {
            (true, false) => (u, v),
            (false, true) => (v, u),
            _ => continue,
        };
        obs_sub.push(vec![vmap[x].expect("x in B"), vmap[inside].expect("inside B")]);
        obs_full.push(vec![outside, y]);
        tanh.push(model.k(b).tanh());
    }
    let full = spin::gibbs(model, &obs_full)?.expectations;
    let part = spin::gibbs(&sub, &obs_sub)?.expectations;
    let rhs = (0..tanh.len()).map(|i| part[i] * tanh[i] * full[i + 1]).sum();
    Ok(Bound::new("simon-lieb edge", full[0], rhs))
}

fn simon_lieb_checks(inst: &Instance, tol: f64) -> Result<Vec<IneqReport>> {
    let m = inst.model()?;
    let (xy, s) = (inst.site(0)?, inst.site(1)?);
    let (x, y) = (xy[0], xy[1]);
    let site = simon_lieb_site(&m, x, y, s)?;
    let mut in_s = vec![false; m.n()];
    for &u in s {
        in_s[u] = true;
    }
    let g = &m.graph;
    let inner = g.reachable(x, |b| {
        let (u, v) = g.edge(b);
        !in_s[u] && !in_s[v]
    });
    let b_set: Vec<usize> = (0..m.n()).filter(|&v| inner[v]).collect();
    let edge = simon_lieb_edge(&m, x, y, &b_set)?;
    Ok(vec![
        IneqReport::from_bound("simon-lieb-site", &inst.name, &site, tol),
        IneqReport::from_bound("simon-lieb-edge", &inst.name, &edge, tol),
    ])
}

/// `<σ_x>_{g+h} - <σ_x>_{g-h} <= <σ_x>_h - <σ_x>_{-h}` for `h >= 0`.
pub fn dss_bound(graph: &Graph, j: &[f64], beta: f64, f: &FieldSpec, x: usize) -> Result<Bound> {
    if f.h.iter().any(|&h| h < 0.0) {
        return Err(Error::Precondition("DSS needs h >= 0".into()));
    }
    let base = Model::new(graph.clone(), Couplings::new(j.to_vec(), beta))?;
    if !base.couplings.is_ferromagnetic() {
        return Err(Error::Precondition("ferromagnetic couplings required".into()));
    }
    let mag = |sh: f64, sg: f64| spin::expectation(&base.clone().with_field(f.combined(sh, sg))?, &[x]);
    Ok(Bound::new(
        "dss",
        mag(1.0, 1.0)? - mag(-1.0, 1.0)?,
        mag(1.0, 0.0)? - mag(-1.0, 0.0)?,
    ))
}

/// The ghost-vertex form `<σ_x σ_𝔤>_{h+g} + <σ_x σ_𝔤>_{h-g} <= 2 <σ_x σ_𝔤>_h`.
pub fn dss_ghost_bound(graph: &Graph, j: &[f64], beta: f64, f: &FieldSpec, x: usize) -> Result<Bound> {
    if f.h.iter().any(|&h| h < 0.0) {
        return Err(Error::Precondition("DSS needs h >= 0".into()));
    }
    let gg = ghost_augment(graph, f)?;
    let corr = |sg: f64| {
        let m = Model::new(gg.graph.clone(), gg.couplings(j, beta, 1.0, sg))?;
        spin::expectation(&m, &[x, gg.ghost])
    };
    Ok(Bound::new("dss ghost", corr(1.0)? + corr(-1.0)?, 2.0 * corr(0.0)?))
}

fn dss_checks(inst: &Instance, tol: f64) -> Result<Vec<IneqReport>> {
    let xy = inst.site(0)?;
    let (x, y) = (xy[0], xy[1]);
    let f = &inst.file;
    let one = dss_bound(&f.graph, &f.j, inst.beta, &f.field, x)?;
    let four = dss_ghost_bound(&f.graph, &f.j, inst.beta, &f.field, x)?;
    let base = Model::new(f.graph.clone(), Couplings::new(f.j.clone(), inst.beta))?;
    let at_g = spin::truncated_pair(&base.clone().with_field(f.field.g.clone())?, x, y)?;
    let at_0 = spin::truncated_pair(&base, x, y)?;
    let n = &inst.name;
    Ok(vec![
        IneqReport::from_bound("dss", n, &one, tol),
        IneqReport::from_bound("dss-ghost", n, &four, tol),
        IneqReport::from_bound("dss-truncated-presumed", n, &Bound::new("truncated", at_g, at_0), tol),
    ])
}

fn smms_instance(rng: &mut ChaCha8Rng, name: String) -> Result<Instance> {
    let spec = BoxSpec {
        sides: vec![3, 4],
        bc: BoxBoundary::Free,
        axis: 0,
        plane: 1.0,
    };
    let lat = generate_box_lattice(2, &spec.sides, spec.bc)?;
    let beta = rng.gen_range(0.0..=1.5);
    let rf = reflection_for_axis(&lat, &lat.unit_couplings(beta), spec.axis, spec.plane)?;
    let side: Vec<usize> = (0..lat.graph.num_vertices())
        .filter(|&v| rf.symmetry.side[v] != Side::Upper)
        .collect();
    let x = *side.choose(rng).expect("nonempty side");
    let y = *side.choose(rng).expect("nonempty side");
    Ok(Instance {
        name,
        suite: Suite::Smms,
        beta,
        file: GraphFile::from_model(&rf.model()?),
        sites: vec![vec![x, y]],
        lattice: Some(spec),
    })
}

fn smms_checks(inst: &Instance, tol: f64) -> Result<Vec<IneqReport>> {
    let spec = inst
        .lattice
        .as_ref()
        .ok_or_else(|| Error::Precondition("reflection instance needs a box".into()))?;
    let lat = generate_box_lattice(spec.sides.len(), &spec.sides, spec.bc)?;
    let rf = reflection_for_axis(&lat, &lat.unit_couplings(inst.beta), spec.axis, spec.plane)?;
    let m = rf.model()?;
    let xy = inst.site(0)?;
    let (x, y) = (xy[0], xy[1]);
    let r = &rf.symmetry;
    if matches!(
        (r.side[x], r.side[y]),
        (Side::Lower, Side::Upper) | (Side::Upper, Side::Lower)
    ) {
        return Err(Error::Precondition("sites on opposite sides".into()));
    }
    let e = spin::gibbs(&m, &[vec![x, y], vec![x, r.map[y]]])?.expectations;
    let mut out = vec![IneqReport::from_bound(
        "smms",
        &inst.name,
        &Bound::new("smms", e[1], e[0]),
        tol,
    )];
    if e[0] > 0.0 {
        let p = fold_connection_probability(&m, r, &[x, y], &[y], &r.plane())?;
        let c = Check::new("smms remainder", (e[0] - e[1]) / e[0], 1.0 - p);
        out.push(IneqReport::from_check("smms-remainder", &inst.name, &c, tol));
    }
    Ok(out)
}

fn vanb_instance(rng: &mut ChaCha8Rng, name: String) -> Result<Instance> {
    let spec = BoxSpec {
        sides: vec![3, 3],
        bc: BoxBoundary::PlusMinus,
        axis: 1,
        plane: 1.0,
    };
    let lat = generate_box_lattice(2, &spec.sides, spec.bc)?;
    let beta = rng.gen_range(0.2..=1.2);
    let x = lat.vertex_at(&[1, 1]).expect("centre");
    let rf = reflection_for_axis(&lat, &lat.unit_couplings(beta), spec.axis, spec.plane)?;
    Ok(Instance {
        name,
        suite: Suite::VanBeijeren,
        beta,
        file: GraphFile::from_model(&rf.model()?),
        sites: vec![vec![x]],
        lattice: Some(spec),
    })
}

fn vanb_checks(inst: &Instance, tol: f64) -> Result<Vec<IneqReport>> {
    let spec = inst
        .lattice
        .as_ref()
        .ok_or_else(|| Error::Precondition("reflection instance needs a box".into()))?;
    let lat = generate_box_lattice(spec.sides.len(), &spec.sides, spec.bc)?;
    let rf = reflection_for_axis(&lat, &lat.unit_couplings(inst.beta), spec.axis, spec.plane)?;
    let x = inst.site(0)?[0];
    let rep = dobrushin_identities(&rf.model()?, &rf.symmetry, x)?;
    let n = &inst.name;
    Ok(vec![
        IneqReport::from_bound("van-beijeren", n, &rep.van_beijeren, tol),
        IneqReport::from_check("dobrushin-partition", n, &rep.partition, tol),
        IneqReport::from_check("dobrushin-magnetization", n, &rep.magnetization, tol),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(ks: &[f64]) -> Model {
        let edges: Vec<(usize, usize)> = (0..ks.len()).map(|i| (i, i + 1)).collect();
        Model::new(
            Graph::from_edges(ks.len() + 1, &edges).unwrap(),
            Couplings::new(ks.to_vec(), 1.0),
        )
        .unwrap()
    }

    #[test]
    fn simon_lieb_saturates_on_paths() {
        let m = path(&[0.4, 0.9]);
        let b = simon_lieb_site(&m, 0, 2, &[1]).unwrap();
        assert!((b.lhs - b.rhs).abs() < 1e-15);
        assert!((b.lhs - 0.4f64.tanh() * 0.9f64.tanh()).abs() < 1e-15);
        let e = simon_lieb_edge(&m, 0, 2, &[0]).unwrap();
        assert!((e.lhs - e.rhs).abs() < 1e-15);
        assert!(simon_lieb_site(&m, 0, 2, &[]).is_err());
    }

    #[test]
    fn simon_lieb_cycle_is_strict() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let m = Model::uniform(g, 0.5).unwrap();
        let b = simon_lieb_site(&m, 0, 2, &[1, 3]).unwrap();
        assert!(b.slack() > 1e-3, "{b:?}");
        let zero = Model::uniform(Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap(), 0.0).unwrap();
        let b = simon_lieb_site(&zero, 0, 2, &[1, 3]).unwrap();
        assert_eq!((b.lhs, b.rhs), (0.0, 0.0));
    }

    #[test]
    fn dss_single_vertex() {
        let g = Graph::new(1);
        let f = FieldSpec::new(vec![1.0], vec![0.5]).unwrap();
        let b = dss_bound(&g, &[], 1.0, &f, 0).unwrap();
        assert!((b.lhs - 1.367_265).abs() < 1e-6 && (b.rhs - 1.523_188).abs() < 1e-6, "{b:?}");
        let f0 = FieldSpec::new(vec![1.0], vec![0.0]).unwrap();
        let b = dss_bound(&g, &[], 1.0, &f0, 0).unwrap();
        assert_eq!(b.lhs, b.rhs);
        let neg = FieldSpec::new(vec![-1.0], vec![0.0]);
        if let Ok(neg) = neg {
            assert!(dss_bound(&g, &[], 1.0, &neg, 0).is_err());
        }
    }

    #[test]
    fn ghost_form_matches_field_form() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let f = FieldSpec::new(vec![0.3, 0.0, 0.7], vec![-0.4, 0.2, 0.0]).unwrap();
        let a = dss_bound(&g, &[0.8, 0.5], 1.0, &f, 0).unwrap();
        let b = dss_ghost_bound(&g, &[0.8, 0.5], 1.0, &f, 0).unwrap();
        assert!(a.passes(1e-12) && b.passes(1e-12));
        // σ_x σ_𝔤 under the ghost model equals σ_x under the field
        let m = |sg: f64| {
            let base = Model::new(g.clone(), Couplings::new(vec![0.8, 0.5], 1.0)).unwrap();
            spin::expectation(&base.with_field(f.combined(1.0, sg)).unwrap(), &[0]).unwrap()
        };
        assert!((b.lhs - (m(1.0) + m(-1.0))).abs() < 1e-14);
        assert!((b.rhs - 2.0 * m(0.0)).abs() < 1e-14);
    }

    #[test]
    fn ghs_closed_cases() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert!(-spin::ursell4(&Model::uniform(g.clone(), 0.5).unwrap(), [0, 1, 2, 3]).unwrap() > 0.0);
        assert_eq!(spin::ursell4(&Model::uniform(g, 0.0).unwrap(), [0, 1, 2, 3]).unwrap(), 0.0);
        let chain = path(&[1.0, 1.0, 1.0]);
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        assert!(magnetization_curvature(&chain, 0, &grid).unwrap() <= 1e-10);
    }

    #[test]
    fn smms_chain() {
        let lat = generate_box_lattice(2, &[1, 5], BoxBoundary::Free).unwrap();
        let k: f64 = 0.6;
        let rf = reflection_for_axis(&lat, &lat.unit_couplings(k), 1, 2.0).unwrap();
        let m = rf.model().unwrap();
        let e = spin::gibbs(&m, &[vec![0, 1], vec![0, rf.symmetry.map[1]]]).unwrap().expectations;
        assert!((e[0] - k.tanh()).abs() < 1e-15 && (e[1] - k.tanh().powi(3)).abs() < 1e-15);
    }

    #[test]
    fn suites_small_budget() {
        for s in Suite::ALL {
            let r = run_suite(s, 42, 12).unwrap();
            assert!(r.passes(), "{s:?} {:?}", r.reports.iter().find(|x| x.asserted && !x.pass));
            assert!(r.worst.is_some());
        }
    }

    #[test]
    fn instance_round_trip() {
        for s in Suite::ALL {
            let inst = s.generate(9, 3).unwrap();
            let back = Instance::parse(&inst.to_text()).unwrap();
            assert_eq!(back, inst);
            assert_eq!(s.check(&back).unwrap(), s.check(&inst).unwrap());
        }
    }

    #[test]
    fn deterministic_generation() {
        assert_eq!(Suite::Dss.generate(1, 5).unwrap(), Suite::Dss.generate(1, 5).unwrap());
        assert_ne!(Suite::Dss.generate(1, 5).unwrap(), Suite::Dss.generate(1, 6).unwrap());
    }
}
