//! Graphs, couplings, fields, boundary designations and the model bundle
//! consumed by every engine.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Undirected multigraph on dense vertex ids `0..n`. Edge ids follow
/// insertion order and adjacency rows list incident edges in id order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Adds an edge and returns its id. Stored as `(min, max)`.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<usize> {
        if u == v {
            return Err(Error::Graph(format!("self-loop at vertex {u}")));
        }
        if u >= self.n || v >= self.n {
            return Err(Error::Graph(format!(
                "edge ({u},{v}) references a vertex outside 0..{}",
                self.n
            )));
        }
        let id = self.edges.len();
        self.edges.push((u.min(v), u.max(v)));
        self.adj[u].push(id);
        self.adj[v].push(id);
        Ok(id)
    }

    pub fn add_vertex(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.n += 1;
        self.n - 1
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, b: usize) -> (usize, usize) {
        self.edges[b]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn incident(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Endpoint of `b` opposite to `v`.
    pub fn other(&self, b: usize, v: usize) -> usize {
        let (x, y) = self.edges[b];
        if x == v {
            y
        } else {
            x
        }
    }

    /// Edge ids joining `u` and `v`.
    pub fn edges_between(&self, u: usize, v: usize) -> Vec<usize> {
        let key = (u.min(v), u.max(v));
        self.adj[u]
            .iter()
            .copied()
            .filter(|&b| self.edges[b] == key)
            .collect()
    }

    /// Vertex bit mask of the endpoints of `b`.
    pub fn edge_mask(&self, b: usize) -> u64 {
        let (u, v) = self.edges[b];
        (1u64 << u) | (1u64 << v)
    }

    /// Subgraph induced on `keep`, preserving vertex and edge order.
    /// Returns the subgraph, the old→new vertex map and new→old edge map.
    pub fn induced(&self, keep: &[bool]) -> (Graph, Vec<Option<usize>>, Vec<usize>) {
        let mut vmap = vec![None; self.n];
        let mut count = 0;
        for v in 0..self.n {
            if keep[v] {
                vmap[v] = Some(count);
                count += 1;
            }
        }
        let mut g = Graph::new(count);
        let mut emap = Vec::new();
        for (b, &(u, v)) in self.edges.iter().enumerate() {
            if let (Some(a), Some(c)) = (vmap[u], vmap[v]) {
                g.add_edge(a, c).expect("induced edge is valid");
                emap.push(b);
            }
        }
        (g, vmap, emap)
    }

    /// Same vertex set, edges restricted to `keep`. Returns new→old edge map.
    pub fn edge_restricted(&self, keep: &[bool]) -> (Graph, Vec<usize>) {
        let mut g = Graph::new(self.n);
        let mut emap = Vec::new();
        for (b, &(u, v)) in self.edges.iter().enumerate() {
            if keep[b] {
                g.add_edge(u, v).expect("edge is valid");
                emap.push(b);
            }
        }
        (g, emap)
    }

    /// Vertices reachable from `x` using only edges accepted by `use_edge`.
    pub fn reachable(&self, x: usize, use_edge: impl Fn(usize) -> bool) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![x];
        seen[x] = true;
        while let Some(v) = stack.pop() {
            for &b in &self.adj[v] {
                if !use_edge(b) {
                    continue;
                }
                let w = self.other(b, v);
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }
}

/// Dimensionless couplings `J_b` and inverse temperature; engines use `K_b = beta * J_b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Couplings {
    pub j: Vec<f64>,
    pub beta: f64,
}

impl Couplings {
    pub fn new(j: Vec<f64>, beta: f64) -> Self {
        Self { j, beta }
    }

    pub fn uniform(m: usize, j: f64, beta: f64) -> Self {
        Self {
            j: vec![j; m],
            beta,
        }
    }

    #[inline]
    pub fn k(&self, b: usize) -> f64 {
        self.beta * self.j[b]
    }

    pub fn is_ferromagnetic(&self) -> bool {
        self.j.iter().all(|&j| j >= 0.0)
    }

    pub fn abs(&self) -> Couplings {
        Couplings {
            j: self.j.iter().map(|j| j.abs()).collect(),
            beta: self.beta,
        }
    }

    /// Couplings with the sign flipped on the given edges.
    pub fn flipped(&self, edges: &[usize]) -> Couplings {
        let mut c = self.clone();
        for &b in edges {
            c.j[b] = -c.j[b];
        }
        c
    }

    pub fn with_beta(&self, beta: f64) -> Couplings {
        Couplings {
            j: self.j.clone(),
            beta,
        }
    }

    /// Bit mask of edges with negative coupling.
    pub fn negative_mask(&self) -> u64 {
        let mut m = 0u64;
        for (b, &j) in self.j.iter().enumerate() {
            if j < 0.0 {
                m |= 1 << b;
            }
        }
        m
    }
}

/// Split field `h + g` (or `h - g`) as used by the DSS inequality.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSpec {
    pub h: Vec<f64>,
    pub g: Vec<f64>,
}

impl FieldSpec {
    pub fn new(h: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if h.len() != g.len() {
            return Err(Error::Precondition("h and g lengths differ".into()));
        }
        if let Some(x) = h.iter().find(|&&x| x < 0.0 || x.is_nan()) {
            return Err(Error::Precondition(format!("negative h entry {x}")));
        }
        Ok(Self { h, g })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            h: vec![0.0; n],
            g: vec![0.0; n],
        }
    }

    /// `sign_h * h + sign_g * g` entrywise.
    pub fn combined(&self, sign_h: f64, sign_g: f64) -> Vec<f64> {
        self.h
            .iter()
            .zip(&self.g)
            .map(|(h, g)| sign_h * h + sign_g * g)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Designation {
    Plus,
    Minus,
    Free,
}

impl Designation {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "plus" | "+" => Some(Self::Plus),
            "minus" | "-" => Some(Self::Minus),
            "free" => Some(Self::Free),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Plus => "plus",
            Self::Minus => "minus",
            Self::Free => "free",
        }
    }
}

/// Designations on a declared boundary set. Plus/Minus vertices are
/// clamped; Free boundary vertices are summed over like interior ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BoundarySpec {
    pub designations: BTreeMap<usize, Designation>,
}

impl BoundarySpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: &[(usize, Designation)]) -> Self {
        Self {
            designations: pairs.iter().copied().collect(),
        }
    }

    pub fn set(&mut self, v: usize, d: Designation) {
        self.designations.insert(v, d);
    }

    pub fn is_empty(&self) -> bool {
        self.designations.is_empty()
    }

    /// Spin value of a clamped vertex.
    pub fn clamp(&self, v: usize) -> Option<i8> {
        match self.designations.get(&v) {
            Some(Designation::Plus) => Some(1),
            Some(Designation::Minus) => Some(-1),
            _ => None,
        }
    }

    pub fn is_clamped(&self, v: usize) -> bool {
        self.clamp(v).is_some()
    }

    fn select(&self, d: Designation) -> Vec<usize> {
        self.designations
            .iter()
            .filter(|(_, &x)| x == d)
            .map(|(&v, _)| v)
            .collect()
    }

    pub fn plus(&self) -> Vec<usize> {
        self.select(Designation::Plus)
    }

    pub fn minus(&self) -> Vec<usize> {
        self.select(Designation::Minus)
    }

    /// All clamped vertices.
    pub fn clamped(&self) -> Vec<usize> {
        self.designations
            .iter()
            .filter(|(_, &d)| d != Designation::Free)
            .map(|(&v, _)| v)
            .collect()
    }

    pub fn clamped_mask(&self) -> u64 {
        self.clamped().iter().fold(0u64, |m, &v| m | 1 << v)
    }

    /// Same declared set with every clamped vertex turned Plus.
    pub fn all_plus(&self) -> BoundarySpec {
        BoundarySpec {
            designations: self
                .designations
                .iter()
                .map(|(&v, &d)| {
                    (
                        v,
                        if d == Designation::Free {
                            Designation::Free
                        } else {
                            Designation::Plus
                        },
                    )
                })
                .collect(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self.designations.keys().find(|&&v| v >= n) {
            Some(v) => Err(Error::Graph(format!("boundary vertex {v} out of range"))),
            None => Ok(()),
        }
    }
}

/// Enumeration limits. Defaults can be lowered or raised up to [`Caps::HARD`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Caps {
    pub spin_vertices: usize,
    pub single_edges: usize,
    pub double_states: u128,
    pub fk_edges: usize,
    pub plaquettes: usize,
    pub gauge_edges: usize,
}

impl Caps {
    pub const HARD: Caps = Caps {
        spin_vertices: 30,
        single_edges: 24,
        double_states: 1 << 34,
        fk_edges: 28,
        plaquettes: 30,
        gauge_edges: 24,
    };

    /// Entrywise minimum with the compiled hard limits.
    pub fn bounded(self) -> Caps {
        let h = Caps::HARD;
        Caps {
            spin_vertices: self.spin_vertices.min(h.spin_vertices),
            single_edges: self.single_edges.min(h.single_edges),
            double_states: self.double_states.min(h.double_states),
            fk_edges: self.fk_edges.min(h.fk_edges),
            plaquettes: self.plaquettes.min(h.plaquettes),
            gauge_edges: self.gauge_edges.min(h.gauge_edges),
        }
    }
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            spin_vertices: 26,
            single_edges: 20,
            double_states: 1 << 31,
            fk_edges: 24,
            plaquettes: 24,
            gauge_edges: 20,
        }
    }
}

/// Graph with couplings, external field (per vertex, multiplied by beta)
/// and boundary designations.
#[derive(Clone, Debug)]
pub struct Model {
    pub graph: Graph,
    pub couplings: Couplings,
    pub field: Vec<f64>,
    pub boundary: BoundarySpec,
    pub caps: Caps,
}

impl Model {
    pub fn new(graph: Graph, couplings: Couplings) -> Result<Self> {
        if couplings.j.len() != graph.num_edges() {
            return Err(Error::Graph(format!(
                "{} couplings for {} edges",
                couplings.j.len(),
                graph.num_edges()
            )));
        }
        if !(couplings.beta.is_finite() && couplings.beta >= 0.0) {
            return Err(Error::Domain(format!("beta must be finite and nonnegative, got {}", couplings.beta)));
        }
        if couplings.j.iter().any(|j| !j.is_finite()) {
            return Err(Error::Domain("couplings must be finite".into()));
        }
        if graph.num_vertices() > 64 || graph.num_edges() > 64 {
            return Err(Error::Size {
                what: "graph (vertices or edges)",
                actual: graph.num_vertices().max(graph.num_edges()) as u128,
                limit: 64,
            });
        }
        let n = graph.num_vertices();
        Ok(Self {
            graph,
            couplings,
            field: vec![0.0; n],
            boundary: BoundarySpec::new(),
            caps: Caps::default(),
        })
    }

    /// Uniform couplings `J = 1` at inverse temperature `beta`.
    pub fn uniform(graph: Graph, beta: f64) -> Result<Self> {
        let m = graph.num_edges();
        Self::new(graph, Couplings::uniform(m, 1.0, beta))
    }

    pub fn with_field(mut self, field: Vec<f64>) -> Result<Self> {
        if field.len() != self.graph.num_vertices() {
            return Err(Error::Graph("field length differs from vertex count".into()));
        }
        self.field = field;
        Ok(self)
    }

    pub fn with_boundary(mut self, b: BoundarySpec) -> Result<Self> {
        b.validate(self.graph.num_vertices())?;
        self.boundary = b;
        Ok(self)
    }

    pub fn with_couplings(&self, couplings: Couplings) -> Model {
        assert_eq!(couplings.j.len(), self.graph.num_edges());
        let mut m = self.clone();
        m.couplings = couplings;
        m
    }

    pub fn with_caps(mut self, caps: Caps) -> Self {
        self.caps = caps.bounded();
        self
    }

    pub fn n(&self) -> usize {
        self.graph.num_vertices()
    }

    pub fn m(&self) -> usize {
        self.graph.num_edges()
    }

    #[inline]
    pub fn k(&self, b: usize) -> f64 {
        self.couplings.k(b)
    }

    pub fn has_field(&self) -> bool {
        self.field.iter().any(|&h| h != 0.0)
    }

    pub(crate) fn check_vertices(&self, vs: &[usize]) -> Result<()> {
        match vs.iter().find(|&&v| v >= self.n()) {
            Some(v) => Err(Error::Graph(format!("vertex {v} out of range"))),
            None => Ok(()),
        }
    }

    pub(crate) fn check_edges(&self, es: &[usize]) -> Result<()> {
        match es.iter().find(|&&b| b >= self.m()) {
            Some(b) => Err(Error::Graph(format!("edge {b} out of range"))),
            None => Ok(()),
        }
    }
}

/// Bit mask of a vertex multiset; repeated entries cancel.
pub fn parity_mask(vs: &[usize]) -> u64 {
    vs.iter().fold(0u64, |m, &v| m ^ (1u64 << v))
}

pub fn mask_of(vs: &[usize]) -> u64 {
    vs.iter().fold(0u64, |m, &v| m | (1u64 << v))
}

pub fn mask_to_vec(mut m: u64) -> Vec<usize> {
    let mut out = Vec::new();
    while m != 0 {
        let v = m.trailing_zeros() as usize;
        out.push(v);
        m &= m - 1;
    }
    out
}

/// Class of an edge in a ghosted graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeClass {
    Base,
    FieldH,
    FieldPlus,
    FieldMinus,
}

/// Graph with a ghost vertex carrying the external fields as couplings.
#[derive(Clone, Debug)]
pub struct GhostedGraph {
    pub graph: Graph,
    pub ghost: usize,
    pub classes: Vec<EdgeClass>,
    /// Field value carried by each ghost edge (0 on base edges).
    pub strength: Vec<f64>,
    base_edges: usize,
}

impl GhostedGraph {
    pub fn base_edges(&self) -> usize {
        self.base_edges
    }

    pub fn count(&self, class: EdgeClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    /// Couplings for the combined field `sign_h * h + sign_g * g`, with
    /// base couplings `j` in front.
    pub fn couplings(&self, j: &[f64], beta: f64, sign_h: f64, sign_g: f64) -> Couplings {
        let mut out = j.to_vec();
        for b in self.base_edges..self.graph.num_edges() {
            out.push(match self.classes[b] {
                EdgeClass::FieldH => sign_h * self.strength[b],
                _ => sign_g * self.strength[b],
            });
        }
        Couplings::new(out, beta)
    }

    /// Base graph recovered by deleting the ghost.
    pub fn base(&self) -> Graph {
        let keep: Vec<bool> = (0..self.graph.num_vertices())
            .map(|v| v != self.ghost)
            .collect();
        self.graph.induced(&keep).0
    }
}

/// Adds a ghost vertex joined to every vertex with nonzero `h` (class E_h)
/// and, separately, to every vertex with nonzero `g` (E_plus or E_minus).
pub fn ghost_augment(g: &Graph, f: &FieldSpec) -> Result<GhostedGraph> {
    if f.h.len() != g.num_vertices() {
        return Err(Error::Graph("field length differs from vertex count".into()));
    }
    let mut graph = g.clone();
    let ghost = graph.add_vertex();
    let mut classes = vec![EdgeClass::Base; g.num_edges()];
    let mut strength = vec![0.0; g.num_edges()];
    for x in 0..g.num_vertices() {
        if f.h[x] != 0.0 {
            graph.add_edge(x, ghost)?;
            classes.push(EdgeClass::FieldH);
            strength.push(f.h[x]);
        }
        if f.g[x] != 0.0 {
            graph.add_edge(x, ghost)?;
            classes.push(if f.g[x] > 0.0 {
                EdgeClass::FieldPlus
            } else {
                EdgeClass::FieldMinus
            });
            strength.push(f.g[x]);
        }
    }
    Ok(GhostedGraph {
        graph,
        ghost,
        classes,
        strength,
        base_edges: g.num_edges(),
    })
}

/// Contents of a graph file.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphFile {
    pub graph: Graph,
    pub j: Vec<f64>,
    pub field: FieldSpec,
    pub boundary: BoundarySpec,
}

impl GraphFile {
    /// Parses the line format `vertex <id> [h=..] [g=..]`, `edge <u> <v> <J>`,
    /// `boundary <id> plus|minus|free`, with `#` comments.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n = 0usize;
        let mut edges = Vec::new();
        let mut j = Vec::new();
        let mut h: BTreeMap<usize, f64> = BTreeMap::new();
        let mut gf: BTreeMap<usize, f64> = BTreeMap::new();
        let mut boundary = BoundarySpec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line, msg };
            let toks: Vec<&str> = content.split_whitespace().collect();
            let id = |s: &str| -> Result<usize> {
                s.parse::<usize>()
                    .map_err(|_| err(format!("bad vertex id '{s}'")))
            };
            match toks[0] {
                "vertex" => {
                    let v = id(toks.get(1).ok_or_else(|| err("missing id".into()))?)?;
                    n = n.max(v + 1);
                    for t in &toks[2..] {
                        let (key, val) = t
                            .split_once('=')
                            .ok_or_else(|| err(format!("expected key=value, got '{t}'")))?;
                        let x: f64 = val
                            .parse()
                            .map_err(|_| err(format!("bad number '{val}'")))?;
                        match key {
                            "h" => {
                                h.insert(v, x);
                            }
                            "g" => {
                                gf.insert(v, x);
                            }
                            _ => return Err(err(format!("unknown attribute '{key}'"))),
                        }
                    }
                }
                "edge" => {
                    if toks.len() != 4 {
                        return Err(err("expected 'edge <u> <v> <J>'".into()));
                    }
                    let (u, v) = (id(toks[1])?, id(toks[2])?);
                    if u == v {
                        return Err(err(format!("self-loop at {u}")));
                    }
                    let x: f64 = toks[3]
                        .parse()
                        .map_err(|_| err(format!("bad coupling '{}'", toks[3])))?;
                    n = n.max(u + 1).max(v + 1);
                    edges.push((u, v));
                    j.push(x);
                }
                "boundary" => {
                    if toks.len() != 3 {
                        return Err(err("expected 'boundary <id> plus|minus|free'".into()));
                    }
                    let v = id(toks[1])?;
                    let d = Designation::parse(toks[2])
                        .ok_or_else(|| err(format!("bad designation '{}'", toks[2])))?;
                    n = n.max(v + 1);
                    boundary.set(v, d);
                }
                other => return Err(err(format!("unknown record '{other}'"))),
            }
        }
        let graph = Graph::from_edges(n, &edges)?;
        let mut field = FieldSpec::zero(n);
        for (v, x) in h {
            field.h[v] = x;
        }
        for (v, x) in gf {
            field.g[v] = x;
        }
        if let Some(x) = field.h.iter().find(|&&x| x < 0.0) {
            return Err(Error::Parse {
                line: 0,
                msg: format!("negative h value {x}"),
            });
        }
        Ok(Self {
            graph,
            j,
            field,
            boundary,
        })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for v in 0..self.graph.num_vertices() {
            let _ = write!(s, "vertex {v}");
            if self.field.h[v] != 0.0 {
                let _ = write!(s, " h={:e}", self.field.h[v]);
            }
            if self.field.g[v] != 0.0 {
                let _ = write!(s, " g={:e}", self.field.g[v]);
            }
            s.push('\n');
        }
        for (b, &(u, v)) in self.graph.edges().iter().enumerate() {
            let _ = writeln!(s, "edge {u} {v} {:e}", self.j[b]);
        }
        for (v, d) in &self.boundary.designations {
            let _ = writeln!(s, "boundary {v} {}", d.name());
        }
        s
    }

    pub fn from_model(m: &Model) -> Self {
        let n = m.n();
        Self {
            graph: m.graph.clone(),
            j: m.couplings.j.clone(),
            field: FieldSpec {
                h: m.field.clone(),
                g: vec![0.0; n],
            },
            boundary: m.boundary.clone(),
        }
    }

    /// Model with `h` as the field (the `g` column is ignored here).
    pub fn model(&self, beta: f64) -> Result<Model> {
        Model::new(self.graph.clone(), Couplings::new(self.j.clone(), beta))?
            .with_field(self.field.h.clone())?
            .with_boundary(self.boundary.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_self_loop() {
        let mut g = Graph::new(2);
        assert!(g.add_edge(1, 1).is_err());
    }

    #[test]
    fn parallel_edges_get_distinct_ids() {
        let g = Graph::from_edges(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.edges_between(0, 1), vec![0, 1]);
        assert_eq!(g.incident(1), &[0, 1]);
    }

    #[test]
    fn adjacency_consistent() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
        for b in 0..g.num_edges() {
            let (u, v) = g.edge(b);
            assert_eq!(g.incident(u).iter().filter(|&&e| e == b).count(), 1);
            assert_eq!(g.incident(v).iter().filter(|&&e| e == b).count(), 1);
        }
    }

    #[test]
    fn ghost_single_vertex() {
        let g = Graph::new(1);
        let f = FieldSpec::new(vec![1.0], vec![0.5]).unwrap();
        let gg = ghost_augment(&g, &f).unwrap();
        assert_eq!(gg.graph.num_edges(), 2);
        assert_eq!(gg.count(EdgeClass::FieldH), 1);
        assert_eq!(gg.count(EdgeClass::FieldPlus), 1);
    }

    #[test]
    fn ghost_empty_field() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let gg = ghost_augment(&g, &FieldSpec::zero(2)).unwrap();
        assert_eq!(gg.graph.num_edges(), 1);
        assert_eq!(gg.base(), g);
    }

    #[test]
    fn ghost_sign_split() {
        let g = Graph::new(2);
        let f = FieldSpec::new(vec![0.0, 0.0], vec![1.0, -1.0]).unwrap();
        let gg = ghost_augment(&g, &f).unwrap();
        assert_eq!(gg.count(EdgeClass::FieldPlus), 1);
        assert_eq!(gg.count(EdgeClass::FieldMinus), 1);
        let c = gg.couplings(&[], 1.0, 1.0, 1.0);
        assert_eq!(c.j, vec![1.0, -1.0]);
    }

    #[test]
    fn field_spec_rejects_negative_h() {
        assert!(FieldSpec::new(vec![-0.1], vec![0.0]).is_err());
    }

    #[test]
    fn graph_file_round_trip() {
        let text = "# demo\nvertex 0 h=0.5\nvertex 1 g=-0.25\nvertex 2\nedge 0 1 1.0\nedge 1 2 -0.5\nboundary 2 minus\n";
        let gf = GraphFile::parse(text).unwrap();
        assert_eq!(gf.graph.num_vertices(), 3);
        assert_eq!(gf.j, vec![1.0, -0.5]);
        assert_eq!(gf.field.h[0], 0.5);
        assert_eq!(gf.field.g[1], -0.25);
        assert_eq!(gf.boundary.minus(), vec![2]);
        let again = GraphFile::parse(&gf.to_text()).unwrap();
        assert_eq!(again, gf);
    }

    #[test]
    fn graph_file_reports_line() {
        let err = GraphFile::parse("vertex 0\nedge 0 x 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn all_plus_keeps_free() {
        let b = BoundarySpec::from_pairs(&[
            (0, Designation::Minus),
            (1, Designation::Free),
            (2, Designation::Plus),
        ]);
        let p = b.all_plus();
        assert_eq!(p.plus(), vec![0, 2]);
        assert!(!p.is_clamped(1));
    }
}
