//! Box lattices with embedded coordinates and their reflection symmetries.

use crate::error::{Error, Result};
use crate::graph::{BoundarySpec, Couplings, Designation, Graph, Model};

/// Boundary condition applied to the outer layer of a generated box.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoxBoundary {
    Free,
    Plus,
    /// Plus on the upper half of the last axis (including the middle
    /// layer when the side is odd), minus below.
    PlusMinus,
}

impl BoxBoundary {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "free" => Some(Self::Free),
            "plus" => Some(Self::Plus),
            "pm" => Some(Self::PlusMinus),
            _ => None,
        }
    }
}

/// Nearest-neighbour box with coordinates stored doubled, so that
/// mid-edge vertices have integer coordinates too.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxLattice {
    pub graph: Graph,
    pub sides: Vec<usize>,
    pub coords2: Vec<Vec<i64>>,
    pub edge_axis: Vec<usize>,
    pub boundary: BoundarySpec,
}

/// Nearest-neighbour box in d=2 or 3. Vertices are ranked lexicographically
/// by coordinate (first axis most significant); edges by lower endpoint,
/// then axis. With a clamped boundary, edges joining two clamped vertices
/// are omitted since they only contribute a constant factor.
pub fn generate_box_lattice(d: usize, sides: &[usize], bc: BoxBoundary) -> Result<BoxLattice> {
    if d != 2 && d != 3 {
        return Err(Error::Domain(format!("dimension {d} not in {{2,3}}")));
    }
    if sides.len() != d {
        return Err(Error::Domain(format!(
            "{} side lengths given for d={d}",
            sides.len()
        )));
    }
    if sides.contains(&0) {
        return Err(Error::Domain("side lengths must be positive".into()));
    }
    let n: usize = sides.iter().product();
    let mut coords = Vec::with_capacity(n);
    let mut c = vec![0usize; d];
    for _ in 0..n {
        coords.push(c.iter().map(|&x| 2 * x as i64).collect::<Vec<_>>());
        for a in (0..d).rev() {
            c[a] += 1;
            if c[a] < sides[a] {
                break;
            }
            c[a] = 0;
        }
    }
    let index = |c: &[usize]| -> usize {
        let mut id = 0;
        for a in 0..d {
            id = id * sides[a] + c[a];
        }
        id
    };
    let mut boundary = BoundarySpec::new();
    if bc != BoxBoundary::Free {
        let last = d - 1;
        for (v, x) in coords.iter().enumerate() {
            let outer = (0..d).any(|a| x[a] == 0 || x[a] == 2 * (sides[a] as i64 - 1));
            if !outer {
                continue;
            }
            let des = match bc {
                BoxBoundary::Plus => Designation::Plus,
                _ => {
                    // compare 2x with L-1 in doubled units
                    if x[last] >= sides[last] as i64 - 1 {
                        Designation::Plus
                    } else {
                        Designation::Minus
                    }
                }
            };
            boundary.set(v, des);
        }
    }
    let mut graph = Graph::new(n);
    let mut edge_axis = Vec::new();
    for v in 0..n {
        let cv: Vec<usize> = coords[v].iter().map(|&x| (x / 2) as usize).collect();
        for a in 0..d {
            if cv[a] + 1 < sides[a] {
                let mut cw = cv.clone();
                cw[a] += 1;
                let w = index(&cw);
                if boundary.is_clamped(v) && boundary.is_clamped(w) {
                    continue;
                }
                graph.add_edge(v, w)?;
                edge_axis.push(a);
            }
        }
    }
    Ok(BoxLattice {
        graph,
        sides: sides.to_vec(),
        coords2: coords,
        edge_axis,
        boundary,
    })
}

impl BoxLattice {
    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    /// Translate so that the first vertex sits at `origin`.
    pub fn shifted(&self, origin: &[i64]) -> BoxLattice {
        let mut out = self.clone();
        for c in &mut out.coords2 {
            for (a, x) in c.iter_mut().enumerate() {
                *x += 2 * origin[a];
            }
        }
        out
    }

    /// Translate so the box is centred on the origin along every axis with
    /// odd side length (even sides start at `-(L/2)`).
    pub fn centered(&self) -> BoxLattice {
        let origin: Vec<i64> = self.sides.iter().map(|&l| -((l as i64 - 1) / 2)).collect();
        self.shifted(&origin)
    }

    pub fn coord(&self, v: usize) -> Vec<f64> {
        self.coords2[v].iter().map(|&x| x as f64 / 2.0).collect()
    }

    pub fn vertex_at(&self, c: &[i64]) -> Option<usize> {
        let key: Vec<i64> = c.iter().map(|&x| 2 * x).collect();
        self.coords2.iter().position(|x| *x == key)
    }

    pub fn unit_couplings(&self, beta: f64) -> Couplings {
        Couplings::uniform(self.graph.num_edges(), 1.0, beta)
    }

    pub fn model(&self, beta: f64) -> Result<Model> {
        Model::uniform(self.graph.clone(), beta)?.with_boundary(self.boundary.clone())
    }

    /// Vertices on the outer layer of the box.
    pub fn outer_layer(&self) -> Vec<usize> {
        let d = self.dim();
        let mins: Vec<i64> = (0..d)
            .map(|a| self.coords2.iter().map(|c| c[a]).min().unwrap_or(0))
            .collect();
        let maxs: Vec<i64> = (0..d)
            .map(|a| self.coords2.iter().map(|c| c[a]).max().unwrap_or(0))
            .collect();
        (0..self.graph.num_vertices())
            .filter(|&v| (0..d).any(|a| self.coords2[v][a] == mins[a] || self.coords2[v][a] == maxs[a]))
            .collect()
    }
}

/// Which side of the reflection plane a vertex lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Plane,
    Lower,
    Upper,
}

/// Markovian vertex involution with its vertex and edge partitions.
#[derive(Clone, Debug, PartialEq)]
pub struct ReflectionSymmetry {
    pub map: Vec<usize>,
    pub edge_map: Vec<usize>,
    pub side: Vec<Side>,
    /// Edge class: `Plane` for E0, `Lower` for E1, `Upper` for E2.
    pub edge_side: Vec<Side>,
}

impl ReflectionSymmetry {
    /// Validates an involution with a given side labelling.
    pub fn new(g: &Graph, c: &Couplings, map: Vec<usize>, side: Vec<Side>) -> Result<Self> {
        let n = g.num_vertices();
        if map.len() != n || side.len() != n {
            return Err(Error::NotSymmetric("map size differs from vertex count".into()));
        }
        for v in 0..n {
            if map[v] >= n || map[map[v]] != v {
                return Err(Error::NotSymmetric(format!("not an involution at {v}")));
            }
            let expected = match side[v] {
                Side::Plane => Side::Plane,
                Side::Lower => Side::Upper,
                Side::Upper => Side::Lower,
            };
            if side[map[v]] != expected {
                return Err(Error::NotSymmetric(format!("sides not swapped at {v}")));
            }
            if side[v] == Side::Plane && map[v] != v {
                return Err(Error::NotSymmetric(format!("plane vertex {v} moved")));
            }
        }
        let mut edge_map = vec![usize::MAX; g.num_edges()];
        let mut edge_side = Vec::with_capacity(g.num_edges());
        for b in 0..g.num_edges() {
            let (u, v) = g.edge(b);
            let cls = match (side[u], side[v]) {
                (Side::Lower, Side::Upper) | (Side::Upper, Side::Lower) => {
                    return Err(Error::NonMarkovian(format!(
                        "edge {b} joins both sides directly"
                    )))
                }
                (Side::Plane, Side::Plane) => Side::Plane,
                (Side::Lower, _) | (_, Side::Lower) => Side::Lower,
                _ => Side::Upper,
            };
            edge_side.push(cls);
            if edge_map[b] != usize::MAX {
                continue;
            }
            // match parallel edges in order
            let images = g.edges_between(map[u], map[v]);
            let sources = g.edges_between(u, v);
            if images.len() != sources.len() {
                return Err(Error::NotSymmetric(format!("edge {b} has no image")));
            }
            for (&s, &t) in sources.iter().zip(&images) {
                if (c.j[s] - c.j[t]).abs() > 1e-12 * (1.0 + c.j[s].abs()) {
                    return Err(Error::NotSymmetric(format!(
                        "coupling on edge {s} differs from its image {t}"
                    )));
                }
                edge_map[s] = t;
                edge_map[t] = s;
            }
        }
        Ok(Self {
            map,
            edge_map,
            side,
            edge_side,
        })
    }

    pub fn plane(&self) -> Vec<usize> {
        (0..self.map.len())
            .filter(|&v| self.side[v] == Side::Plane)
            .collect()
    }

    pub fn lower(&self) -> Vec<usize> {
        (0..self.map.len())
            .filter(|&v| self.side[v] == Side::Lower)
            .collect()
    }

    pub fn upper(&self) -> Vec<usize> {
        (0..self.map.len())
            .filter(|&v| self.side[v] == Side::Upper)
            .collect()
    }

    pub fn plane_mask(&self) -> u64 {
        self.plane().iter().fold(0, |m, &v| m | 1 << v)
    }

    /// Edge set mapped through the involution.
    pub fn reflect_edges(&self, mask: u64) -> u64 {
        let mut out = 0u64;
        let mut m = mask;
        while m != 0 {
            let b = m.trailing_zeros() as usize;
            out |= 1 << self.edge_map[b];
            m &= m - 1;
        }
        out
    }
}

/// Result of [`reflection_for_axis`]: possibly augmented lattice, matching
/// couplings and the symmetry.
#[derive(Clone, Debug)]
pub struct Reflected {
    pub lattice: BoxLattice,
    pub couplings: Couplings,
    pub symmetry: ReflectionSymmetry,
}

impl Reflected {
    pub fn model(&self) -> Result<Model> {
        Model::new(self.lattice.graph.clone(), self.couplings.clone())?
            .with_boundary(self.lattice.boundary.clone())
    }
}

/// Reflection through the plane `x_axis = plane`. When the plane bisects
/// edges, each crossing edge is replaced by two half-edges through a new
/// mid-point vertex with `tanh(beta J') = sqrt(tanh(beta J))`.
pub fn reflection_for_axis(
    lat: &BoxLattice,
    c: &Couplings,
    axis: usize,
    plane: f64,
) -> Result<Reflected> {
    if axis >= lat.dim() {
        return Err(Error::Domain(format!("axis {axis} out of range")));
    }
    let p2f = 2.0 * plane;
    if (p2f - p2f.round()).abs() > 1e-9 {
        return Err(Error::NotSymmetric(format!(
            "plane {plane} is not a lattice or mid-edge position"
        )));
    }
    let p2 = p2f.round() as i64;
    let n = lat.graph.num_vertices();
    for v in 0..n {
        let mut img = lat.coords2[v].clone();
        img[axis] = 2 * p2 - img[axis];
        if !lat.coords2.contains(&img) {
            return Err(Error::NotSymmetric(format!(
                "vertex {v} has no mirror image across {plane}"
            )));
        }
    }
    let crossing: Vec<usize> = (0..lat.graph.num_edges())
        .filter(|&b| {
            let (u, v) = lat.graph.edge(b);
            let (a, bb) = (lat.coords2[u][axis], lat.coords2[v][axis]);
            (a < p2 && bb > p2) || (a > p2 && bb < p2)
        })
        .collect();
    let mut lattice = lat.clone();
    let mut couplings = c.clone();
    if !crossing.is_empty() {
        for &b in &crossing {
            let (u, v) = lat.graph.edge(b);
            if lat.edge_axis[b] != axis {
                return Err(Error::NotSymmetric(format!(
                    "edge {b} crosses the plane non-orthogonally"
                )));
            }
            if lat.coords2[u][axis] + lat.coords2[v][axis] != 2 * p2 {
                return Err(Error::NotSymmetric(format!(
                    "edge {b} is not bisected at its mid-point"
                )));
            }
        }
        lattice = insert_midpoints(lat, c, &crossing, axis, &mut couplings)?;
    }
    let n = lattice.graph.num_vertices();
    let mut map = vec![usize::MAX; n];
    let mut side = vec![Side::Plane; n];
    for v in 0..n {
        let x = lattice.coords2[v][axis];
        side[v] = match x.cmp(&p2) {
            std::cmp::Ordering::Less => Side::Lower,
            std::cmp::Ordering::Equal => Side::Plane,
            std::cmp::Ordering::Greater => Side::Upper,
        };
        let mut img = lattice.coords2[v].clone();
        img[axis] = 2 * p2 - x;
        map[v] = lattice
            .coords2
            .iter()
            .position(|y| *y == img)
            .ok_or_else(|| Error::NotSymmetric(format!("vertex {v} has no image")))?;
    }
    let symmetry = ReflectionSymmetry::new(&lattice.graph, &couplings, map, side)?;
    Ok(Reflected {
        lattice,
        couplings,
        symmetry,
    })
}

fn insert_midpoints(
    lat: &BoxLattice,
    c: &Couplings,
    crossing: &[usize],
    axis: usize,
    out_c: &mut Couplings,
) -> Result<BoxLattice> {
    let beta = c.beta;
    if beta <= 0.0 {
        return Err(Error::Domain(
            "mid-edge insertion needs beta > 0".into(),
        ));
    }
    // points and edges before canonical re-ranking
    let mut points = lat.coords2.clone();
    let mut edges: Vec<(usize, usize, usize, f64)> = Vec::new();
    for b in 0..lat.graph.num_edges() {
        let (u, v) = lat.graph.edge(b);
        if crossing.contains(&b) {
            let k = c.k(b);
            if k < 0.0 {
                return Err(Error::Domain(format!(
                    "cannot split antiferromagnetic edge {b} symmetrically"
                )));
            }
            let jh = (k.tanh().sqrt()).atanh() / beta;
            let mid: Vec<i64> = points[u]
                .iter()
                .zip(&points[v])
                .map(|(a, b)| (a + b) / 2)
                .collect();
            points.push(mid);
            let m = points.len() - 1;
            edges.push((u, m, axis, jh));
            edges.push((m, v, axis, jh));
        } else {
            edges.push((u, v, lat.edge_axis[b], c.j[b]));
        }
    }
    // canonical ranking: lexicographic coordinates
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].cmp(&points[b]));
    let mut rank = vec![0; points.len()];
    for (r, &v) in order.iter().enumerate() {
        rank[v] = r;
    }
    let mut ranked: Vec<(usize, usize, usize, f64)> = edges
        .into_iter()
        .map(|(u, v, a, j)| {
            let (x, y) = (rank[u], rank[v]);
            (x.min(y), x.max(y), a, j)
        })
        .collect();
    ranked.sort_by_key(|a| (a.0, a.2, a.1));
    let mut graph = Graph::new(points.len());
    let mut edge_axis = Vec::new();
    let mut j = Vec::new();
    for &(u, v, a, jj) in &ranked {
        graph.add_edge(u, v)?;
        edge_axis.push(a);
        j.push(jj);
    }
    let coords2 = order.iter().map(|&v| points[v].clone()).collect();
    let mut boundary = BoundarySpec::new();
    for (&v, &d) in &lat.boundary.designations {
        boundary.set(rank[v], d);
    }
    *out_c = Couplings::new(j, beta);
    Ok(BoxLattice {
        graph,
        sides: lat.sides.clone(),
        coords2,
        edge_axis,
        boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_counts() {
        let l = generate_box_lattice(2, &[2, 2], BoxBoundary::Free).unwrap();
        assert_eq!(l.graph.num_vertices(), 4);
        assert_eq!(l.graph.num_edges(), 4);
    }

    #[test]
    fn cube_counts() {
        let l = generate_box_lattice(3, &[2, 2, 2], BoxBoundary::Free).unwrap();
        assert_eq!(l.graph.num_vertices(), 8);
        assert_eq!(l.graph.num_edges(), 12);
    }

    #[test]
    fn path_counts() {
        let l = generate_box_lattice(2, &[3, 1], BoxBoundary::Free).unwrap();
        assert_eq!(l.graph.num_vertices(), 3);
        assert_eq!(l.graph.num_edges(), 2);
    }

    #[test]
    fn rejects_bad_dimension() {
        assert!(generate_box_lattice(4, &[2, 2, 2, 2], BoxBoundary::Free).is_err());
        assert!(generate_box_lattice(1, &[2], BoxBoundary::Free).is_err());
    }

    #[test]
    fn edge_ranking_by_lower_endpoint_then_axis() {
        let l = generate_box_lattice(2, &[2, 2], BoxBoundary::Free).unwrap();
        assert_eq!(l.graph.edges(), &[(0, 2), (0, 1), (1, 3), (2, 3)]);
        assert_eq!(l.edge_axis, vec![0, 1, 0, 1]);
    }

    #[test]
    fn plus_box_drops_boundary_edges() {
        let l = generate_box_lattice(2, &[3, 3], BoxBoundary::Plus).unwrap();
        assert_eq!(l.graph.num_edges(), 4);
        assert_eq!(l.boundary.plus().len(), 8);
    }

    #[test]
    fn pm_box_splits_last_axis() {
        let l = generate_box_lattice(2, &[3, 3], BoxBoundary::PlusMinus).unwrap();
        assert_eq!(l.boundary.minus().len(), 3);
        assert_eq!(l.boundary.plus().len(), 5);
    }

    #[test]
    fn path_reflection_partition() {
        let l = generate_box_lattice(2, &[5, 1], BoxBoundary::Free)
            .unwrap()
            .shifted(&[-2, 0]);
        let c = l.unit_couplings(0.5);
        let r = reflection_for_axis(&l, &c, 0, 0.0).unwrap();
        let at = |x: i64| l.vertex_at(&[x, 0]).unwrap();
        assert_eq!(r.symmetry.plane(), vec![at(0)]);
        assert_eq!(r.symmetry.lower(), vec![at(-2), at(-1)]);
        assert_eq!(r.symmetry.upper(), vec![at(1), at(2)]);
    }

    #[test]
    fn off_plane_rejected() {
        let l = generate_box_lattice(2, &[5, 1], BoxBoundary::Free)
            .unwrap()
            .shifted(&[-2, 0]);
        let c = l.unit_couplings(0.5);
        assert!(reflection_for_axis(&l, &c, 0, 0.7).is_err());
        assert!(reflection_for_axis(&l, &c, 0, 1.0).is_err());
    }

    #[test]
    fn mid_edge_insertion_on_square() {
        let l = generate_box_lattice(2, &[2, 2], BoxBoundary::Free).unwrap();
        let c = l.unit_couplings(0.7);
        let r = reflection_for_axis(&l, &c, 0, 0.5).unwrap();
        assert_eq!(r.lattice.graph.num_vertices(), 6);
        assert_eq!(r.lattice.graph.num_edges(), 6);
        let t = 0.7f64.tanh();
        let split: Vec<f64> = r.couplings.j.iter().filter(|&&j| j != 1.0).copied().collect();
        assert_eq!(split.len(), 4);
        for j in split {
            assert!(((0.7 * j).tanh().powi(2) - t).abs() < 1e-14);
        }
        assert_eq!(r.symmetry.plane().len(), 2);
    }

    #[test]
    fn markov_violation_detected() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let c = Couplings::uniform(1, 1.0, 1.0);
        let e = ReflectionSymmetry::new(&g, &c, vec![1, 0], vec![Side::Lower, Side::Upper]);
        assert!(matches!(e, Err(Error::NonMarkovian(_))));
    }
}
