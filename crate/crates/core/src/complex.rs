//! Cubical complexes of 2D and 3D boxes and the dual graph of a 3D box.

use crate::error::{Error, Result};
use crate::graph::{Caps, Graph};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plaquette {
    /// Lowest corner.
    pub base: usize,
    pub axes: (usize, usize),
    /// Edges in cyclic order starting at the base along `axes.0`.
    pub edges: [usize; 4],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cube {
    pub base: usize,
    pub faces: [usize; 6],
}

/// Vertices, edges, plaquettes and (for d=3) cubes of a box measured in
/// cells. Cells are ranked like box-lattice vertices: lexicographically by
/// base corner, then by axis (or axis pair).
#[derive(Clone, Debug)]
pub struct PlaquetteComplex {
    pub dim: usize,
    pub cells: Vec<usize>,
    pub vertices: Vec<Vec<i64>>,
    pub edges: Vec<(usize, usize)>,
    pub edge_axis: Vec<usize>,
    pub plaquettes: Vec<Plaquette>,
    pub cubes: Vec<Cube>,
    /// Plaquettes containing each edge.
    pub edge_plaquettes: Vec<Vec<usize>>,
    pub caps: Caps,
    strides: Vec<usize>,
    edge_index: Vec<[Option<usize>; 3]>,
    plaq_index: Vec<[Option<usize>; 3]>,
}

fn pair_slot(a: usize, b: usize) -> usize {
    match (a.min(b), a.max(b)) {
        (0, 1) => 0,
        (0, 2) => 1,
        _ => 2,
    }
}

impl PlaquetteComplex {
    pub fn new(dim: usize, cells: &[usize]) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::Domain(format!("dimension {dim} not in {{2,3}}")));
        }
        if cells.len() != dim {
            return Err(Error::Domain(format!("{} side lengths given for d={dim}", cells.len())));
        }
        if cells.contains(&0) {
            return Err(Error::Domain("a box needs at least one cell per axis".into()));
        }
        let sizes: Vec<usize> = cells.iter().map(|l| l + 1).collect();
        let mut strides = vec![1; dim];
        for a in (0..dim - 1).rev() {
            strides[a] = strides[a + 1] * sizes[a + 1];
        }
        let nv: usize = sizes.iter().product();
        let vertices: Vec<Vec<i64>> = (0..nv)
            .map(|v| (0..dim).map(|a| ((v / strides[a]) % sizes[a]) as i64).collect())
            .collect();

        let mut edges = Vec::new();
        let mut edge_axis = Vec::new();
        let mut edge_index = vec![[None; 3]; nv];
        for (v, c) in vertices.iter().enumerate() {
            for a in 0..dim {
                if (c[a] as usize) < cells[a] {
                    edge_index[v][a] = Some(edges.len());
                    edges.push((v, v + strides[a]));
                    edge_axis.push(a);
                }
            }
        }

        let mut plaquettes = Vec::new();
        let mut plaq_index = vec![[None; 3]; nv];
        for (v, c) in vertices.iter().enumerate() {
            for a in 0..dim {
                for b in a + 1..dim {
                    if (c[a] as usize) < cells[a] && (c[b] as usize) < cells[b] {
                        let e = |w: usize, x: usize| edge_index[w][x].expect("edge inside box");
                        plaq_index[v][pair_slot(a, b)] = Some(plaquettes.len());
                        plaquettes.push(Plaquette {
                            base: v,
                            axes: (a, b),
                            edges: [e(v, a), e(v + strides[a], b), e(v + strides[b], a), e(v, b)],
                        });
                    }
                }
            }
        }

        let mut cubes = Vec::new();
        if dim == 3 {
            for (v, c) in vertices.iter().enumerate() {
                if (0..3).all(|a| (c[a] as usize) < cells[a]) {
                    let p = |w: usize, a: usize, b: usize| {
                        plaq_index[w][pair_slot(a, b)].expect("face inside box")
                    };
                    cubes.push(Cube {
                        base: v,
                        faces: [
                            p(v, 0, 1),
                            p(v + strides[2], 0, 1),
                            p(v, 0, 2),
                            p(v + strides[1], 0, 2),
                            p(v, 1, 2),
                            p(v + strides[0], 1, 2),
                        ],
                    });
                }
            }
        }

        let mut edge_plaquettes = vec![Vec::new(); edges.len()];
        for (i, p) in plaquettes.iter().enumerate() {
            for &b in &p.edges {
                edge_plaquettes[b].push(i);
            }
        }
        Ok(Self {
            dim,
            cells: cells.to_vec(),
            vertices,
            edges,
            edge_axis,
            plaquettes,
            cubes,
            edge_plaquettes,
            caps: Caps::default(),
            strides,
            edge_index,
            plaq_index,
        })
    }

    pub fn with_caps(mut self, caps: Caps) -> Self {
        self.caps = caps.bounded();
        self
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_plaquettes(&self) -> usize {
        self.plaquettes.len()
    }

    pub fn vertex_at(&self, c: &[i64]) -> Option<usize> {
        if c.len() != self.dim {
            return None;
        }
        let mut v = 0;
        for (a, &x) in c.iter().enumerate() {
            if x < 0 || x as usize > self.cells[a] {
                return None;
            }
            v += x as usize * self.strides[a];
        }
        Some(v)
    }

    pub fn edge_at(&self, c: &[i64], axis: usize) -> Option<usize> {
        let v = self.vertex_at(c)?;
        self.edge_index[v].get(axis).copied().flatten()
    }

    pub fn plaquette_at(&self, c: &[i64], a: usize, b: usize) -> Option<usize> {
        if a == b || a >= self.dim || b >= self.dim {
            return None;
        }
        let v = self.vertex_at(c)?;
        self.plaq_index[v][pair_slot(a, b)]
    }

    pub fn cube_at(&self, c: &[i64]) -> Option<usize> {
        let v = self.vertex_at(c)?;
        self.cubes.binary_search_by_key(&v, |q| q.base).ok()
    }

    /// Edges lying in an odd number of the given plaquettes, ascending.
    pub fn boundary(&self, surface: &[usize]) -> Result<Vec<usize>> {
        let mut odd = vec![false; self.num_edges()];
        for &p in surface {
            let q = self
                .plaquettes
                .get(p)
                .ok_or_else(|| Error::Graph(format!("plaquette {p} out of range")))?;
            for &b in &q.edges {
                odd[b] ^= true;
            }
        }
        Ok((0..odd.len()).filter(|&b| odd[b]).collect())
    }

    /// Vertices of odd degree in the edge set.
    pub fn edge_boundary(&self, edges: &[usize]) -> Vec<usize> {
        let mut odd = vec![false; self.num_vertices()];
        for &b in edges {
            let (u, v) = self.edges[b];
            odd[u] ^= true;
            odd[v] ^= true;
        }
        (0..odd.len()).filter(|&v| odd[v]).collect()
    }

    /// Cubes on the lower and upper side of a plaquette along its normal
    /// axis (d=3 only).
    pub fn plaquette_cubes(&self, p: usize) -> (Option<usize>, Option<usize>) {
        if self.dim != 3 {
            return (None, None);
        }
        let q = &self.plaquettes[p];
        let n = 3 - q.axes.0 - q.axes.1;
        let c = &self.vertices[q.base];
        let upper = self.cube_at(c);
        let mut below = c.clone();
        below[n] -= 1;
        (self.cube_at(&below), upper)
    }
}

/// Dual graph of a 3D box: one vertex per cube, then the outer vertex.
/// Dual edge `i` crosses plaquette `i`.
#[derive(Clone, Debug)]
pub struct DualComplex {
    pub graph: Graph,
    pub outer: usize,
    /// `(lower, upper)` endpoints of each dual edge along the plaquette normal.
    pub sides: Vec<(usize, usize)>,
}

pub fn build_dual_complex(c: &PlaquetteComplex) -> Result<DualComplex> {
    if c.dim != 3 {
        return Err(Error::Domain("the dual graph is built for 3D boxes".into()));
    }
    let outer = c.cubes.len();
    let mut graph = Graph::new(outer + 1);
    let mut sides = Vec::with_capacity(c.num_plaquettes());
    for p in 0..c.num_plaquettes() {
        let (lo, up) = c.plaquette_cubes(p);
        let (lo, up) = (lo.unwrap_or(outer), up.unwrap_or(outer));
        graph.add_edge(lo, up)?;
        sides.push((lo, up));
    }
    Ok(DualComplex {
        graph,
        outer,
        sides,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn census() {
        let c = PlaquetteComplex::new(3, &[1, 1, 1]).unwrap();
        assert_eq!((c.num_vertices(), c.num_edges(), c.num_plaquettes(), c.cubes.len()), (8, 12, 6, 1));
        let c = PlaquetteComplex::new(3, &[2, 1, 1]).unwrap();
        assert_eq!((c.num_edges(), c.num_plaquettes()), (20, 11));
        let c = PlaquetteComplex::new(2, &[3, 3]).unwrap();
        assert_eq!((c.num_vertices(), c.num_edges(), c.num_plaquettes()), (16, 24, 9));
        assert!(c.cubes.is_empty());
        assert!(PlaquetteComplex::new(3, &[1, 0, 1]).is_err());
        assert!(PlaquetteComplex::new(4, &[1, 1, 1, 1]).is_err());
    }

    #[test]
    fn boundary_of_boundary_vanishes() {
        for cells in [[1, 1, 1], [2, 1, 1], [2, 2, 1], [3, 2, 2], [3, 3, 3]] {
            let c = PlaquetteComplex::new(3, &cells).unwrap();
            for q in &c.cubes {
                assert!(c.boundary(&q.faces).unwrap().is_empty());
            }
            for p in &c.plaquettes {
                assert!(c.edge_boundary(&p.edges).is_empty());
            }
            let all: Vec<usize> = (0..c.cubes.len()).flat_map(|i| c.cubes[i].faces).collect();
            assert!(c.boundary(&all).unwrap().is_empty());
        }
    }

    #[test]
    fn dual_graphs() {
        let c = PlaquetteComplex::new(3, &[1, 1, 1]).unwrap();
        let d = build_dual_complex(&c).unwrap();
        assert_eq!(d.graph.num_vertices(), 2);
        assert_eq!(d.graph.edges_between(0, 1).len(), 6);

        let c = PlaquetteComplex::new(3, &[2, 1, 1]).unwrap();
        let d = build_dual_complex(&c).unwrap();
        assert_eq!(d.graph.num_vertices(), 3);
        let interior = d.graph.edges().iter().filter(|&&(u, v)| u != d.outer && v != d.outer).count();
        assert_eq!((interior, d.graph.num_edges() - interior), (1, 10));

        for cells in [[2, 2, 1], [3, 3, 3]] {
            let c = PlaquetteComplex::new(3, &cells).unwrap();
            let d = build_dual_complex(&c).unwrap();
            assert_eq!(d.graph.num_edges(), c.num_plaquettes());
            // every cube has six dual edges
            for q in 0..c.cubes.len() {
                assert_eq!(d.graph.degree(q), 6);
            }
        }
        assert!(build_dual_complex(&PlaquetteComplex::new(2, &[1, 1]).unwrap()).is_err());
    }

    #[test]
    fn lookups() {
        let c = PlaquetteComplex::new(3, &[2, 2, 1]).unwrap();
        let p = c.plaquette_at(&[1, 0, 0], 0, 1).unwrap();
        assert_eq!(c.plaquettes[p].axes, (0, 1));
        let (lo, up) = c.plaquette_cubes(p);
        assert_eq!((lo, up), (None, c.cube_at(&[1, 0, 0])));
        assert!(c.edge_at(&[2, 0, 0], 0).is_none());
        assert!(c.vertex_at(&[3, 0, 0]).is_none());
    }
}
