//! Union-find variants: a plain one, a fixed-capacity one for enumeration
//! leaves, and a rollback structure with Z2 parities for edge-by-edge search.

/// Plain union-find with path compression and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
    count: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
            count: n,
        }
    }

    pub fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut x = x;
        while self.parent[x] != r {
            let next = self.parent[x];
            self.parent[x] = r;
            x = next;
        }
        r
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        self.count -= 1;
        true
    }

    pub fn connected(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    /// Number of components.
    pub fn count(&self) -> usize {
        self.count
    }
}

/// Allocation-free union-find over at most 64 vertices with a Z2 label
/// relative to the root. `frustrated` is set when an edge closes a cycle
/// whose label sum is odd.
#[derive(Clone, Copy)]
pub struct SmallDsu {
    parent: [u8; 64],
    parity: [u8; 64],
    pub frustrated: bool,
}

impl SmallDsu {
    pub fn new(n: usize) -> Self {
        debug_assert!(n <= 64);
        let mut parent = [0u8; 64];
        for (i, p) in parent.iter_mut().enumerate() {
            *p = i as u8;
        }
        Self {
            parent,
            parity: [0; 64],
            frustrated: false,
        }
    }

    /// Root of `x` and the parity of `x` relative to it.
    #[inline]
    pub fn find(&mut self, x: usize) -> (usize, u8) {
        let mut r = x;
        let mut par = 0u8;
        while self.parent[r] as usize != r {
            par ^= self.parity[r];
            r = self.parent[r] as usize;
        }
        // compress
        let mut y = x;
        let mut py = par;
        while self.parent[y] as usize != r {
            let next = self.parent[y] as usize;
            let pn = py ^ self.parity[y];
            self.parent[y] = r as u8;
            self.parity[y] = py;
            y = next;
            py = pn;
        }
        (r, par)
    }

    /// Join `a` and `b` with relative label `label` (1 = opposite signs).
    #[inline]
    pub fn union(&mut self, a: usize, b: usize, label: u8) {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            if pa ^ pb != label {
                self.frustrated = true;
            }
            return;
        }
        self.parent[rb] = ra as u8;
        self.parity[rb] = pa ^ pb ^ label;
    }

    #[inline]
    pub fn connected(&mut self, a: usize, b: usize) -> bool {
        self.find(a).0 == self.find(b).0
    }

    /// Relative label of `a` and `b`, if connected.
    #[inline]
    pub fn relative(&mut self, a: usize, b: usize) -> Option<u8> {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        (ra == rb).then_some(pa ^ pb)
    }

    /// Bit mask of the vertices (among the first `n`) sharing a root with `x`.
    pub fn component_mask(&mut self, x: usize, n: usize) -> u64 {
        let r = self.find(x).0;
        let mut m = 0u64;
        for v in 0..n {
            if self.find(v).0 == r {
                m |= 1 << v;
            }
        }
        m
    }

    /// Whether some vertex of mask `a` shares a component with some vertex of mask `b`.
    pub fn masks_connected(&mut self, a: u64, b: u64, n: usize) -> bool {
        let mut roots_a = 0u64;
        for v in 0..n {
            if a >> v & 1 == 1 {
                roots_a |= 1 << self.find(v).0;
            }
        }
        (0..n).any(|v| b >> v & 1 == 1 && roots_a >> self.find(v).0 & 1 == 1)
    }

    /// Mask of vertices connected to any vertex of `seed`.
    pub fn closure(&mut self, seed: u64, n: usize) -> u64 {
        let mut roots = 0u64;
        for v in 0..n {
            if seed >> v & 1 == 1 {
                roots |= 1 << self.find(v).0;
            }
        }
        let mut m = 0u64;
        for v in 0..n {
            if roots >> self.find(v).0 & 1 == 1 {
                m |= 1 << v;
            }
        }
        m
    }
}

/// Union-find with undo, used by depth-first edge enumeration. Tracks the
/// number of components, how many of them contain a marked (boundary)
/// vertex, and how many unions closed an odd cycle.
#[derive(Clone, Debug)]
pub struct RollbackDsu {
    parent: Vec<usize>,
    rank: Vec<u8>,
    parity: Vec<u8>,
    marked: Vec<bool>,
    components: usize,
    free_components: usize,
    frustrations: usize,
    history: Vec<Undo>,
}

#[derive(Clone, Copy, Debug)]
enum Undo {
    Joined {
        child: usize,
        root: usize,
        rank_bumped: bool,
        marked_before: bool,
        free_lost: usize,
    },
    Frustrated,
    Nothing,
}

impl RollbackDsu {
    pub fn new(n: usize, marked: &[bool]) -> Self {
        let free = marked.iter().filter(|&&m| !m).count();
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
            parity: vec![0; n],
            marked: marked.to_vec(),
            components: n,
            free_components: free,
            frustrations: 0,
            history: Vec::new(),
        }
    }

    pub fn find(&self, x: usize) -> (usize, u8) {
        let mut r = x;
        let mut p = 0;
        while self.parent[r] != r {
            p ^= self.parity[r];
            r = self.parent[r];
        }
        (r, p)
    }

    pub fn union(&mut self, a: usize, b: usize, label: u8) {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            if pa ^ pb != label {
                self.frustrations += 1;
                self.history.push(Undo::Frustrated);
            } else {
                self.history.push(Undo::Nothing);
            }
            return;
        }
        let (root, child) = if self.rank[ra] >= self.rank[rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        let rank_bumped = self.rank[ra] == self.rank[rb];
        if rank_bumped {
            self.rank[root] += 1;
        }
        self.parent[child] = root;
        self.parity[child] = pa ^ pb ^ label;
        let marked_before = self.marked[root];
        let free_lost = match (self.marked[root], self.marked[child]) {
            (false, false) => 1,
            (true, true) => 0,
            _ => 1,
        };
        self.marked[root] = self.marked[root] || self.marked[child];
        self.components -= 1;
        self.free_components -= free_lost;
        self.history.push(Undo::Joined {
            child,
            root,
            rank_bumped,
            marked_before,
            free_lost,
        });
    }

    pub fn undo(&mut self) {
        match self.history.pop().expect("undo on empty history") {
            Undo::Joined {
                child,
                root,
                rank_bumped,
                marked_before,
                free_lost,
            } => {
                self.parent[child] = child;
                self.parity[child] = 0;
                if rank_bumped {
                    self.rank[root] -= 1;
                }
                self.marked[root] = marked_before;
                self.components += 1;
                self.free_components += free_lost;
            }
            Undo::Frustrated => self.frustrations -= 1,
            Undo::Nothing => {}
        }
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// Components containing no marked vertex.
    pub fn free_components(&self) -> usize {
        self.free_components
    }

    pub fn frustrated(&self) -> bool {
        self.frustrations > 0
    }

    pub fn connected(&self, a: usize, b: usize) -> bool {
        self.find(a).0 == self.find(b).0
    }

    pub fn relative(&self, a: usize, b: usize) -> Option<u8> {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        (ra == rb).then_some(pa ^ pb)
    }

    /// Whether `x` shares a component with any vertex in `set`.
    pub fn touches(&self, x: usize, set: &[usize]) -> bool {
        let r = self.find(x).0;
        set.iter().any(|&u| self.find(u).0 == r)
    }

    pub fn sets_connected(&self, a: &[usize], b: &[usize]) -> bool {
        a.iter().any(|&u| self.touches(u, b))
    }
}
