//! Depth-first enumeration of per-edge current states with early parity
//! pruning. A vertex's parity is checked as soon as its last incident edge
//! has been assigned. The top of the search tree is cut into a fixed list
//! of prefixes that are processed in parallel and merged in order, so the
//! result does not depend on thread scheduling.

use rayon::prelude::*;

use crate::graph::Graph;
use crate::sum::Neumaier;

use super::DoubleCurrentState;

/// One admissible state of an edge: parities of the two currents,
/// whether the summed current is nonzero, and the weight.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Opt {
    pub odd1: bool,
    pub odd2: bool,
    pub supp: bool,
    pub w: f64,
}

pub(crate) struct Plan {
    pub opts: Vec<Vec<Opt>>,
    emask: Vec<u64>,
    check: Vec<u64>,
    check0: u64,
    t1: u64,
    t2: u64,
}

/// Weights of the single-current trichotomy at coupling magnitude `k`.
pub(crate) fn single_opts(k: f64) -> Vec<Opt> {
    let k = k.abs();
    let s = k.sinh();
    let e = 2.0 * (0.5 * k).sinh().powi(2);
    let mut v = vec![Opt {
        odd1: false,
        odd2: false,
        supp: false,
        w: 1.0,
    }];
    if s > 0.0 {
        v.push(Opt {
            odd1: true,
            odd2: false,
            supp: true,
            w: s,
        });
    }
    if e > 0.0 {
        v.push(Opt {
            odd1: false,
            odd2: false,
            supp: true,
            w: e,
        });
    }
    v
}

/// Joint states of two independent currents on a shared edge, collapsed to
/// (parity1, parity2, support of the sum).
pub(crate) fn double_opts(k: f64) -> Vec<Opt> {
    let k = k.abs();
    let s = k.sinh();
    let c = k.cosh();
    let mut v = vec![Opt {
        odd1: false,
        odd2: false,
        supp: false,
        w: 1.0,
    }];
    if s > 0.0 {
        let both_even_nonzero = s * s;
        v.push(Opt {
            odd1: false,
            odd2: false,
            supp: true,
            w: both_even_nonzero,
        });
        v.push(Opt {
            odd1: true,
            odd2: false,
            supp: true,
            w: s * c,
        });
        v.push(Opt {
            odd1: false,
            odd2: true,
            supp: true,
            w: c * s,
        });
        v.push(Opt {
            odd1: true,
            odd2: true,
            supp: true,
            w: s * s,
        });
    }
    v
}

impl Plan {
    /// `constrained` marks vertices whose parities must match `t1`/`t2`.
    pub fn new(g: &Graph, opts: Vec<Vec<Opt>>, constrained: u64, t1: u64, t2: u64) -> Self {
        let n = g.num_vertices();
        let m = g.num_edges();
        let mut last = vec![usize::MAX; n];
        for b in 0..m {
            let (u, v) = g.edge(b);
            last[u] = b;
            last[v] = b;
        }
        let mut check = vec![0u64; m];
        let mut check0 = 0u64;
        for v in 0..n {
            if constrained >> v & 1 == 0 {
                continue;
            }
            if last[v] == usize::MAX {
                check0 |= 1 << v;
            } else {
                check[last[v]] |= 1 << v;
            }
        }
        Self {
            opts,
            emask: (0..m).map(|b| g.edge_mask(b)).collect(),
            check,
            check0,
            t1,
            t2,
        }
    }

    /// Number of leaves before pruning.
    pub fn raw_states(&self) -> u128 {
        self.opts
            .iter()
            .fold(1u128, |a, o| a.saturating_mul(o.len() as u128))
    }

    fn infeasible(&self) -> bool {
        (self.t1 | self.t2) & self.check0 != 0
    }
}

#[derive(Clone, Copy)]
struct Node {
    depth: usize,
    p1: u64,
    p2: u64,
    s: DoubleCurrentState,
    w: f64,
}

fn descend<A>(plan: &Plan, node: Node, acc: &mut A, leaf: &(impl Fn(&mut A, &DoubleCurrentState, f64) + Sync)) {
    let i = node.depth;
    if i == plan.opts.len() {
        leaf(acc, &node.s, node.w);
        return;
    }
    let em = plan.emask[i];
    let bit = 1u64 << i;
    for o in &plan.opts[i] {
        let p1 = if o.odd1 { node.p1 ^ em } else { node.p1 };
        let p2 = if o.odd2 { node.p2 ^ em } else { node.p2 };
        if ((p1 ^ plan.t1) | (p2 ^ plan.t2)) & plan.check[i] != 0 {
            continue;
        }
        let s = DoubleCurrentState {
            odd1: if o.odd1 { node.s.odd1 | bit } else { node.s.odd1 },
            odd2: if o.odd2 { node.s.odd2 | bit } else { node.s.odd2 },
            support: if o.supp {
                node.s.support | bit
            } else {
                node.s.support
            },
        };
        descend(
            plan,
            Node {
                depth: i + 1,
                p1,
                p2,
                s,
                w: node.w * o.w,
            },
            acc,
            leaf,
        );
    }
}

fn prefixes(plan: &Plan, depth: usize) -> Vec<Node> {
    let mut out = Vec::new();
    let root = Node {
        depth: 0,
        p1: 0,
        p2: 0,
        s: DoubleCurrentState::default(),
        w: 1.0,
    };
    let stop = depth.min(plan.opts.len());
    let mut stack = vec![root];
    // iterative expansion that keeps enumeration order
    while let Some(node) = stack.pop() {
        if node.depth == stop {
            out.push(node);
            continue;
        }
        let i = node.depth;
        let em = plan.emask[i];
        let bit = 1u64 << i;
        for o in plan.opts[i].iter().rev() {
            let p1 = if o.odd1 { node.p1 ^ em } else { node.p1 };
            let p2 = if o.odd2 { node.p2 ^ em } else { node.p2 };
            if ((p1 ^ plan.t1) | (p2 ^ plan.t2)) & plan.check[i] != 0 {
                continue;
            }
            stack.push(Node {
                depth: i + 1,
                p1,
                p2,
                s: DoubleCurrentState {
                    odd1: if o.odd1 { node.s.odd1 | bit } else { node.s.odd1 },
                    odd2: if o.odd2 { node.s.odd2 | bit } else { node.s.odd2 },
                    support: if o.supp {
                        node.s.support | bit
                    } else {
                        node.s.support
                    },
                },
                w: node.w * o.w,
            });
        }
    }
    out
}

/// Default split depth: enough prefixes to occupy a thread pool.
pub(crate) fn default_split(plan: &Plan) -> usize {
    let mut count = 1u128;
    for (i, o) in plan.opts.iter().enumerate() {
        if count >= 64 {
            return i;
        }
        count *= o.len() as u128;
    }
    plan.opts.len()
}

/// Generic fold over all admissible leaves. `leaf` receives the state and
/// its weight; per-prefix accumulators are merged in enumeration order.
pub(crate) fn fold<A: Send>(
    plan: &Plan,
    split: Option<usize>,
    init: impl Fn() -> A + Sync,
    leaf: impl Fn(&mut A, &DoubleCurrentState, f64) + Sync,
    mut merge: impl FnMut(&mut A, A),
) -> A {
    let mut total = init();
    if plan.infeasible() {
        return total;
    }
    let depth = split.unwrap_or_else(|| default_split(plan));
    let parts: Vec<A> = prefixes(plan, depth)
        .into_par_iter()
        .map(|node| {
            let mut acc = init();
            descend(plan, node, &mut acc, &leaf);
            acc
        })
        .collect();
    for p in parts {
        merge(&mut total, p);
    }
    total
}

/// Weighted sums of `N` leaf functions.
pub(crate) fn sums<const N: usize>(
    plan: &Plan,
    split: Option<usize>,
    f: impl Fn(&DoubleCurrentState) -> [f64; N] + Sync,
) -> [f64; N] {
    let acc = fold(
        plan,
        split,
        || [Neumaier::new(); N],
        |acc, s, w| {
            let vals = f(s);
            for (a, v) in acc.iter_mut().zip(vals) {
                if v != 0.0 {
                    a.add(w * v);
                }
            }
        },
        |t, p| {
            for (a, b) in t.iter_mut().zip(p.iter()) {
                a.merge(b);
            }
        },
    );
    acc.map(|a| a.value())
}
