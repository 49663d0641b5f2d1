//! Undirected multigraphs, exact conductance and instance generators.

use std::collections::VecDeque;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::{EdgeId, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("unknown edge id {0}")]
    UnknownEdge(EdgeId),
    #[error("{n} vertices exceed the exact-conductance cap {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("conductance needs at least two vertices")]
    TooSmall,
    #[error("infeasible generator parameters: {0}")]
    Infeasible(String),
}

/// Undirected multigraph with stable edge ids. Adjacency lists are kept
/// sorted by `(neighbor, edge id)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MultiGraph {
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<(usize, EdgeId)>>,
}

impl MultiGraph {
    pub fn new(n: usize) -> Self {
        MultiGraph {
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = MultiGraph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<EdgeId, GraphError> {
        let n = self.num_vertices();
        for w in [u, v] {
            if w >= n {
                return Err(GraphError::VertexOutOfRange { vertex: w, n });
            }
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        let id = self.edges.len();
        self.edges.push((u, v));
        for (x, y) in [(u, v), (v, u)] {
            let list = &mut self.adj[x];
            let pos = list.partition_point(|&p| p < (y, id));
            list.insert(pos, (y, id));
        }
        Ok(id)
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn endpoints(&self, e: EdgeId) -> (usize, usize) {
        self.edges[e]
    }

    /// The endpoint of `e` other than `v`.
    pub fn other(&self, e: EdgeId, v: usize) -> usize {
        let (a, b) = self.edges[e];
        if a == v {
            b
        } else {
            a
        }
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, EdgeId)] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn volume(&self, set: &[usize]) -> usize {
        set.iter().map(|&v| self.degree(v)).sum()
    }

    /// Number of edges with exactly one endpoint in `set`.
    pub fn boundary(&self, set: &[usize]) -> usize {
        let mut inside = vec![false; self.num_vertices()];
        for &v in set {
            inside[v] = true;
        }
        self.edges
            .iter()
            .filter(|&&(u, v)| inside[u] != inside[v])
            .count()
    }

    /// Edge count between `u` and `v`.
    pub fn multiplicity(&self, u: usize, v: usize) -> usize {
        let list = &self.adj[u];
        let lo = list.partition_point(|&(w, _)| w < v);
        let hi = list.partition_point(|&(w, _)| w <= v);
        hi - lo
    }

    /// The subgraph on all vertices that keeps the listed edges, renumbered
    /// in the given order.
    pub fn edge_subgraph(&self, ids: &[EdgeId]) -> Result<MultiGraph, GraphError> {
        let mut g = MultiGraph::new(self.num_vertices());
        for &e in ids {
            let &(u, v) = self.edges.get(e).ok_or(GraphError::UnknownEdge(e))?;
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Vertices reachable from `source`, in BFS order.
    pub fn component(&self, source: usize) -> Vec<usize> {
        remove_edges(self, &[])
            .bfs_distances(source)
            .iter()
            .enumerate()
            .filter_map(|(v, d)| d.map(|_| v))
            .collect()
    }

    pub fn is_connected(&self) -> bool {
        self.num_vertices() <= 1 || self.component(0).len() == self.num_vertices()
    }
}

/// A cut `(S, V ∖ S)` with its conductance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutReport {
    pub subset: Vec<usize>,
    pub boundary: usize,
    pub vol_subset: usize,
    pub vol_complement: usize,
    pub conductance: Rational,
}

impl CutReport {
    pub fn of(g: &MultiGraph, subset: Vec<usize>) -> Self {
        let boundary = g.boundary(&subset);
        let vol_subset = g.volume(&subset);
        let vol_complement = 2 * g.num_edges() - vol_subset;
        CutReport {
            conductance: cut_conductance(boundary, vol_subset, vol_complement),
            subset,
            boundary,
            vol_subset,
            vol_complement,
        }
    }
}

/// `|∂S| / min(Vol S, Vol S̄)`, taken as 0 when a side has no volume (the
/// boundary is then empty too).
fn cut_conductance(boundary: usize, vol_s: usize, vol_c: usize) -> Rational {
    let denom = vol_s.min(vol_c);
    if denom == 0 {
        Rational::from_integer(0)
    } else {
        Rational::new(boundary as u64, denom as u64)
    }
}

pub const DEFAULT_CONDUCTANCE_CAP: usize = 20;

/// Exact conductance over all nonempty proper subsets, with a minimising
/// cut. Disconnected graphs return 0 with the component of vertex 0.
///
/// Subsets avoiding the last vertex are walked in Gray-code order, which
/// covers every cut once and changes one vertex per step.
pub fn conductance_exact(g: &MultiGraph, cap: usize) -> Result<(Rational, CutReport), GraphError> {
    let n = g.num_vertices();
    if n < 2 {
        return Err(GraphError::TooSmall);
    }
    if !g.is_connected() {
        let report = CutReport::of(g, g.component(0));
        return Ok((report.conductance, report));
    }
    if n > cap || n > 63 {
        return Err(GraphError::TooLarge { n, cap });
    }
    let total = 2 * g.num_edges();
    let mut inside = vec![false; n];
    let mut boundary = 0usize;
    let mut vol = 0usize;
    let mut best: Option<(Rational, u64)> = None;
    let mut mask = 0u64;
    for i in 1u64..(1u64 << (n - 1)) {
        let v = i.trailing_zeros() as usize;
        mask ^= 1 << v;
        let entering = !inside[v];
        inside[v] = entering;
        let deg = g.degree(v);
        let internal = g.neighbors(v).iter().filter(|&&(w, _)| inside[w]).count();
        if entering {
            vol += deg;
            boundary = boundary + deg - 2 * internal;
        } else {
            vol -= deg;
            boundary = boundary + 2 * internal - deg;
        }
        let phi = cut_conductance(boundary, vol, total - vol);
        if best.is_none_or(|(b, _)| phi < b) {
            best = Some((phi, mask));
        }
    }
    let (phi, mask) = best.expect("n ≥ 2 gives at least one cut");
    let subset = (0..n).filter(|&v| mask >> v & 1 == 1).collect();
    Ok((phi, CutReport::of(g, subset)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Complete {
        n: usize,
    },
    /// `n` must be a power of two.
    Hypercube {
        n: usize,
    },
    RandomRegular {
        n: usize,
        d: usize,
        seed: u64,
    },
    /// `cliques` copies of `K_size`, consecutive cliques joined by one edge.
    RingOfCliques {
        cliques: usize,
        size: usize,
    },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Family::Complete { n } => write!(f, "complete(n={n})"),
            Family::Hypercube { n } => write!(f, "hypercube(n={n})"),
            Family::RandomRegular { n, d, seed } => {
                write!(f, "random-regular(n={n},d={d},seed={seed})")
            }
            Family::RingOfCliques { cliques, size } => {
                write!(f, "ring-of-cliques(c={cliques},s={size})")
            }
        }
    }
}

const PAIRING_RESTARTS: usize = 2000;

pub fn generate(family: Family) -> Result<MultiGraph, GraphError> {
    match family {
        Family::Complete { n } => {
            let mut g = MultiGraph::new(n);
            for u in 0..n {
                for v in u + 1..n {
                    g.add_edge(u, v)?;
                }
            }
            Ok(g)
        }
        Family::Hypercube { n } => {
            if !n.is_power_of_two() {
                return Err(GraphError::Infeasible(format!(
                    "hypercube size {n} is not a power of two"
                )));
            }
            let mut g = MultiGraph::new(n);
            for u in 0..n {
                let mut bit = 1;
                while bit < n {
                    if u & bit == 0 {
                        g.add_edge(u, u | bit)?;
                    }
                    bit <<= 1;
                }
            }
            Ok(g)
        }
        Family::RingOfCliques { cliques, size } => {
            if cliques == 0 || size == 0 {
                return Err(GraphError::Infeasible("empty ring of cliques".into()));
            }
            let mut g = MultiGraph::new(cliques * size);
            for c in 0..cliques {
                let base = c * size;
                for u in 0..size {
                    for v in u + 1..size {
                        g.add_edge(base + u, base + v)?;
                    }
                }
            }
            let ring_edges = match cliques {
                1 => 0,
                2 => 1,
                c => c,
            };
            for c in 0..ring_edges {
                let next = (c + 1) % cliques;
                g.add_edge(c * size + size - 1, next * size)?;
            }
            Ok(g)
        }
        Family::RandomRegular { n, d, seed } => random_regular(n, d, seed),
    }
}

/// Pairing model: points are matched up one random pair at a time, a pair
/// that would create a loop or a repeated edge is redrawn, and a stuck or
/// disconnected outcome restarts the whole pairing.
fn random_regular(n: usize, d: usize, seed: u64) -> Result<MultiGraph, GraphError> {
    if d >= n || (n * d) % 2 == 1 {
        return Err(GraphError::Infeasible(format!(
            "no simple {d}-regular graph on {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'restart: for _ in 0..PAIRING_RESTARTS {
        let mut points: Vec<usize> = (0..n * d).map(|p| p / d.max(1)).collect();
        points.shuffle(&mut rng);
        let mut g = MultiGraph::new(n);
        while !points.is_empty() {
            let mut placed = false;
            for _ in 0..50 {
                let i = rng.gen_range(0..points.len());
                let j = rng.gen_range(0..points.len());
                let (u, v) = (points[i], points[j]);
                if i == j || u == v || g.multiplicity(u, v) > 0 {
                    continue;
                }
                g.add_edge(u.min(v), u.max(v))?;
                let (hi, lo) = (i.max(j), i.min(j));
                points.swap_remove(hi);
                points.swap_remove(lo);
                placed = true;
                break;
            }
            if !placed {
                continue 'restart;
            }
        }
        if d == 0 || g.is_connected() {
            return Ok(g);
        }
    }
    Err(GraphError::Infeasible(format!(
        "pairing model for d={d}, n={n} failed after {PAIRING_RESTARTS} restarts"
    )))
}

/// Logical deletion of edges from a graph. Adjacency walks skip deleted
/// ids; the graph itself is shared.
#[derive(Debug, Clone)]
pub struct DeletionView<'g> {
    g: &'g MultiGraph,
    deleted: Vec<bool>,
}

pub fn remove_edges<'g>(g: &'g MultiGraph, f: &[EdgeId]) -> DeletionView<'g> {
    let mut view = DeletionView {
        g,
        deleted: vec![false; g.num_edges()],
    };
    for &e in f {
        view.delete(e);
    }
    view
}

impl<'g> DeletionView<'g> {
    pub fn graph(&self) -> &'g MultiGraph {
        self.g
    }

    pub fn delete(&mut self, e: EdgeId) {
        self.deleted[e] = true;
    }

    pub fn is_deleted(&self, e: EdgeId) -> bool {
        self.deleted[e]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, EdgeId)> + '_ {
        self.g
            .neighbors(v)
            .iter()
            .copied()
            .filter(|&(_, e)| !self.deleted[e])
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).count()
    }

    /// Hop distances from `source`; `None` for unreachable vertices.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.g.num_vertices()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for (w, _) in self.neighbors(u) {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }
}
