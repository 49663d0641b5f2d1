//! Edge-disjoint short paths through the demand-path hypergraph.
//!
//! The hypergraph is never built. Its `A`-side is the demand list (by
//! index), its `B`-side is the edge set of the graph, and a hyperedge is a
//! demand together with a simple path of at most `r` edges joining its
//! endpoints. Paths get edge ids the first time an oracle or a caller
//! interns them in a [`PathArena`].
//!
//! Two oracles answer half-layer queries: repeated BFS per demand, and a
//! per-source blocking-flow search over level graphs. Both claim a path by
//! deleting its edges from `G ∖ F` together with every edge of each matched
//! path it touches.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::engine::{Engine, EngineConfig, EngineError, EngineStats, TraceLine};
use crate::graph::{remove_edges, DeletionView, MultiGraph};
use crate::halflayer::{HalfLayerQuery, HalfLayerState, LayerOracle, OracleError, OracleKind};
use crate::{EdgeId, Rational};

#[derive(Debug, Error)]
pub enum RoutingError {
    #[error("invalid routing instance: {0}")]
    Invalid(String),
    #[error("routing failed within iteration bound: {0}")]
    Stalled(EngineError),
    #[error(transparent)]
    Engine(EngineError),
    #[error("router produced an invalid solution: {0}")]
    InvalidOutput(SolutionViolation),
}

impl From<EngineError> for RoutingError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::NoProgress { .. } => RoutingError::Stalled(e),
            other => RoutingError::Engine(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingInstance {
    pub graph: MultiGraph,
    pub demands: Vec<(usize, usize)>,
    /// Largest number of demands any vertex may appear in.
    pub k: usize,
    /// Maximum path length in edges.
    pub r: usize,
    /// Per-demand path cap inside one half layer.
    pub delta: usize,
}

/// `⌊18 log₂ n / φ⌋`, at least 1.
pub fn default_r(n: usize, phi: Rational) -> usize {
    let phi = *phi.numer() as f64 / *phi.denom() as f64;
    if phi <= 0.0 {
        return usize::MAX;
    }
    ((18.0 * (n.max(1) as f64).log2() / phi).floor() as usize).max(1)
}

/// `⌈4 log₂ n⌉`, at least 1.
pub fn default_delta(n: usize) -> usize {
    ((4.0 * (n.max(1) as f64).log2()).ceil() as usize).max(1)
}

/// Number of demands each vertex appears in. Out-of-range endpoints are
/// ignored.
pub fn demand_multiplicity(n: usize, demands: &[(usize, usize)]) -> Vec<usize> {
    let mut count = vec![0; n];
    for &(s, t) in demands {
        for v in [s, t] {
            if v < n {
                count[v] += 1;
            }
        }
    }
    count
}

impl RoutingInstance {
    /// User-chosen `r` and `Δ`; `k` is the largest demand multiplicity.
    pub fn relaxed(
        graph: MultiGraph,
        demands: Vec<(usize, usize)>,
        r: usize,
        delta: usize,
    ) -> Result<Self, RoutingError> {
        let k = demand_multiplicity(graph.num_vertices(), &demands)
            .into_iter()
            .max()
            .unwrap_or(0);
        let inst = RoutingInstance {
            graph,
            demands,
            k,
            r,
            delta,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Default parameters `r = ⌊18 log₂ n / φ⌋`, `Δ = ⌈4 log₂ n⌉`.
    pub fn with_defaults(
        graph: MultiGraph,
        demands: Vec<(usize, usize)>,
        phi: Rational,
    ) -> Result<Self, RoutingError> {
        if *phi.numer() == 0 {
            return Err(RoutingError::Invalid("conductance must be positive".into()));
        }
        let n = graph.num_vertices();
        let r = default_r(n, phi).min(n.saturating_sub(1).max(1));
        Self::relaxed(graph, demands, r, default_delta(n))
    }

    pub fn validate(&self) -> Result<(), RoutingError> {
        let n = self.graph.num_vertices();
        if self.r == 0 {
            return Err(RoutingError::Invalid("r must be at least 1".into()));
        }
        if self.delta == 0 {
            return Err(RoutingError::Invalid("Δ must be at least 1".into()));
        }
        for (i, &(s, t)) in self.demands.iter().enumerate() {
            if s >= n || t >= n {
                return Err(RoutingError::Invalid(format!(
                    "demand {i} ({s}, {t}) has an endpoint outside 0..{n}"
                )));
            }
            if s == t {
                return Err(RoutingError::Invalid(format!("demand {i} has s = t = {s}")));
            }
        }
        let count = demand_multiplicity(n, &self.demands);
        if let Some(v) = (0..n).find(|&v| count[v] > self.k) {
            return Err(RoutingError::Invalid(format!(
                "vertex {v} appears in {} demands, more than k = {}",
                count[v], self.k
            )));
        }
        Ok(())
    }
}

/// Hypothesis `φ³δ ≥ (35 log₂ n)³ k`, reported only.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub n: usize,
    pub phi: Rational,
    pub min_degree: usize,
    pub k: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl HypothesisReport {
    pub fn new(inst: &RoutingInstance, phi: Rational) -> Self {
        let n = inst.graph.num_vertices();
        let p = *phi.numer() as f64 / *phi.denom() as f64;
        let min_degree = inst.graph.min_degree();
        HypothesisReport {
            n,
            phi,
            min_degree,
            k: inst.k,
            lhs: p.powi(3) * min_degree as f64,
            rhs: (35.0 * (n.max(1) as f64).log2()).powi(3) * inst.k as f64,
        }
    }

    pub fn holds(&self) -> bool {
        self.lhs >= self.rhs
    }
}

impl fmt::Display for HypothesisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "hypothesis phi^3*delta >= (35 log2 n)^3 k: {:.4e} vs {:.4e} (n={}, phi={}, delta={}, k={}): {}",
            self.lhs,
            self.rhs,
            self.n,
            self.phi,
            self.min_degree,
            self.k,
            if self.holds() { "holds" } else { "fails" }
        )
    }
}

/// One hyperedge of the implicit hypergraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandPath {
    pub demand: usize,
    /// Vertex sequence from `s` to `t`.
    pub vertices: Vec<usize>,
    /// Edge ids in path order.
    pub edges: Vec<EdgeId>,
    sorted: Vec<EdgeId>,
}

impl DemandPath {
    /// The `B`-part: edge ids, ascending.
    pub fn b_part(&self) -> &[EdgeId] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Interned demand paths; ids are handed out in first-seen order.
#[derive(Debug, Clone, Default)]
pub struct PathArena {
    paths: Vec<DemandPath>,
    index: HashMap<(usize, Vec<EdgeId>), EdgeId>,
}

impl PathArena {
    pub fn intern(&mut self, demand: usize, vertices: Vec<usize>, edges: Vec<EdgeId>) -> EdgeId {
        if let Some(&id) = self.index.get(&(demand, edges.clone())) {
            return id;
        }
        let id = self.paths.len();
        let mut sorted = edges.clone();
        sorted.sort_unstable();
        self.index.insert((demand, edges.clone()), id);
        self.paths.push(DemandPath {
            demand,
            vertices,
            edges,
            sorted,
        });
        id
    }

    pub fn get(&self, id: EdgeId) -> Option<&DemandPath> {
        self.paths.get(id)
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

/// `F`: the edges of all matched paths together with the edges named by
/// `B′`.
pub fn state_to_forbidden_edges(arena: &PathArena, state: &HalfLayerState) -> BTreeSet<EdgeId> {
    let mut f: BTreeSet<EdgeId> = state.forbidden_b.iter().copied().collect();
    for &m in state.matching.ids() {
        if let Some(p) = arena.get(m) {
            f.extend(p.edges.iter().copied());
        }
    }
    f
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphOracleKind {
    Bfs,
    BlockingFlow,
}

impl GraphOracleKind {
    pub fn from_oracle_kind(kind: OracleKind) -> Option<Self> {
        match kind {
            OracleKind::GraphBfs => Some(GraphOracleKind::Bfs),
            OracleKind::GraphBlockingFlow => Some(GraphOracleKind::BlockingFlow),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OracleStats {
    pub calls: u64,
    pub claimed: u64,
    /// Adjacency entries scanned.
    pub work: u64,
    pub phases: u64,
    /// Audited claims.
    pub audited: u64,
    /// Claims that reused an edge of `F` or of an earlier claim, or were not
    /// a valid path.
    pub disjointness_violations: u64,
    /// Claims longer than the shortest available path at claim time.
    pub shortest_violations: u64,
}

/// Half-layer oracle over the implicit demand-path hypergraph.
pub struct GraphOracle<'i> {
    inst: &'i RoutingInstance,
    kind: GraphOracleKind,
    arena: PathArena,
    audit: bool,
    stats: OracleStats,
}

struct Claim<'g> {
    view: DeletionView<'g>,
    /// Independent record of `F` plus claimed and expanded edges.
    used: Option<Vec<bool>>,
}

impl<'i> GraphOracle<'i> {
    pub fn new(inst: &'i RoutingInstance, kind: GraphOracleKind) -> Self {
        GraphOracle {
            inst,
            kind,
            arena: PathArena::default(),
            audit: false,
            stats: OracleStats::default(),
        }
    }

    /// Re-check every claim against an independent used-edge record and,
    /// for shortest-path claims, a fresh BFS.
    pub fn with_audit(mut self) -> Self {
        self.audit = true;
        self
    }

    pub fn arena(&self) -> &PathArena {
        &self.arena
    }

    pub fn path(&self, id: EdgeId) -> &DemandPath {
        &self.arena.paths[id]
    }

    pub fn intern(&mut self, demand: usize, vertices: Vec<usize>, edges: Vec<EdgeId>) -> EdgeId {
        self.arena.intern(demand, vertices, edges)
    }

    pub fn stats(&self) -> &OracleStats {
        &self.stats
    }

    fn start(&self, query: &HalfLayerQuery<'_>) -> Claim<'i> {
        let forbidden: Vec<EdgeId> = (0..query.forbidden.len())
            .filter(|&e| query.forbidden[e])
            .collect();
        Claim {
            view: remove_edges(&self.inst.graph, &forbidden),
            used: self.audit.then(|| query.forbidden.to_vec()),
        }
    }

    /// Interns and claims a path, deleting it and every matched path it
    /// touches.
    fn claim(
        &mut self,
        claim: &mut Claim<'i>,
        owner: &[Option<EdgeId>],
        demand: usize,
        vertices: Vec<usize>,
        edges: Vec<EdgeId>,
    ) -> EdgeId {
        if let Some(used) = claim.used.as_mut() {
            self.stats.audited += 1;
            let (s, t) = self.inst.demands[demand];
            let g = &self.inst.graph;
            let valid = vertices.first() == Some(&s)
                && vertices.last() == Some(&t)
                && edges.len() + 1 == vertices.len()
                && edges.len() <= self.inst.r
                && edges.iter().enumerate().all(|(i, &e)| {
                    let (u, v) = g.endpoints(e);
                    (u, v) == (vertices[i], vertices[i + 1]) || (v, u) == (vertices[i], vertices[i + 1])
                });
            let matched = self.is_matched_path(owner, demand, &edges);
            if !valid || matched || edges.iter().any(|&e| used[e]) {
                self.stats.disjointness_violations += 1;
            }
            for &e in &edges {
                used[e] = true;
                if let Some(f) = owner[e] {
                    for &x in &self.arena.paths[f].edges {
                        used[x] = true;
                    }
                }
            }
        }
        for &e in &edges {
            claim.view.delete(e);
            if let Some(f) = owner[e] {
                for &x in &self.arena.paths[f].edges {
                    claim.view.delete(x);
                }
            }
        }
        self.stats.claimed += 1;
        self.arena.intern(demand, vertices, edges)
    }

    /// Whether `edges` is the path currently matched to `demand`.
    fn is_matched_path(&self, owner: &[Option<EdgeId>], demand: usize, edges: &[EdgeId]) -> bool {
        let Some(f) = edges.first().and_then(|&e| owner[e]) else {
            return false;
        };
        let p = &self.arena.paths[f];
        p.demand == demand && p.edges.len() == edges.len() && edges.iter().all(|&e| owner[e] == Some(f))
    }

    /// Shortest path for `demand` other than its matched path. A different
    /// simple path misses some edge of the matched one, so the answer is the
    /// best over deleting each of its edges in turn (first one on ties).
    fn shortest_unmatched_path(
        &mut self,
        view: &DeletionView<'_>,
        owner: &[Option<EdgeId>],
        demand: usize,
    ) -> Option<(Vec<usize>, Vec<EdgeId>)> {
        let (s, t) = self.inst.demands[demand];
        let found = self.shortest_path(view, s, &[t])?;
        if !self.is_matched_path(owner, demand, &found.1) {
            return Some(found);
        }
        let mut best: Option<(Vec<usize>, Vec<EdgeId>)> = None;
        for &e in &found.1 {
            let mut without = view.clone();
            without.delete(e);
            if let Some(p) = self.shortest_path(&without, s, &[t]) {
                if best.as_ref().is_none_or(|b| p.1.len() < b.1.len()) {
                    best = Some(p);
                }
            }
        }
        best
    }

    fn bfs_half_layer(&mut self, query: &HalfLayerQuery<'_>) -> Vec<EdgeId> {
        let mut claim = self.start(query);
        let mut out = Vec::new();
        for a in 0..self.inst.demands.len() {
            self.sweep_demand(&mut claim, query.owner, a, query.capacity[a], &mut out);
        }
        out
    }

    /// Claims up to `budget` shortest unmatched paths for one demand.
    fn sweep_demand(
        &mut self,
        claim: &mut Claim<'i>,
        owner: &[Option<EdgeId>],
        demand: usize,
        budget: usize,
        out: &mut Vec<EdgeId>,
    ) -> usize {
        for used in 0..budget {
            let Some((vertices, edges)) = self.shortest_unmatched_path(&claim.view, owner, demand) else {
                return used;
            };
            out.push(self.claim(claim, owner, demand, vertices, edges));
        }
        budget
    }

    /// BFS from `s` to the nearest of `targets` within `r` edges. Parents
    /// are the first discoverer, scanning neighbours by ascending id.
    fn shortest_path(
        &mut self,
        view: &DeletionView<'_>,
        s: usize,
        targets: &[usize],
    ) -> Option<(Vec<usize>, Vec<EdgeId>)> {
        let n = self.inst.graph.num_vertices();
        let mut parent: Vec<Option<(usize, EdgeId)>> = vec![None; n];
        let mut seen = vec![false; n];
        seen[s] = true;
        let mut frontier = vec![s];
        for _ in 0..self.inst.r {
            let mut next = Vec::new();
            for &u in &frontier {
                for &(w, e) in self.inst.graph.neighbors(u) {
                    self.stats.work += 1;
                    if view.is_deleted(e) || seen[w] {
                        continue;
                    }
                    seen[w] = true;
                    parent[w] = Some((u, e));
                    if targets.contains(&w) {
                        return Some(unwind(&parent, w));
                    }
                    next.push(w);
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        None
    }

    fn blocking_flow_half_layer(&mut self, query: &HalfLayerQuery<'_>) -> Vec<EdgeId> {
        let inst: &'i RoutingInstance = self.inst;
        let g = &inst.graph;
        let n = g.num_vertices();
        let mut claim = self.start(query);
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (a, &(s, _)) in self.inst.demands.iter().enumerate() {
            if query.capacity[a] > 0 {
                groups.entry(s).or_default().push(a);
            }
        }
        let mut out = Vec::new();
        for (s, group) in groups {
            let mut residual: Vec<usize> = group.iter().map(|&a| query.capacity[a]).collect();
            // Capacity of the arc (t, t′) per vertex.
            let mut term = vec![0usize; n];
            for (i, &a) in group.iter().enumerate() {
                term[self.inst.demands[a].1] += residual[i];
            }
            let mut stuck = false;
            while !stuck {
                let dist = level_distances(&claim.view, s, self.inst.r, &mut self.stats.work);
                let Some(depth) = (0..n)
                    .filter(|&v| term[v] > 0 && dist[v] != usize::MAX)
                    .map(|v| dist[v])
                    .min()
                else {
                    break;
                };
                self.stats.phases += 1;
                let mut arc = vec![0usize; n];
                stuck = true;
                while let Some((vertices, edges)) = level_dfs(
                    g,
                    &claim.view,
                    &dist,
                    depth,
                    &term,
                    s,
                    &mut arc,
                    &mut self.stats.work,
                ) {
                    let t = *vertices.last().expect("nonempty path");
                    let Some(i) = (0..group.len()).find(|&i| {
                        residual[i] > 0
                            && self.inst.demands[group[i]].1 == t
                            && !self.is_matched_path(query.owner, group[i], &edges)
                    }) else {
                        // Only a matched path reached t: treat the last arc
                        // as a dead end.
                        arc[vertices[vertices.len() - 2]] += 1;
                        continue;
                    };
                    stuck = false;
                    residual[i] -= 1;
                    term[t] -= 1;
                    if self.audit {
                        let targets: Vec<usize> = (0..n).filter(|&v| term[v] > 0 || v == t).collect();
                        match self.shortest_path(&claim.view, s, &targets) {
                            Some((_, e)) if e.len() == edges.len() => {}
                            _ => self.stats.shortest_violations += 1,
                        }
                    }
                    out.push(self.claim(&mut claim, query.owner, group[i], vertices, edges));
                }
            }
            // A phase that only met matched paths stops the search early;
            // a per-demand sweep restores maximality.
            if stuck {
                for (i, &a) in group.iter().enumerate() {
                    if residual[i] > 0 {
                        residual[i] -= self.sweep_demand(&mut claim, query.owner, a, residual[i], &mut out);
                    }
                }
            }
        }
        out
    }
}

fn unwind(parent: &[Option<(usize, EdgeId)>], end: usize) -> (Vec<usize>, Vec<EdgeId>) {
    let mut vertices = vec![end];
    let mut edges = Vec::new();
    let mut v = end;
    while let Some((u, e)) = parent[v] {
        vertices.push(u);
        edges.push(e);
        v = u;
    }
    vertices.reverse();
    edges.reverse();
    (vertices, edges)
}

/// BFS levels from `s` up to depth `r`; `usize::MAX` beyond.
fn level_distances(view: &DeletionView<'_>, s: usize, r: usize, work: &mut u64) -> Vec<usize> {
    let g = view.graph();
    let mut dist = vec![usize::MAX; g.num_vertices()];
    dist[s] = 0;
    let mut frontier = vec![s];
    for d in 1..=r {
        let mut next = Vec::new();
        for &u in &frontier {
            for &(w, e) in g.neighbors(u) {
                *work += 1;
                if !view.is_deleted(e) && dist[w] == usize::MAX {
                    dist[w] = d;
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    dist
}

/// One DFS in the level graph from `s` to a terminal with capacity at level
/// `depth`. `arc[v]` is the current-arc pointer of `v`; arcs that lead to
/// dead ends are skipped for the rest of the phase.
#[allow(clippy::too_many_arguments)]
fn level_dfs(
    g: &MultiGraph,
    view: &DeletionView<'_>,
    dist: &[usize],
    depth: usize,
    term: &[usize],
    s: usize,
    arc: &mut [usize],
    work: &mut u64,
) -> Option<(Vec<usize>, Vec<EdgeId>)> {
    let mut vertices = vec![s];
    let mut edges = Vec::new();
    loop {
        let u = *vertices.last().expect("stack holds s");
        if dist[u] == depth && term[u] > 0 {
            return Some((vertices, edges));
        }
        let adj = g.neighbors(u);
        let mut advanced = false;
        if dist[u] < depth {
            while arc[u] < adj.len() {
                let (w, e) = adj[arc[u]];
                *work += 1;
                if !view.is_deleted(e) && dist[w] == dist[u] + 1 {
                    vertices.push(w);
                    edges.push(e);
                    advanced = true;
                    break;
                }
                arc[u] += 1;
            }
        }
        if !advanced {
            vertices.pop();
            edges.pop();
            match vertices.last() {
                Some(&p) => arc[p] += 1,
                None => return None,
            }
        }
    }
}

impl LayerOracle for GraphOracle<'_> {
    fn num_a(&self) -> usize {
        self.inst.demands.len()
    }

    fn num_b(&self) -> usize {
        self.inst.graph.num_edges()
    }

    fn edge_a(&self, e: EdgeId) -> usize {
        self.arena.paths[e].demand
    }

    fn edge_b(&self, e: EdgeId) -> &[usize] {
        &self.arena.paths[e].sorted
    }

    fn half_layer(&mut self, query: &HalfLayerQuery<'_>) -> Result<Vec<EdgeId>, OracleError> {
        if query.capacity.len() != self.num_a() || query.forbidden.len() != self.num_b() {
            return Err(OracleError("query does not match the routing instance".into()));
        }
        self.stats.calls += 1;
        Ok(match self.kind {
            GraphOracleKind::Bfs => self.bfs_half_layer(query),
            GraphOracleKind::BlockingFlow => self.blocking_flow_half_layer(query),
        })
    }
}

/// Vertex sequence per demand.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PathSolution {
    pub paths: Vec<Vec<usize>>,
}

#[derive(Debug, Clone)]
pub struct RouteOutcome {
    pub solution: PathSolution,
    /// Graph edge ids of each path, in path order.
    pub edge_ids: Vec<Vec<EdgeId>>,
    pub engine: EngineStats,
    pub oracle: OracleStats,
    pub trace: Vec<TraceLine>,
}

/// Routes every demand on an edge-disjoint path of at most `r` edges.
pub fn route(inst: &RoutingInstance, cfg: &EngineConfig) -> Result<PathSolution, RoutingError> {
    route_with_stats(inst, cfg).map(|out| out.solution)
}

/// [`route`], also returning engine and oracle counters. The engine's `Δ`
/// is taken from the instance.
pub fn route_with_stats(inst: &RoutingInstance, cfg: &EngineConfig) -> Result<RouteOutcome, RoutingError> {
    inst.validate()?;
    let kind = GraphOracleKind::from_oracle_kind(cfg.oracle.kind)
        .ok_or_else(|| RoutingError::Invalid(format!("{:?} is not a graph oracle", cfg.oracle.kind)))?;
    let cfg = EngineConfig {
        delta: inst.delta,
        ..cfg.clone()
    };
    let mut oracle = GraphOracle::new(inst, kind);
    if cfg.strict {
        oracle = oracle.with_audit();
    }
    let mut engine = Engine::new(oracle, cfg)?;
    let outcome = engine.run()?;
    let oracle = engine.into_oracle();
    let mut by_demand = vec![None; inst.demands.len()];
    for &e in &outcome.matching {
        by_demand[oracle.path(e).demand] = Some(e);
    }
    let mut solution = PathSolution::default();
    let mut edge_ids = Vec::new();
    for (a, e) in by_demand.into_iter().enumerate() {
        let e = e.ok_or_else(|| {
            RoutingError::Engine(EngineError::InvariantBreach {
                message: format!("demand {a} unmatched after termination"),
                dump: String::new(),
            })
        })?;
        let p = oracle.path(e);
        solution.paths.push(p.vertices.clone());
        edge_ids.push(p.edges.clone());
    }
    verify_solution(inst, &solution).map_err(RoutingError::InvalidOutput)?;
    Ok(RouteOutcome {
        solution,
        edge_ids,
        engine: outcome.stats,
        oracle: oracle.stats().clone(),
        trace: outcome.trace,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolutionViolation {
    #[error("solution has {found} paths for {expected} demands")]
    CountMismatch { expected: usize, found: usize },
    #[error("demand {demand}: empty path")]
    Empty { demand: usize },
    #[error("demand {demand}: endpoints do not match ({s}, {t})")]
    Endpoints { demand: usize, s: usize, t: usize },
    #[error("demand {demand}: length bound exceeded ({length} > {r})")]
    LengthBound { demand: usize, length: usize, r: usize },
    #[error("demand {demand}: no edge between {u} and {v}")]
    NotAnEdge { demand: usize, u: usize, v: usize },
    #[error("demand {demand}: edge reuse between {u} and {v}")]
    EdgeReuse { demand: usize, u: usize, v: usize },
}

/// Checks endpoints, adjacency, length and edge-disjointness. Paths name
/// vertices only, so a pair of vertices may be used as often as the graph
/// has parallel edges between them.
pub fn verify_solution(inst: &RoutingInstance, sol: &PathSolution) -> Result<(), SolutionViolation> {
    if sol.paths.len() != inst.demands.len() {
        return Err(SolutionViolation::CountMismatch {
            expected: inst.demands.len(),
            found: sol.paths.len(),
        });
    }
    let g = &inst.graph;
    let n = g.num_vertices();
    let mut used: HashMap<(usize, usize), usize> = HashMap::new();
    for (demand, (path, &(s, t))) in sol.paths.iter().zip(&inst.demands).enumerate() {
        if path.is_empty() {
            return Err(SolutionViolation::Empty { demand });
        }
        if path[0] != s || path[path.len() - 1] != t {
            return Err(SolutionViolation::Endpoints { demand, s, t });
        }
        if path.len() - 1 > inst.r {
            return Err(SolutionViolation::LengthBound {
                demand,
                length: path.len() - 1,
                r: inst.r,
            });
        }
        for w in path.windows(2) {
            let (u, v) = (w[0], w[1]);
            if u >= n || v >= n || u == v || g.multiplicity(u, v) == 0 {
                return Err(SolutionViolation::NotAnEdge { demand, u, v });
            }
            let count = used.entry((u.min(v), u.max(v))).or_insert(0);
            *count += 1;
            if *count > g.multiplicity(u, v) {
                return Err(SolutionViolation::EdgeReuse { demand, u, v });
            }
        }
    }
    Ok(())
}

/// Greedily keeps demands vertex-disjoint from those already kept. With
/// multiplicity at most `k` this keeps at least `|D| / (2k)` of them.
pub fn vertex_disjoint_subset(demands: &[(usize, usize)], k: usize) -> Result<Vec<usize>, RoutingError> {
    let n = demands.iter().map(|&(s, t)| s.max(t) + 1).max().unwrap_or(0);
    if let Some(v) = demand_multiplicity(n, demands).iter().position(|&c| c > k) {
        return Err(RoutingError::Invalid(format!(
            "vertex {v} appears in more than k = {k} demands"
        )));
    }
    let mut taken = vec![false; n];
    let mut out = Vec::new();
    for (i, &(s, t)) in demands.iter().enumerate() {
        if !taken[s] && !taken[t] {
            taken[s] = true;
            taken[t] = true;
            out.push(i);
        }
    }
    Ok(out)
}
