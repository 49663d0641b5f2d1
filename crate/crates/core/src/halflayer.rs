//! Half layers and layers.
//!
//! A half layer w.r.t. a state `(A′, B′, M)` and degree cap `Δ` is a set `Z`
//! of non-matching edges such that
//!
//! 1. every edge starts in `A′` and every `a ∈ A′` has at most `Δ` edges in `Z`;
//! 2. edges of `Z` avoid `B′` and are pairwise disjoint in `B`;
//! 3. every matching edge meets at most one edge of `Z` in `B`.
//!
//! The engine never builds half layers itself: it asks a [`LayerOracle`].
//! [`ExplicitOracle`] scans an explicit hypergraph; the routing module
//! supplies oracles that search paths in a graph instead.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::hypergraph::{BipartiteHypergraph, Matching};
use crate::{EdgeId, Rational};

#[derive(Debug, Error)]
pub enum HalfLayerError {
    #[error("unknown edge id {0}")]
    UnknownEdge(EdgeId),
    #[error("input is not a half layer")]
    NotHalfLayer,
    #[error("too large for exhaustive half-layer search: {size} candidates exceed cap {cap}")]
    TooLarge { size: usize, cap: usize },
}

#[derive(Debug, Error)]
#[error("half-layer oracle failed: {0}")]
pub struct OracleError(pub String);

/// The state `(A′, B′, M)` plus degree cap `Δ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfLayerState {
    pub active_a: BTreeSet<usize>,
    pub forbidden_b: BTreeSet<usize>,
    pub matching: Matching,
    pub delta: usize,
}

impl HalfLayerState {
    pub fn new(active_a: impl IntoIterator<Item = usize>, delta: usize) -> Self {
        HalfLayerState {
            active_a: active_a.into_iter().collect(),
            forbidden_b: BTreeSet::new(),
            matching: Matching::new(),
            delta,
        }
    }
}

/// A half layer `x` together with its blocking set `y ⊆ M`. Both sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Layer {
    pub x: Vec<EdgeId>,
    pub y: Vec<EdgeId>,
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |ids: &[EdgeId]| ids.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
        writeln!(f, "{}", join(&self.x))?;
        writeln!(f, "{}", join(&self.y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    ExplicitGreedy,
    GraphBfs,
    GraphBlockingFlow,
    /// Greedy scan truncated to `⌈fraction · g⌉` accepted edges, where `g`
    /// is what the full scan would accept. Test-only source of genuinely
    /// non-maximal half layers.
    ThrottledTest {
        fraction: Rational,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfLayerOracleSpec {
    pub kind: OracleKind,
    /// `r′`; `None` means the host rank bound.
    pub rank_limit: Option<usize>,
    /// Declared `α ≥ 1` for approximate oracles.
    pub approx_alpha: Rational,
}

impl HalfLayerOracleSpec {
    pub fn new(kind: OracleKind) -> Self {
        HalfLayerOracleSpec {
            kind,
            rank_limit: None,
            approx_alpha: Rational::from_integer(1),
        }
    }

    pub fn check(&self, host_rank: usize) -> Result<(), String> {
        if let Some(r) = self.rank_limit {
            if r == 0 || r > host_rank {
                return Err(format!("rank limit {r} outside 1..={host_rank}"));
            }
        }
        if self.approx_alpha < Rational::from_integer(1) {
            return Err(format!("approximation factor {} below 1", self.approx_alpha));
        }
        if let OracleKind::ThrottledTest { fraction } = self.kind {
            if fraction > Rational::from_integer(1) || *fraction.numer() == 0 {
                return Err(format!("throttle fraction {fraction} outside (0, 1]"));
            }
        }
        Ok(())
    }
}

/// What the engine asks an oracle for: a half layer w.r.t. per-vertex
/// residual degree caps, a forbidden `B`-set and the current matching.
#[derive(Debug, Clone, Copy)]
pub struct HalfLayerQuery<'q> {
    /// Remaining degree budget for each `A`-vertex; zero means inactive.
    pub capacity: &'q [usize],
    /// `B′`, indexed by `B`-vertex.
    pub forbidden: &'q [bool],
    /// The matching edge covering each `B`-vertex, if any.
    pub owner: &'q [Option<EdgeId>],
}

/// Source of half layers for the matching engine.
///
/// Returned edges must form a half layer w.r.t. the query. Edge ids are
/// stable for the lifetime of the oracle.
pub trait LayerOracle {
    fn num_a(&self) -> usize;
    fn num_b(&self) -> usize;
    fn edge_a(&self, e: EdgeId) -> usize;
    /// Sorted `B`-part of `e`.
    fn edge_b(&self, e: EdgeId) -> &[usize];
    fn half_layer(&mut self, query: &HalfLayerQuery<'_>) -> Result<Vec<EdgeId>, OracleError>;
}

/// Checks the three half-layer conditions of `z` against a query, using the
/// oracle only for edge lookups. Shared by the engine's strict mode and the
/// explicit [`is_half_layer`].
pub fn query_admits<O: LayerOracle + ?Sized>(oracle: &O, query: &HalfLayerQuery<'_>, z: &[EdgeId]) -> bool {
    let mut degree = vec![0usize; query.capacity.len()];
    let mut used = vec![false; query.forbidden.len()];
    let mut blocked: Vec<EdgeId> = Vec::new();
    for &e in z {
        let a = oracle.edge_a(e);
        let b = oracle.edge_b(e);
        if a >= degree.len() || b.is_empty() {
            return false;
        }
        if b.iter().all(|&v| query.owner.get(v) == Some(&Some(e))) {
            return false; // e ∈ M
        }
        degree[a] += 1;
        if degree[a] > query.capacity[a] {
            return false;
        }
        let mut mine: Vec<EdgeId> = Vec::new();
        for &v in b {
            if v >= used.len() || query.forbidden[v] || std::mem::replace(&mut used[v], true) {
                return false;
            }
            if let Some(f) = query.owner[v] {
                mine.push(f);
            }
        }
        mine.sort_unstable();
        mine.dedup();
        blocked.extend(mine);
    }
    let total = blocked.len();
    blocked.sort_unstable();
    blocked.dedup();
    blocked.len() == total
}

struct ExplicitView<'h>(&'h BipartiteHypergraph);

impl LayerOracle for ExplicitView<'_> {
    fn num_a(&self) -> usize {
        self.0.num_a()
    }
    fn num_b(&self) -> usize {
        self.0.num_b()
    }
    fn edge_a(&self, e: EdgeId) -> usize {
        self.0.edges()[e].a
    }
    fn edge_b(&self, e: EdgeId) -> &[usize] {
        &self.0.edges()[e].b
    }
    fn half_layer(&mut self, _: &HalfLayerQuery<'_>) -> Result<Vec<EdgeId>, OracleError> {
        unreachable!("lookup-only view")
    }
}

/// Query buffers materialised from an explicit state.
struct Buffers {
    capacity: Vec<usize>,
    forbidden: Vec<bool>,
    owner: Vec<Option<EdgeId>>,
}

impl Buffers {
    fn new(h: &BipartiteHypergraph, state: &HalfLayerState) -> Self {
        let mut capacity = vec![0; h.num_a()];
        for &a in state.active_a.iter().filter(|&&a| a < h.num_a()) {
            capacity[a] = state.delta;
        }
        let mut forbidden = vec![false; h.num_b()];
        for &b in state.forbidden_b.iter().filter(|&&b| b < h.num_b()) {
            forbidden[b] = true;
        }
        let mut owner = vec![None; h.num_b()];
        for &f in state.matching.ids() {
            for &b in &h.edges()[f].b {
                owner[b] = Some(f);
            }
        }
        Buffers {
            capacity,
            forbidden,
            owner,
        }
    }

    fn query(&self) -> HalfLayerQuery<'_> {
        HalfLayerQuery {
            capacity: &self.capacity,
            forbidden: &self.forbidden,
            owner: &self.owner,
        }
    }
}

fn check_ids(h: &BipartiteHypergraph, ids: &[EdgeId]) -> Result<(), HalfLayerError> {
    match ids.iter().find(|&&e| e >= h.num_edges()) {
        Some(&e) => Err(HalfLayerError::UnknownEdge(e)),
        None => Ok(()),
    }
}

/// True iff `z` satisfies the three half-layer conditions w.r.t. `state`.
/// Unknown ids make the answer `false`.
pub fn is_half_layer(h: &BipartiteHypergraph, z: &[EdgeId], state: &HalfLayerState) -> bool {
    if check_ids(h, z).is_err() || check_ids(h, state.matching.ids()).is_err() {
        return false;
    }
    if state.active_a.iter().any(|&a| a >= h.num_a()) {
        return false;
    }
    let mut sorted = z.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return false;
    }
    if z.iter().any(|&e| state.matching.contains(e)) {
        return false;
    }
    let buffers = Buffers::new(h, state);
    query_admits(&ExplicitView(h), &buffers.query(), z)
}

/// True iff no edge of rank at most `r_prime` outside `z` can be added while
/// keeping a half layer. A single pass: an edge is addable iff it passes
/// the greedy acceptance test against the expanded forbidden set of `z`.
pub fn is_r_maximal(
    h: &BipartiteHypergraph,
    z: &[EdgeId],
    state: &HalfLayerState,
    r_prime: usize,
) -> Result<bool, HalfLayerError> {
    if !is_half_layer(h, z, state) {
        return Err(HalfLayerError::NotHalfLayer);
    }
    let mut buffers = Buffers::new(h, state);
    for &e in z {
        let edge = &h.edges()[e];
        buffers.capacity[edge.a] -= 1;
        claim(h, e, &mut buffers.forbidden, &buffers.owner);
    }
    let addable = (0..h.num_edges()).any(|e| {
        let edge = &h.edges()[e];
        edge.rank() <= r_prime
            && buffers.capacity[edge.a] > 0
            && !in_matching(&buffers.owner, e, &edge.b)
            && edge.b.iter().all(|&b| !buffers.forbidden[b])
    });
    Ok(!addable)
}

fn in_matching(owner: &[Option<EdgeId>], e: EdgeId, b: &[usize]) -> bool {
    !b.is_empty() && owner[b[0]] == Some(e)
}

/// Forbids `B(e)` and the whole `B`-part of every matching edge it meets.
/// Returns the matching edges met, in order of first contact.
fn claim(
    h: &BipartiteHypergraph,
    e: EdgeId,
    forbidden: &mut [bool],
    owner: &[Option<EdgeId>],
) -> (Vec<EdgeId>, usize) {
    let mut met = Vec::new();
    let mut work = 0;
    for &b in &h.edges()[e].b {
        forbidden[b] = true;
        work += 1;
        if let Some(f) = owner[b] {
            if !met.contains(&f) {
                met.push(f);
                for &fb in &h.edges()[f].b {
                    forbidden[fb] = true;
                    work += 1;
                }
            }
        }
    }
    (met, work)
}

/// Greedy scan in ascending edge id: accept an edge when its `A`-vertex has
/// budget left, its rank is at most `rank_limit`, it is not matched and it
/// avoids the forbidden set; then forbid its `B`-part and the `B`-part of
/// every matching edge it meets. `forbidden` is consumed as scratch.
/// Returns the accepted edges and the number of vertex visits.
fn greedy_scan(
    h: &BipartiteHypergraph,
    capacity: &[usize],
    forbidden: &mut [bool],
    owner: &[Option<EdgeId>],
    rank_limit: usize,
) -> (Vec<EdgeId>, usize) {
    let mut degree = vec![0usize; h.num_a()];
    let mut accepted = Vec::new();
    let mut work = 0;
    for (e, edge) in h.edges().iter().enumerate() {
        work += 1;
        if edge.rank() > rank_limit || degree[edge.a] >= capacity[edge.a] {
            continue;
        }
        if in_matching(owner, e, &edge.b) {
            continue;
        }
        work += edge.b.len();
        if edge.b.iter().any(|&b| forbidden[b]) {
            continue;
        }
        degree[edge.a] += 1;
        work += claim(h, e, forbidden, owner).1;
        accepted.push(e);
    }
    (accepted, work)
}

fn blockers(h: &BipartiteHypergraph, z: &[EdgeId], owner: &[Option<EdgeId>]) -> Vec<EdgeId> {
    let mut y: Vec<EdgeId> = z
        .iter()
        .flat_map(|&e| h.edges()[e].b.iter().filter_map(|&b| owner[b]))
        .collect();
    y.sort_unstable();
    y.dedup();
    y
}

/// An `r′`-maximal half layer and its blocking set, in `O(p)` time.
pub fn greedy_maximal_half_layer(h: &BipartiteHypergraph, state: &HalfLayerState, r_prime: usize) -> Layer {
    greedy_maximal_half_layer_counted(h, state, r_prime).0
}

/// [`greedy_maximal_half_layer`] plus the number of vertex visits made,
/// which stays within a constant of `p(H) + p(M)`.
pub fn greedy_maximal_half_layer_counted(
    h: &BipartiteHypergraph,
    state: &HalfLayerState,
    r_prime: usize,
) -> (Layer, usize) {
    let mut buffers = Buffers::new(h, state);
    let (x, work) = greedy_scan(
        h,
        &buffers.capacity,
        &mut buffers.forbidden,
        &buffers.owner,
        r_prime,
    );
    let y = blockers(h, &x, &buffers.owner);
    (Layer { x, y }, work)
}

/// The ratio `max |Z′| / |Z|` over rank-`≤ r′` half layers `Z′`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxRatio {
    Finite(Rational),
    /// `Z` is empty while a non-empty half layer exists.
    Infinite,
}

impl ApproxRatio {
    fn of(best: usize, size: usize) -> Self {
        match (best, size) {
            (0, 0) => ApproxRatio::Finite(Rational::from_integer(1)),
            (_, 0) => ApproxRatio::Infinite,
            (b, s) => ApproxRatio::Finite(Rational::new(b as u64, s as u64)),
        }
    }

    pub fn max(self, other: Self) -> Self {
        match (self, other) {
            (ApproxRatio::Finite(x), ApproxRatio::Finite(y)) => ApproxRatio::Finite(x.max(y)),
            _ => ApproxRatio::Infinite,
        }
    }

    pub fn at_most(self, bound: Rational) -> bool {
        matches!(self, ApproxRatio::Finite(x) if x <= bound)
    }
}

impl fmt::Display for ApproxRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApproxRatio::Finite(x) => write!(f, "{x}"),
            ApproxRatio::Infinite => write!(f, "inf"),
        }
    }
}

/// The realised approximation factor of `z`: the size of a largest rank
/// `≤ r′` half layer divided by `|z|`, with `0/0 = 1`.
///
/// The largest half layer is found by branch and bound when at most `cap`
/// candidate edges exist, and by a max-flow computation for `r′ = 1` of any
/// size.
pub fn check_approx_ratio(
    h: &BipartiteHypergraph,
    z: &[EdgeId],
    state: &HalfLayerState,
    r_prime: usize,
    cap: usize,
) -> Result<ApproxRatio, HalfLayerError> {
    if !is_half_layer(h, z, state) {
        return Err(HalfLayerError::NotHalfLayer);
    }
    let buffers = Buffers::new(h, state);
    let best = largest_half_layer(h, &buffers.query(), r_prime, cap)?;
    Ok(ApproxRatio::of(best, z.len()))
}

/// Size of a largest rank-`≤ r′` half layer w.r.t. a query.
pub fn largest_half_layer(
    h: &BipartiteHypergraph,
    query: &HalfLayerQuery<'_>,
    r_prime: usize,
    cap: usize,
) -> Result<usize, HalfLayerError> {
    let candidates: Vec<EdgeId> = (0..h.num_edges())
        .filter(|&e| {
            let edge = &h.edges()[e];
            edge.rank() <= r_prime
                && query.capacity[edge.a] > 0
                && !in_matching(query.owner, e, &edge.b)
                && edge.b.iter().all(|&b| !query.forbidden[b])
        })
        .collect();
    if candidates.len() <= cap {
        let mut search = Exhaustive {
            h,
            query,
            candidates: &candidates,
            degree: vec![0; h.num_a()],
            used: vec![false; h.num_b()],
            blocked: Vec::new(),
            best: 0,
        };
        search.run(0, 0);
        return Ok(search.best);
    }
    if r_prime == 1 {
        return Ok(rank_one_flow(h, query, &candidates));
    }
    Err(HalfLayerError::TooLarge {
        size: candidates.len(),
        cap,
    })
}

struct Exhaustive<'a> {
    h: &'a BipartiteHypergraph,
    query: &'a HalfLayerQuery<'a>,
    candidates: &'a [EdgeId],
    degree: Vec<usize>,
    used: Vec<bool>,
    blocked: Vec<EdgeId>,
    best: usize,
}

impl Exhaustive<'_> {
    fn run(&mut self, next: usize, size: usize) {
        self.best = self.best.max(size);
        if size + (self.candidates.len() - next) <= self.best {
            return;
        }
        for i in next..self.candidates.len() {
            let e = self.candidates[i];
            let edge = &self.h.edges()[e];
            if self.degree[edge.a] >= self.query.capacity[edge.a] || edge.b.iter().any(|&b| self.used[b]) {
                continue;
            }
            let mut met: Vec<EdgeId> = edge.b.iter().filter_map(|&b| self.query.owner[b]).collect();
            met.sort_unstable();
            met.dedup();
            if met.iter().any(|f| self.blocked.contains(f)) {
                continue;
            }
            self.degree[edge.a] += 1;
            edge.b.iter().for_each(|&b| self.used[b] = true);
            let mark = self.blocked.len();
            self.blocked.extend(met);
            self.run(i + 1, size + 1);
            self.blocked.truncate(mark);
            edge.b.iter().for_each(|&b| self.used[b] = false);
            self.degree[edge.a] -= 1;
            if size + (self.candidates.len() - i - 1) <= self.best {
                return;
            }
        }
    }
}

/// Rank-one half layers are flows: source → `a` (capacity = budget) →
/// group of `b` (one unit per candidate edge) → sink (one unit), where the
/// group of a matched `b` is its matching edge and otherwise `b` itself.
fn rank_one_flow(h: &BipartiteHypergraph, query: &HalfLayerQuery<'_>, candidates: &[EdgeId]) -> usize {
    let num_a = h.num_a();
    let group_of = |b: usize| match query.owner[b] {
        Some(f) => h.num_b() + f,
        None => b,
    };
    let mut groups: Vec<usize> = candidates.iter().map(|&e| group_of(h.edges()[e].b[0])).collect();
    groups.sort_unstable();
    groups.dedup();
    let source = 0;
    let sink = 1;
    let a_node = |a: usize| 2 + a;
    let g_node = |g: usize| 2 + num_a + groups.binary_search(&g).expect("collected");
    let mut net = FlowNet::new(2 + num_a + groups.len());
    for a in 0..num_a {
        if query.capacity[a] > 0 {
            net.add(source, a_node(a), query.capacity[a]);
        }
    }
    for &e in candidates {
        let edge = &h.edges()[e];
        net.add(a_node(edge.a), g_node(group_of(edge.b[0])), 1);
    }
    for i in 0..groups.len() {
        net.add(2 + num_a + i, sink, 1);
    }
    net.max_flow(source, sink)
}

struct FlowNet {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<usize>,
}

impl FlowNet {
    fn new(n: usize) -> Self {
        FlowNet {
            head: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add(&mut self, u: usize, v: usize, c: usize) {
        self.head[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    fn max_flow(&mut self, s: usize, t: usize) -> usize {
        let mut total = 0;
        loop {
            let mut via = vec![usize::MAX; self.head.len()];
            let mut queue = VecDeque::from([s]);
            while let Some(u) = queue.pop_front() {
                for &arc in &self.head[u] {
                    let v = self.to[arc];
                    if self.cap[arc] > 0 && via[v] == usize::MAX && v != s {
                        via[v] = arc;
                        queue.push_back(v);
                    }
                }
            }
            if via[t] == usize::MAX {
                return total;
            }
            let mut push = usize::MAX;
            let mut v = t;
            while v != s {
                push = push.min(self.cap[via[v]]);
                v = self.to[via[v] ^ 1];
            }
            let mut v = t;
            while v != s {
                self.cap[via[v]] -= push;
                self.cap[via[v] ^ 1] += push;
                v = self.to[via[v] ^ 1];
            }
            total += push;
        }
    }
}

/// Half-layer oracle over an explicit hypergraph: the greedy scan, or its
/// throttled variant. Can record the realised approximation factor of
/// every answer.
pub struct ExplicitOracle<'h> {
    h: &'h BipartiteHypergraph,
    rank_limit: usize,
    throttle: Option<Rational>,
    measure_cap: Option<usize>,
    realized: ApproxRatio,
    calls: usize,
    work: usize,
}

impl<'h> ExplicitOracle<'h> {
    pub fn greedy(h: &'h BipartiteHypergraph, rank_limit: usize) -> Self {
        ExplicitOracle {
            h,
            rank_limit,
            throttle: None,
            measure_cap: None,
            realized: ApproxRatio::Finite(Rational::from_integer(1)),
            calls: 0,
            work: 0,
        }
    }

    pub fn throttled(h: &'h BipartiteHypergraph, rank_limit: usize, fraction: Rational) -> Self {
        ExplicitOracle {
            throttle: Some(fraction),
            ..ExplicitOracle::greedy(h, rank_limit)
        }
    }

    pub fn from_spec(h: &'h BipartiteHypergraph, spec: &HalfLayerOracleSpec) -> Result<Self, String> {
        spec.check(h.rank_bound())?;
        let rank_limit = spec.rank_limit.unwrap_or(h.rank_bound());
        match spec.kind {
            OracleKind::ExplicitGreedy => Ok(ExplicitOracle::greedy(h, rank_limit)),
            OracleKind::ThrottledTest { fraction } => Ok(ExplicitOracle::throttled(h, rank_limit, fraction)),
            other => Err(format!("{other:?} oracle needs a graph instance")),
        }
    }

    /// Measure every answer against a largest rank-`≤ r′` half layer.
    pub fn measuring(mut self, cap: usize) -> Self {
        self.measure_cap = Some(cap);
        self
    }

    /// Largest realised factor over all answers so far (1 when unmeasured).
    pub fn realized_alpha(&self) -> ApproxRatio {
        self.realized
    }

    pub fn calls(&self) -> usize {
        self.calls
    }

    /// Total vertex visits across calls.
    pub fn work(&self) -> usize {
        self.work
    }
}

impl LayerOracle for ExplicitOracle<'_> {
    fn num_a(&self) -> usize {
        self.h.num_a()
    }

    fn num_b(&self) -> usize {
        self.h.num_b()
    }

    fn edge_a(&self, e: EdgeId) -> usize {
        self.h.edges()[e].a
    }

    fn edge_b(&self, e: EdgeId) -> &[usize] {
        &self.h.edges()[e].b
    }

    fn half_layer(&mut self, query: &HalfLayerQuery<'_>) -> Result<Vec<EdgeId>, OracleError> {
        self.calls += 1;
        let mut forbidden = query.forbidden.to_vec();
        let (mut z, work) = greedy_scan(
            self.h,
            query.capacity,
            &mut forbidden,
            query.owner,
            self.rank_limit,
        );
        self.work += work;
        if let Some(fraction) = self.throttle {
            let keep = (Rational::from_integer(z.len() as u64) * fraction)
                .ceil()
                .to_integer();
            z.truncate(keep as usize);
        }
        if let Some(cap) = self.measure_cap {
            let best = largest_half_layer(self.h, query, self.rank_limit, cap)
                .map_err(|e| OracleError(e.to_string()))?;
            self.realized = self.realized.max(ApproxRatio::of(best, z.len()));
        }
        Ok(z)
    }
}
