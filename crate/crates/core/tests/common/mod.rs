//! Brute-force reference implementations shared by the integration tests.
//! Each one is written from the definitions and deliberately shares no
//! search code with the library.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

use hyperroute::engine::{Event, Signature, TraceLine};
use hyperroute::graph::MultiGraph;
use hyperroute::halflayer::{is_half_layer, is_r_maximal};
use hyperroute::halflayer::{HalfLayerQuery, HalfLayerState, LayerOracle, OracleError};
use hyperroute::hypergraph::BipartiteHypergraph;
use hyperroute::routing::{GraphOracle, GraphOracleKind, RoutingInstance};
use hyperroute::{EdgeId, Rational};
use rand::Rng;

// ---------------------------------------------------------------------------
// Demand-path materialisation

pub const MATERIALIZE_MAX_N: usize = 10;
pub const MATERIALIZE_MAX_R: usize = 4;

/// Per hyperedge: vertex sequence and graph edge ids.
pub type MaterializedPaths = Vec<(Vec<usize>, Vec<EdgeId>)>;

/// Every simple path of at most `r` edges per demand, one hyperedge each.
/// Returns the hypergraph and, per hyperedge, its vertex sequence and edge
/// ids in path order.
pub fn materialize(inst: &RoutingInstance) -> (BipartiteHypergraph, MaterializedPaths) {
    let g = &inst.graph;
    assert!(g.num_vertices() <= MATERIALIZE_MAX_N, "materialisation cap on n");
    assert!(inst.r <= MATERIALIZE_MAX_R, "materialisation cap on r");
    let mut h = BipartiteHypergraph::new(inst.demands.len(), g.num_edges(), inst.r);
    let mut paths = Vec::new();
    for (a, &(s, t)) in inst.demands.iter().enumerate() {
        let mut found = Vec::new();
        let mut on_path = vec![false; g.num_vertices()];
        on_path[s] = true;
        walk(
            g,
            t,
            inst.r,
            &mut vec![s],
            &mut Vec::new(),
            &mut on_path,
            &mut found,
        );
        for (vs, es) in found {
            h.add_edge(a, es.clone());
            paths.push((vs, es));
        }
    }
    (h, paths)
}

fn walk(
    g: &MultiGraph,
    t: usize,
    r: usize,
    vs: &mut Vec<usize>,
    es: &mut Vec<EdgeId>,
    on_path: &mut [bool],
    out: &mut Vec<(Vec<usize>, Vec<EdgeId>)>,
) {
    let u = *vs.last().unwrap();
    if u == t {
        out.push((vs.clone(), es.clone()));
        return;
    }
    if es.len() == r {
        return;
    }
    for (e, &(x, y)) in g.edges().iter().enumerate() {
        let w = if x == u {
            y
        } else if y == u {
            x
        } else {
            continue;
        };
        if on_path[w] {
            continue;
        }
        on_path[w] = true;
        vs.push(w);
        es.push(e);
        walk(g, t, r, vs, es, on_path, out);
        es.pop();
        vs.pop();
        on_path[w] = false;
    }
}

/// Hyperedge id of a (demand, edge set) pair in a materialised hypergraph.
pub fn materialized_index(h: &BipartiteHypergraph) -> BTreeMap<(usize, Vec<usize>), EdgeId> {
    h.edges()
        .iter()
        .enumerate()
        .map(|(id, e)| ((e.a, e.b.clone()), id))
        .collect()
}

// ---------------------------------------------------------------------------
// Half layers, straight from the definition

fn blockers_of(h: &BipartiteHypergraph, e: EdgeId, matching: &BTreeSet<EdgeId>) -> BTreeSet<EdgeId> {
    matching
        .iter()
        .copied()
        .filter(|&f| h.edges()[f].b.iter().any(|b| h.edges()[e].b.contains(b)))
        .collect()
}

/// Direct check of the three conditions with per-vertex budgets.
pub fn naive_is_half_layer(
    h: &BipartiteHypergraph,
    z: &[EdgeId],
    budget: &BTreeMap<usize, usize>,
    forbidden: &BTreeSet<usize>,
    matching: &BTreeSet<EdgeId>,
) -> bool {
    let set: BTreeSet<EdgeId> = z.iter().copied().collect();
    if set.len() != z.len() || z.iter().any(|&e| e >= h.num_edges() || matching.contains(&e)) {
        return false;
    }
    for &e in z {
        let edge = &h.edges()[e];
        let deg = z.iter().filter(|&&x| h.edges()[x].a == edge.a).count();
        if deg > budget.get(&edge.a).copied().unwrap_or(0) {
            return false;
        }
        if edge.b.iter().any(|b| forbidden.contains(b)) {
            return false;
        }
    }
    for (i, &e) in z.iter().enumerate() {
        for &f in &z[i + 1..] {
            if h.edges()[e].b.iter().any(|b| h.edges()[f].b.contains(b)) {
                return false;
            }
        }
    }
    for &m in matching {
        let hits = z
            .iter()
            .filter(|&&e| h.edges()[e].b.iter().any(|b| h.edges()[m].b.contains(b)))
            .count();
        if hits > 1 {
            return false;
        }
    }
    true
}

fn uniform_budget(state: &HalfLayerState) -> BTreeMap<usize, usize> {
    state.active_a.iter().map(|&a| (a, state.delta)).collect()
}

/// Size of a largest rank-`≤ r′` half layer, by backtracking over all edge
/// subsets with pruning on the half-layer predicate (which is closed under
/// taking subsets).
pub fn exhaustive_best_half_layer(h: &BipartiteHypergraph, state: &HalfLayerState, r_prime: usize) -> usize {
    let candidates: Vec<EdgeId> = (0..h.num_edges())
        .filter(|&e| h.edges()[e].rank() <= r_prime)
        .collect();
    assert!(candidates.len() <= 20, "exhaustive half-layer cap");
    let budget = uniform_budget(state);
    let matching: BTreeSet<EdgeId> = state.matching.ids().iter().copied().collect();
    let mut best = 0;
    let mut chosen = Vec::new();
    fn go(
        i: usize,
        cands: &[EdgeId],
        chosen: &mut Vec<EdgeId>,
        best: &mut usize,
        ok: &dyn Fn(&[EdgeId]) -> bool,
    ) {
        *best = (*best).max(chosen.len());
        for j in i..cands.len() {
            chosen.push(cands[j]);
            if ok(chosen) {
                go(j + 1, cands, chosen, best, ok);
            }
            chosen.pop();
        }
    }
    let ok = |z: &[EdgeId]| naive_is_half_layer(h, z, &budget, &state.forbidden_b, &matching);
    go(0, &candidates, &mut chosen, &mut best, &ok);
    best
}

/// Quadratic layer builder: repeatedly rescans all edges from id 0 for the
/// first addable one, adds it with its blockers, and re-validates. Works on
/// per-vertex budgets; returns `Z` in insertion order.
pub fn reference_half_layer(
    h: &BipartiteHypergraph,
    budget: &BTreeMap<usize, usize>,
    forbidden: &BTreeSet<usize>,
    matching: &BTreeSet<EdgeId>,
    r_prime: usize,
) -> Vec<EdgeId> {
    let mut z: Vec<EdgeId> = Vec::new();
    let mut y: BTreeSet<EdgeId> = BTreeSet::new();
    loop {
        let mut blocked: BTreeSet<usize> = forbidden.clone();
        for &e in &z {
            blocked.extend(h.edges()[e].b.iter().copied());
        }
        for &f in &y {
            blocked.extend(h.edges()[f].b.iter().copied());
        }
        let next = (0..h.num_edges()).find(|&e| {
            let edge = &h.edges()[e];
            let deg = z.iter().filter(|&&x| h.edges()[x].a == edge.a).count();
            edge.rank() <= r_prime
                && !matching.contains(&e)
                && deg < budget.get(&edge.a).copied().unwrap_or(0)
                && edge.b.iter().all(|b| !blocked.contains(b))
        });
        let Some(e) = next else { return z };
        z.push(e);
        y.extend(blockers_of(h, e, matching));
        assert!(
            naive_is_half_layer(h, &z, budget, forbidden, matching),
            "reference builder broke a half layer"
        );
    }
}

/// The quadratic builder behind the oracle interface.
pub struct ReferenceOracle<'h> {
    pub h: &'h BipartiteHypergraph,
    pub r_prime: usize,
}

impl LayerOracle for ReferenceOracle<'_> {
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
    fn half_layer(&mut self, q: &HalfLayerQuery<'_>) -> Result<Vec<EdgeId>, OracleError> {
        let budget: BTreeMap<usize, usize> = (0..q.capacity.len())
            .filter(|&a| q.capacity[a] > 0)
            .map(|a| (a, q.capacity[a]))
            .collect();
        let forbidden: BTreeSet<usize> = (0..q.forbidden.len()).filter(|&b| q.forbidden[b]).collect();
        let matching: BTreeSet<EdgeId> = q.owner.iter().flatten().copied().collect();
        Ok(reference_half_layer(
            self.h,
            &budget,
            &forbidden,
            &matching,
            self.r_prime,
        ))
    }
}

// ---------------------------------------------------------------------------
// Reference engine: the three algorithms written out over plain sets

#[derive(Debug)]
pub enum RefOutcome {
    Perfect(BTreeSet<EdgeId>),
    Stalled,
}

pub struct ReferenceEngine<O: LayerOracle> {
    pub oracle: O,
    delta: usize,
    mu: Rational,
    cap: u64,
    pub matching: BTreeSet<EdgeId>,
    roots: BTreeSet<usize>,
    layers: Vec<(BTreeSet<EdgeId>, BTreeSet<EdgeId>)>,
    pub trace: Vec<TraceLine>,
    /// `(|Y_t| ≥ (1−μ)|X_t|` failures, depth-bound failures) at loop starts.
    pub ratio_violations: u64,
    pub signature_violations: u64,
}

impl<O: LayerOracle> ReferenceEngine<O> {
    pub fn new(oracle: O, delta: usize, mu: Rational, cap: u64) -> Self {
        let roots = (0..oracle.num_a()).collect();
        ReferenceEngine {
            oracle,
            delta,
            mu,
            cap,
            matching: BTreeSet::new(),
            roots,
            layers: Vec::new(),
            trace: Vec::new(),
            ratio_violations: 0,
            signature_violations: 0,
        }
    }

    fn meets(&self, e: EdgeId, f: EdgeId) -> bool {
        let fb = self.oracle.edge_b(f);
        self.oracle.edge_b(e).iter().any(|b| fb.contains(b))
    }

    fn blockers(&self, e: EdgeId) -> BTreeSet<EdgeId> {
        self.matching
            .iter()
            .copied()
            .filter(|&f| self.meets(e, f))
            .collect()
    }

    fn b_of(&self, ids: &BTreeSet<EdgeId>) -> BTreeSet<usize> {
        ids.iter()
            .flat_map(|&e| self.oracle.edge_b(e).iter().copied())
            .collect()
    }

    fn build_layer(
        &mut self,
        lower: usize,
        seed: (BTreeSet<EdgeId>, BTreeSet<EdgeId>),
    ) -> (BTreeSet<EdgeId>, BTreeSet<EdgeId>) {
        let active: BTreeSet<usize> = if lower == 0 {
            self.roots.clone()
        } else {
            self.layers[lower - 1]
                .1
                .iter()
                .map(|&f| self.oracle.edge_a(f))
                .collect()
        };
        let mut forbidden: BTreeSet<usize> = BTreeSet::new();
        for (x, y) in &self.layers[..lower] {
            forbidden.extend(self.b_of(x));
            forbidden.extend(self.b_of(y));
        }
        forbidden.extend(self.b_of(&seed.0));
        forbidden.extend(self.b_of(&seed.1));
        let mut capacity = vec![0; self.oracle.num_a()];
        for &a in &active {
            let used = seed.0.iter().filter(|&&e| self.oracle.edge_a(e) == a).count();
            capacity[a] = self.delta.saturating_sub(used);
        }
        let mut forb = vec![false; self.oracle.num_b()];
        for &b in &forbidden {
            forb[b] = true;
        }
        let mut owner = vec![None; self.oracle.num_b()];
        for &m in &self.matching {
            for &b in self.oracle.edge_b(m) {
                owner[b] = Some(m);
            }
        }
        let z = self
            .oracle
            .half_layer(&HalfLayerQuery {
                capacity: &capacity,
                forbidden: &forb,
                owner: &owner,
            })
            .expect("oracle");
        self.revalidate(&z, &capacity, &forbidden);
        let (mut x, mut y) = seed;
        for e in z {
            let blk = self.blockers(e);
            assert!(!self.matching.contains(&e));
            assert!(self.oracle.edge_b(e).iter().all(|b| !forbidden.contains(b)));
            y.extend(blk);
            x.insert(e);
        }
        (x, y)
    }

    /// Pairwise re-check of the three conditions on an oracle answer.
    fn revalidate(&self, z: &[EdgeId], capacity: &[usize], forbidden: &BTreeSet<usize>) {
        for &e in z {
            assert!(!self.matching.contains(&e), "matched edge {e} in a half layer");
            let a = self.oracle.edge_a(e);
            let deg = z.iter().filter(|&&f| self.oracle.edge_a(f) == a).count();
            assert!(deg <= capacity[a], "degree cap exceeded at {a}");
            assert!(
                self.oracle.edge_b(e).iter().all(|b| !forbidden.contains(b)),
                "edge {e} meets B'"
            );
            for &f in z {
                assert!(e == f || !self.meets(e, f), "edges {e} and {f} share a B-vertex");
            }
        }
        for &m in &self.matching {
            let hits = z.iter().filter(|&&e| self.meets(e, m)).count();
            assert!(hits <= 1, "matching edge {m} met {hits} times");
        }
    }

    fn immediately_addable(&self, x: &BTreeSet<EdgeId>) -> Vec<EdgeId> {
        x.iter()
            .copied()
            .filter(|&e| self.blockers(e).is_empty())
            .collect()
    }

    fn more_than_mu(&self, count: usize, total: usize) -> bool {
        Rational::from_integer(count as u64) > self.mu * Rational::from_integer(total as u64)
    }

    fn sizes(&self) -> Vec<(usize, usize)> {
        std::iter::once((0, self.roots.len()))
            .chain(self.layers.iter().map(|(x, y)| (x.len(), y.len())))
            .collect()
    }

    fn check_loop_start(&mut self) {
        let one_minus = Rational::from_integer(1) - self.mu;
        for (x, y) in &self.layers {
            if Rational::from_integer(y.len() as u64) < one_minus * Rational::from_integer(x.len() as u64) {
                self.ratio_violations += 1;
            }
        }
    }

    pub fn run(&mut self) -> RefOutcome {
        let mut iter = 0u64;
        let mut last = Signature::from_sizes(&self.sizes());
        while !self.roots.is_empty() {
            if iter >= self.cap {
                return RefOutcome::Stalled;
            }
            self.check_loop_start();
            let ell = self.layers.len();
            let layer = self.build_layer(ell, Default::default());
            if layer.0.is_empty() {
                return RefOutcome::Stalled;
            }
            self.layers.push(layer);
            let before = self.matching.len();
            let mut collapsed = false;
            let mut kept = false;
            loop {
                let ell = self.layers.len();
                if ell == 0 {
                    break;
                }
                let ia = self.immediately_addable(&self.layers[ell - 1].0);
                if !self.more_than_mu(ia.len(), self.layers[ell - 1].0.len()) {
                    break;
                }
                collapsed = true;
                if ell == 1 {
                    for a in self.roots.clone() {
                        if let Some(&e) = ia.iter().find(|&&e| self.oracle.edge_a(e) == a) {
                            self.matching.insert(e);
                            self.roots.remove(&a);
                        }
                    }
                } else {
                    for f in self.layers[ell - 2].1.clone() {
                        let a = self.oracle.edge_a(f);
                        if let Some(&e) = ia.iter().find(|&&e| self.oracle.edge_a(e) == a) {
                            self.matching.remove(&f);
                            self.matching.insert(e);
                            self.layers[ell - 2].1.remove(&f);
                        }
                    }
                }
                self.layers.pop();
                if ell >= 2 {
                    let seed = self.layers[ell - 2].clone();
                    let old = seed.0.len();
                    let hat = self.build_layer(ell - 2, seed);
                    let grown = Rational::from_integer(hat.0.len() as u64)
                        >= (Rational::from_integer(1) + self.mu) * Rational::from_integer(old as u64);
                    if grown {
                        self.layers[ell - 2] = hat;
                        kept = true;
                    }
                }
            }
            iter += 1;
            let sig = Signature::from_sizes(&self.sizes());
            if sig >= last {
                self.signature_violations += 1;
            }
            let event = if self.matching.len() > before {
                Event::Swap
            } else if kept {
                Event::Superpose
            } else if collapsed {
                Event::Collapse
            } else {
                Event::Grow
            };
            self.trace.push(TraceLine {
                iter,
                ell: self.layers.len(),
                matched: self.matching.len(),
                signature_hash: sig.hash64(),
                event,
            });
            last = sig;
        }
        RefOutcome::Perfect(self.matching.clone())
    }
}

// ---------------------------------------------------------------------------
// Matchings and hitting sets

/// Whether a perfect matching exists, by dynamic programming over the sets
/// of used `B`-vertices after each prefix of `A`.
pub fn exhaustive_has_perfect_matching(h: &BipartiteHypergraph) -> bool {
    assert!(h.num_b() <= 64);
    let mut reach: HashSet<u64> = HashSet::from([0]);
    for a in 0..h.num_a() {
        let mut next = HashSet::new();
        for &used in &reach {
            for e in h.edges().iter().filter(|e| e.a == a) {
                let mask = e.b.iter().fold(0u64, |m, &b| m | 1 << b);
                if used & mask == 0 {
                    next.insert(used | mask);
                }
            }
        }
        if next.is_empty() {
            return false;
        }
        reach = next;
    }
    true
}

/// `τ(E_S)` by enumerating `B`-subsets in order of size.
pub fn brute_tau(h: &BipartiteHypergraph, s: &[usize]) -> usize {
    let nb = h.num_b();
    assert!(nb <= 20);
    let masks: Vec<u32> = h
        .edges()
        .iter()
        .filter(|e| s.contains(&e.a))
        .map(|e| e.b.iter().fold(0u32, |m, &b| m | 1 << b))
        .collect();
    (0..=nb)
        .find(|&k| {
            (0u32..1 << nb)
                .filter(|c| c.count_ones() as usize == k)
                .any(|c| masks.iter().all(|m| m & c != 0))
        })
        .unwrap_or(nb)
}

/// Strong Haxell condition by brute force on `τ`.
pub fn brute_haxell(h: &BipartiteHypergraph, phi: Rational) -> bool {
    let n = h.num_a();
    (1u32..1 << n).all(|mask| {
        let s: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        Rational::from_integer(brute_tau(h, &s) as u64) >= phi * Rational::from_integer(s.len() as u64)
    })
}

// ---------------------------------------------------------------------------
// Graphs

/// Minimum cut conductance over all nonempty proper subsets, recomputing
/// boundary and volumes from scratch for each.
pub fn naive_conductance(g: &MultiGraph) -> Rational {
    let n = g.num_vertices();
    let mut best: Option<Rational> = None;
    for mask in 1u32..(1u32 << n) - 1 {
        let inside = |v: usize| mask >> v & 1 == 1;
        let mut boundary = 0u64;
        let mut vol_in = 0u64;
        let mut vol_out = 0u64;
        for &(u, v) in g.edges() {
            if inside(u) != inside(v) {
                boundary += 1;
            }
            for w in [u, v] {
                if inside(w) {
                    vol_in += 1;
                } else {
                    vol_out += 1;
                }
            }
        }
        let denom = vol_in.min(vol_out);
        let phi = if denom == 0 {
            Rational::from_integer(0)
        } else {
            Rational::new(boundary, denom)
        };
        best = Some(best.map_or(phi, |b: Rational| b.min(phi)));
    }
    best.expect("n ≥ 2")
}

/// Whether all demands can be routed on edge-disjoint simple paths of at
/// most `r` edges, by exhaustive search over materialised paths.
pub fn disjoint_paths_feasible(inst: &RoutingInstance) -> bool {
    let (h, _) = materialize(inst);
    exhaustive_has_perfect_matching_large(&h)
}

/// Backtracking variant for hypergraphs with more than 64 `B`-vertices.
pub fn exhaustive_has_perfect_matching_large(h: &BipartiteHypergraph) -> bool {
    fn go(h: &BipartiteHypergraph, a: usize, used: &mut Vec<bool>) -> bool {
        if a == h.num_a() {
            return true;
        }
        for e in h.edges().iter().filter(|e| e.a == a) {
            if e.b.iter().all(|&b| !used[b]) {
                e.b.iter().for_each(|&b| used[b] = true);
                if go(h, a + 1, used) {
                    return true;
                }
                e.b.iter().for_each(|&b| used[b] = false);
            }
        }
        false
    }
    go(h, 0, &mut vec![false; h.num_b()])
}

/// Random multigraph on `n` vertices with `m` edges (no loops).
pub fn random_graph(rng: &mut impl Rng, n: usize, m: usize) -> MultiGraph {
    let mut g = MultiGraph::new(n);
    for _ in 0..m {
        let u = rng.gen_range(0..n);
        let mut v = rng.gen_range(0..n - 1);
        if v >= u {
            v += 1;
        }
        g.add_edge(u, v).unwrap();
    }
    g
}

/// Random `r`-bounded hypergraph.
pub fn random_hypergraph(
    rng: &mut impl Rng,
    num_a: usize,
    num_b: usize,
    r: usize,
    edges_per_a: std::ops::RangeInclusive<usize>,
) -> BipartiteHypergraph {
    let mut h = BipartiteHypergraph::new(num_a, num_b, r);
    for a in 0..num_a {
        for _ in 0..rng.gen_range(edges_per_a.clone()) {
            let k = rng.gen_range(1..=r.min(num_b));
            let mut b: Vec<usize> = Vec::new();
            while b.len() < k {
                let v = rng.gen_range(0..num_b);
                if !b.contains(&v) {
                    b.push(v);
                }
            }
            h.add_edge(a, b);
        }
    }
    h
}

// ---------------------------------------------------------------------------
// Seeded corpora

/// Candidate hypergraph for the Haxell corpus. Alternates between rank-one
/// instances with several `A`-vertices and dense rank-two instances with a
/// single `A`-vertex; with `φ = 4r²` and `|B| ≤ 20` these are the shapes
/// that can pass at all.
pub fn haxell_candidate(rng: &mut impl Rng, i: usize) -> BipartiteHypergraph {
    if i % 3 == 2 {
        let nb = rng.gen_range(17..=20);
        let p = rng.gen_range(0.8..0.95);
        let mut h = BipartiteHypergraph::new(1, nb, 2);
        for u in 0..nb {
            for v in u + 1..nb {
                if rng.gen_bool(p) {
                    h.add_edge(0, vec![u, v]);
                }
            }
        }
        h
    } else {
        let na = rng.gen_range(1..=5);
        let nb = rng.gen_range(4 * na..=20);
        let mut h = BipartiteHypergraph::new(na, nb, 1);
        for a in 0..na {
            let k = rng.gen_range(4..=nb);
            let mut bs: Vec<usize> = (0..nb).collect();
            for j in 0..k {
                let pick = rng.gen_range(j..nb);
                bs.swap(j, pick);
            }
            for &b in &bs[..k] {
                h.add_edge(a, vec![b]);
            }
        }
        h
    }
}

// ---------------------------------------------------------------------------
// Implicit oracles against the materialised hypergraph

/// A random state over a materialised demand-path hypergraph: active
/// demands, forbidden graph edges and an edge-disjoint matching.
pub fn random_path_state(rng: &mut impl Rng, h: &BipartiteHypergraph) -> HalfLayerState {
    let active: Vec<usize> = (0..h.num_a()).filter(|_| rng.gen_bool(0.7)).collect();
    let mut state = HalfLayerState::new(active, rng.gen_range(1..=3));
    state
        .forbidden_b
        .extend((0..h.num_b()).filter(|_| rng.gen_bool(0.1)));
    let mut used = vec![false; h.num_b()];
    let mut seen_a = vec![false; h.num_a()];
    for _ in 0..h.num_a() {
        if h.num_edges() == 0 {
            break;
        }
        let id = rng.gen_range(0..h.num_edges());
        let e = &h.edges()[id];
        if !seen_a[e.a] && e.b.iter().all(|&b| !used[b]) {
            seen_a[e.a] = true;
            e.b.iter().for_each(|&b| used[b] = true);
            state.matching.insert(id);
        }
    }
    state
}

/// Asks a graph oracle for a half layer under `state` and checks the answer
/// against the materialised hypergraph. Matched paths are interned into
/// the oracle first so both sides name the same paths.
pub fn check_graph_oracle(
    inst: &RoutingInstance,
    h: &BipartiteHypergraph,
    paths: &[(Vec<usize>, Vec<EdgeId>)],
    state: &HalfLayerState,
    kind: GraphOracleKind,
) -> Result<usize, String> {
    let index = materialized_index(h);
    let mut oracle = GraphOracle::new(inst, kind).with_audit();
    let mut owner = vec![None; h.num_b()];
    for &m in state.matching.ids() {
        let (vs, es) = &paths[m];
        let id = oracle.intern(h.edges()[m].a, vs.clone(), es.clone());
        for &b in &h.edges()[m].b {
            owner[b] = Some(id);
        }
    }
    let mut capacity = vec![0; h.num_a()];
    state.active_a.iter().for_each(|&a| capacity[a] = state.delta);
    let mut forbidden = vec![false; h.num_b()];
    state.forbidden_b.iter().for_each(|&b| forbidden[b] = true);
    let z = oracle
        .half_layer(&HalfLayerQuery {
            capacity: &capacity,
            forbidden: &forbidden,
            owner: &owner,
        })
        .map_err(|e| e.to_string())?;
    let mut mapped = Vec::new();
    for id in z {
        let p = oracle.path(id);
        let key = (p.demand, p.b_part().to_vec());
        match index.get(&key) {
            Some(&e) => mapped.push(e),
            None => return Err(format!("oracle path {:?} is not a hyperedge", p.vertices)),
        }
    }
    if !is_half_layer(h, &mapped, state) {
        return Err(format!("not a half layer: {mapped:?}"));
    }
    if !is_r_maximal(h, &mapped, state, inst.r).map_err(|e| e.to_string())? {
        return Err(format!("not {}-maximal: {mapped:?}", inst.r));
    }
    let stats = oracle.stats();
    if stats.disjointness_violations + stats.shortest_violations > 0 {
        return Err(format!("audit failed: {stats:?}"));
    }
    Ok(mapped.len())
}

/// Random routing instance on at most ten vertices.
pub fn random_small_instance(rng: &mut impl Rng) -> RoutingInstance {
    let n = rng.gen_range(3..=8);
    let m = rng.gen_range(n..=2 * n + 4);
    let g = random_graph(rng, n, m);
    let r = rng.gen_range(1..=4);
    let d = rng.gen_range(1..=4);
    let demands: Vec<(usize, usize)> = (0..d)
        .map(|_| {
            let s = rng.gen_range(0..n);
            let mut t = rng.gen_range(0..n - 1);
            if t >= s {
                t += 1;
            }
            (s, t)
        })
        .collect();
    RoutingInstance::relaxed(g, demands, r, 1).expect("valid by construction")
}
