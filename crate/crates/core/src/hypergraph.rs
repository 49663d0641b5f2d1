//! Explicit bipartite hypergraphs.
//!
//! Every hyperedge has exactly one vertex in part `A` and a non-empty set of
//! at most `r` vertices in part `B`. Part-`B` sets are kept sorted so that
//! intersection tests are merges and output is deterministic.

use std::fmt;

use thiserror::Error;

use crate::{EdgeId, Rational};

/// One hyperedge: an `A`-vertex plus a sorted set of `B`-vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Hyperedge {
    pub a: usize,
    pub b: Vec<usize>,
}

impl Hyperedge {
    /// Builds an edge, sorting the `B`-part. Duplicates are kept so that
    /// [`BipartiteHypergraph::validate`] can report them.
    pub fn new(a: usize, mut b: Vec<usize>) -> Self {
        b.sort_unstable();
        Hyperedge { a, b }
    }

    pub fn rank(&self) -> usize {
        self.b.len()
    }

    /// `|e| = 1 + |e ∩ B|`.
    pub fn size(&self) -> usize {
        1 + self.b.len()
    }

    /// True when the two `B`-parts share a vertex.
    pub fn meets_in_b(&self, other: &Hyperedge) -> bool {
        sorted_intersect(&self.b, &other.b)
    }
}

pub(crate) fn sorted_intersect(x: &[usize], y: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < x.len() && j < y.len() {
        match x[i].cmp(&y[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    EmptyBPart,
    RankExceedsBound { rank: usize, bound: usize },
    AOutOfRange { a: usize },
    BOutOfRange { b: usize },
    DuplicateB { b: usize },
}

/// First invariant violation found by [`BipartiteHypergraph::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub edge: EdgeId,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "edge {}: ", self.edge)?;
        match self.kind {
            ViolationKind::EmptyBPart => write!(f, "empty B-part"),
            ViolationKind::RankExceedsBound { rank, bound } => {
                write!(f, "rank exceeds bound ({rank} > {bound})")
            }
            ViolationKind::AOutOfRange { a } => write!(f, "A-vertex {a} out of range"),
            ViolationKind::BOutOfRange { b } => write!(f, "B-vertex {b} out of range"),
            ViolationKind::DuplicateB { b } => write!(f, "B-vertex {b} repeated"),
        }
    }
}

#[derive(Debug, Error)]
pub enum HypergraphError {
    #[error("unknown edge id {0}")]
    UnknownEdge(EdgeId),
    #[error("too large for exact {what}: {size} exceeds cap {cap}")]
    TooLarge {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("invalid hypergraph: {0}")]
    Invalid(Violation),
}

/// Limits for the exhaustive routines. Exceeding one is an error, never a
/// silent approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactCaps {
    /// Distinct `B`-vertices left after forced choices in a hitting-set
    /// search. Values above 64 are clamped to 64.
    pub tau_b: usize,
    /// `|A|` for subset enumeration in [`verify_strong_haxell`].
    pub haxell_a: usize,
    /// `|A|` for [`brute_force_perfect_matching`].
    pub brute_force_a: usize,
}

impl Default for ExactCaps {
    fn default() -> Self {
        ExactCaps {
            tau_b: 24,
            haxell_a: 16,
            brute_force_a: 12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteHypergraph {
    num_a: usize,
    num_b: usize,
    rank_bound: usize,
    edges: Vec<Hyperedge>,
    by_a: Vec<Vec<EdgeId>>,
}

impl BipartiteHypergraph {
    pub fn new(num_a: usize, num_b: usize, rank_bound: usize) -> Self {
        BipartiteHypergraph {
            num_a,
            num_b,
            rank_bound,
            edges: Vec::new(),
            by_a: vec![Vec::new(); num_a],
        }
    }

    /// Appends an edge without validation and returns its id.
    pub fn add_edge(&mut self, a: usize, b: Vec<usize>) -> EdgeId {
        let id = self.edges.len();
        if a < self.num_a {
            self.by_a[a].push(id);
        }
        self.edges.push(Hyperedge::new(a, b));
        id
    }

    pub fn num_a(&self) -> usize {
        self.num_a
    }

    pub fn num_b(&self) -> usize {
        self.num_b
    }

    pub fn rank_bound(&self) -> usize {
        self.rank_bound
    }

    /// `n(H) = |A| + |B|`.
    pub fn num_vertices(&self) -> usize {
        self.num_a + self.num_b
    }

    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Hyperedge> {
        self.edges.get(id)
    }

    /// Edge ids incident to `a`, ascending.
    pub fn edges_of(&self, a: usize) -> &[EdgeId] {
        self.by_a.get(a).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Total volume `p = Σ |e|`.
    pub fn volume(&self) -> usize {
        self.edges.iter().map(Hyperedge::size).sum()
    }

    /// Checks the structural invariants and reports the first violation.
    pub fn validate(&self) -> Result<(), Violation> {
        (0..self.edges.len()).try_for_each(|id| self.validate_edge(id))
    }

    /// Structural check of a single edge.
    pub fn validate_edge(&self, id: EdgeId) -> Result<(), Violation> {
        let e = &self.edges[id];
        let fail = |kind| Err(Violation { edge: id, kind });
        if e.a >= self.num_a {
            return fail(ViolationKind::AOutOfRange { a: e.a });
        }
        if e.b.is_empty() {
            return fail(ViolationKind::EmptyBPart);
        }
        if e.b.len() > self.rank_bound {
            return fail(ViolationKind::RankExceedsBound {
                rank: e.b.len(),
                bound: self.rank_bound,
            });
        }
        if let Some(&b) = e.b.iter().find(|&&b| b >= self.num_b) {
            return fail(ViolationKind::BOutOfRange { b });
        }
        if let Some(w) = e.b.windows(2).find(|w| w[0] == w[1]) {
            return fail(ViolationKind::DuplicateB { b: w[0] });
        }
        Ok(())
    }

    /// Subhypergraph keeping only edges of rank at most `r_prime`. Edge ids
    /// are renumbered; the returned vector maps new ids to old ones.
    pub fn restrict_rank(&self, r_prime: usize) -> (BipartiteHypergraph, Vec<EdgeId>) {
        let mut sub = BipartiteHypergraph::new(self.num_a, self.num_b, self.rank_bound);
        let mut map = Vec::new();
        for (id, e) in self.edges.iter().enumerate() {
            if e.rank() <= r_prime {
                sub.add_edge(e.a, e.b.clone());
                map.push(id);
            }
        }
        (sub, map)
    }

    fn get(&self, id: EdgeId) -> Result<&Hyperedge, HypergraphError> {
        self.edges.get(id).ok_or(HypergraphError::UnknownEdge(id))
    }
}

/// A set of hyperedge ids, kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Matching {
    edge_ids: Vec<EdgeId>,
}

impl Matching {
    pub fn new() -> Self {
        Matching::default()
    }

    pub fn ids(&self) -> &[EdgeId] {
        &self.edge_ids
    }

    pub fn len(&self) -> usize {
        self.edge_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edge_ids.is_empty()
    }

    pub fn contains(&self, id: EdgeId) -> bool {
        self.edge_ids.binary_search(&id).is_ok()
    }

    pub fn insert(&mut self, id: EdgeId) -> bool {
        match self.edge_ids.binary_search(&id) {
            Ok(_) => false,
            Err(pos) => {
                self.edge_ids.insert(pos, id);
                true
            }
        }
    }

    pub fn remove(&mut self, id: EdgeId) -> bool {
        match self.edge_ids.binary_search(&id) {
            Ok(pos) => {
                self.edge_ids.remove(pos);
                true
            }
            Err(_) => false,
        }
    }
}

impl FromIterator<EdgeId> for Matching {
    fn from_iter<I: IntoIterator<Item = EdgeId>>(iter: I) -> Self {
        let mut edge_ids: Vec<EdgeId> = iter.into_iter().collect();
        edge_ids.sort_unstable();
        edge_ids.dedup();
        Matching { edge_ids }
    }
}

/// True when the edges of `m` are pairwise vertex-disjoint in both parts.
pub fn is_matching(h: &BipartiteHypergraph, m: &Matching) -> Result<bool, HypergraphError> {
    let mut used_a = vec![false; h.num_a()];
    let mut used_b = vec![false; h.num_b()];
    for &id in m.ids() {
        let e = h.get(id)?;
        if e.a >= h.num_a() || std::mem::replace(&mut used_a[e.a], true) {
            return Ok(false);
        }
        for &b in &e.b {
            if b >= h.num_b() || std::mem::replace(&mut used_b[b], true) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// True iff `m` is vertex-disjoint and covers every `A`-vertex.
pub fn is_perfect_matching(h: &BipartiteHypergraph, m: &Matching) -> Result<bool, HypergraphError> {
    Ok(is_matching(h, m)? && m.len() == h.num_a())
}

/// The edges of `m` meeting `e` inside part `B`. Intersections in part `A`
/// are ignored.
pub fn blocking_edges(
    h: &BipartiteHypergraph,
    e: EdgeId,
    m: &Matching,
) -> Result<Vec<EdgeId>, HypergraphError> {
    let edge = h.get(e)?;
    let mut out = Vec::new();
    for &f in m.ids() {
        if h.get(f)?.meets_in_b(edge) {
            out.push(f);
        }
    }
    Ok(out)
}

/// `τ(E_S)`: the minimum number of `B`-vertices meeting every edge incident
/// to `s`.
///
/// Rank-one edges force their vertex; the remaining edges are solved
/// exactly by branching on an uncovered edge of minimum rank, bounded by a
/// greedy packing of pairwise disjoint uncovered edges. The cap applies to
/// the distinct `B`-vertices left after forced choices.
pub fn tau(h: &BipartiteHypergraph, s: &[usize], caps: &ExactCaps) -> Result<usize, HypergraphError> {
    let edges = incident_b_sets(h, s)?;
    let (forced, rest) = force_rank_one(&edges, h.num_b());
    if rest.is_empty() {
        return Ok(forced);
    }
    let mut local: Vec<usize> = rest.iter().flat_map(|e| e.iter().copied()).collect();
    local.sort_unstable();
    local.dedup();
    let cap = caps.tau_b.min(64);
    if local.len() > cap {
        return Err(HypergraphError::TooLarge {
            what: "τ",
            size: local.len(),
            cap,
        });
    }
    let mut masks: Vec<u64> = rest
        .iter()
        .map(|e| {
            e.iter().fold(0u64, |acc, b| {
                acc | 1u64 << local.binary_search(b).expect("collected above")
            })
        })
        .collect();
    masks.sort_unstable();
    masks.dedup();
    let mut best = greedy_cover_masks(&masks);
    branch_cover(&masks, 0, 0, &mut best);
    Ok(forced + best)
}

/// A hitting-set size that is at least `τ(E_S)`, from a greedy cover. Used
/// to refute Haxell conditions without exact search.
pub fn tau_upper_bound(h: &BipartiteHypergraph, s: &[usize]) -> Result<usize, HypergraphError> {
    let edges = incident_b_sets(h, s)?;
    let (forced, rest) = force_rank_one(&edges, h.num_b());
    let mut hit = vec![false; h.num_b()];
    let mut uncovered: Vec<&[usize]> = rest;
    let mut extra = 0;
    let mut count = vec![0usize; h.num_b()];
    while !uncovered.is_empty() {
        count.iter_mut().for_each(|c| *c = 0);
        for e in &uncovered {
            for &b in e.iter() {
                count[b] += 1;
            }
        }
        let (pick, _) = count
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.cmp(y.1).then(y.0.cmp(&x.0)))
            .expect("non-empty B part");
        hit[pick] = true;
        extra += 1;
        uncovered.retain(|e| !e.iter().any(|&b| hit[b]));
    }
    Ok(forced + extra)
}

fn incident_b_sets<'h>(h: &'h BipartiteHypergraph, s: &[usize]) -> Result<Vec<&'h [usize]>, HypergraphError> {
    let mut out = Vec::new();
    for &a in s {
        for &id in h.edges_of(a) {
            let e = &h.edges[id];
            if e.b.is_empty() {
                return Err(HypergraphError::Invalid(Violation {
                    edge: id,
                    kind: ViolationKind::EmptyBPart,
                }));
            }
            if let Some(&b) = e.b.iter().find(|&&b| b >= h.num_b()) {
                return Err(HypergraphError::Invalid(Violation {
                    edge: id,
                    kind: ViolationKind::BOutOfRange { b },
                }));
            }
            out.push(e.b.as_slice());
        }
    }
    Ok(out)
}

/// Picks every vertex that forms a rank-one edge on its own, and returns
/// how many were picked together with the edges they leave uncovered.
fn force_rank_one<'e>(edges: &[&'e [usize]], num_b: usize) -> (usize, Vec<&'e [usize]>) {
    let mut hit = vec![false; num_b];
    let mut forced = 0;
    for e in edges {
        if e.len() == 1 && !hit[e[0]] {
            hit[e[0]] = true;
            forced += 1;
        }
    }
    let rest = edges
        .iter()
        .copied()
        .filter(|e| !e.iter().any(|&b| hit[b]))
        .collect();
    (forced, rest)
}

fn greedy_cover_masks(masks: &[u64]) -> usize {
    let mut chosen = 0u64;
    let mut size = 0;
    while masks.iter().find(|&&m| m & chosen == 0).is_some() {
        let mut counts = [0u32; 64];
        for &m in masks.iter().filter(|&&m| m & chosen == 0) {
            let mut bits = m;
            while bits != 0 {
                counts[bits.trailing_zeros() as usize] += 1;
                bits &= bits - 1;
            }
        }
        let pick = (0..64)
            .max_by_key(|&i| (counts[i], std::cmp::Reverse(i)))
            .unwrap();
        chosen |= 1 << pick;
        size += 1;
    }
    size
}

fn branch_cover(masks: &[u64], chosen: u64, depth: usize, best: &mut usize) {
    if depth >= *best {
        return;
    }
    // Lower bound: pairwise disjoint uncovered edges need distinct hitters.
    let mut packed = 0u64;
    let mut lower = 0;
    let mut pivot: Option<u64> = None;
    for &m in masks {
        if m & chosen != 0 {
            continue;
        }
        if pivot.is_none_or(|p| m.count_ones() < p.count_ones()) {
            pivot = Some(m);
        }
        if m & packed == 0 {
            packed |= m;
            lower += 1;
        }
    }
    let Some(pivot) = pivot else {
        *best = depth;
        return;
    };
    if depth + lower >= *best {
        return;
    }
    let mut bits = pivot;
    while bits != 0 {
        let bit = bits & bits.wrapping_neg();
        branch_cover(masks, chosen | bit, depth + 1, best);
        bits &= bits - 1;
    }
}

/// Checks `τ(E_S) ≥ φ|S|` for every non-empty `S ⊆ A`.
///
/// Each subset is first tested against a greedy upper bound on `τ`, so a
/// failing subset is usually found without exact search; exact `τ` is only
/// computed when the bound is inconclusive.
pub fn verify_strong_haxell(
    h: &BipartiteHypergraph,
    phi: Rational,
    caps: &ExactCaps,
) -> Result<bool, HypergraphError> {
    let n = h.num_a();
    if n > caps.haxell_a.min(63) {
        return Err(HypergraphError::TooLarge {
            what: "Haxell verification",
            size: n,
            cap: caps.haxell_a,
        });
    }
    let meets =
        |tau: usize, size: usize| tau as u128 * *phi.denom() as u128 >= *phi.numer() as u128 * size as u128;
    let mut subset = Vec::with_capacity(n);
    for mask in 1u64..(1u64 << n) {
        subset.clear();
        subset.extend((0..n).filter(|&i| mask >> i & 1 == 1));
        if meets(tau_upper_bound(h, &subset)?, subset.len()) && meets(tau(h, &subset, caps)?, subset.len()) {
            continue;
        }
        return Ok(false);
    }
    Ok(true)
}

/// Backtracking perfect-matching search over `A`-vertices in ascending
/// order, trying each vertex's edges by ascending id.
pub fn brute_force_perfect_matching(
    h: &BipartiteHypergraph,
    caps: &ExactCaps,
) -> Result<Option<Matching>, HypergraphError> {
    if h.num_a() > caps.brute_force_a {
        return Err(HypergraphError::TooLarge {
            what: "perfect matching search",
            size: h.num_a(),
            cap: caps.brute_force_a,
        });
    }
    if let Err(v) = h.validate() {
        return Err(HypergraphError::Invalid(v));
    }
    let mut used = vec![false; h.num_b()];
    let mut chosen = Vec::with_capacity(h.num_a());
    Ok(backtrack(h, 0, &mut used, &mut chosen).then(|| chosen.into_iter().collect()))
}

fn backtrack(h: &BipartiteHypergraph, a: usize, used: &mut [bool], chosen: &mut Vec<EdgeId>) -> bool {
    if a == h.num_a() {
        return true;
    }
    for &id in h.edges_of(a) {
        let e = &h.edges[id];
        if e.b.iter().any(|&b| used[b]) {
            continue;
        }
        e.b.iter().for_each(|&b| used[b] = true);
        chosen.push(id);
        if backtrack(h, a + 1, used, chosen) {
            return true;
        }
        chosen.pop();
        e.b.iter().for_each(|&b| used[b] = false);
    }
    false
}
