//! The alternating-forest perfect-matching engine.
//!
//! The main loop builds a new layer on top of the forest and then collapses
//! the forest while its top layer has more than `μ|X_ℓ|` immediately
//! addable edges. A collapse swaps those edges into the matching against
//! the blocking edges of the layer below (or against unmatched roots at
//! `ℓ = 1`), discards the top layer, and tries to superpose-build the layer
//! below, keeping the result only if it grew by a factor `1 + μ`.
//!
//! The engine is generic over a [`LayerOracle`]; using a maximal oracle
//! gives the plain algorithm, an approximate one gives the faster variant.

pub mod signature;
pub mod trace;

use std::fmt;

use thiserror::Error;

use crate::halflayer::{
    query_admits, ExplicitOracle, HalfLayerOracleSpec, HalfLayerQuery, Layer, LayerOracle, OracleError,
    OracleKind,
};
use crate::hypergraph::{BipartiteHypergraph, Matching, Violation};
use crate::{EdgeId, Rational};

pub use signature::Signature;
pub use trace::{Event, TraceLine};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    /// Degree cap `Δ` of every half layer.
    pub delta: usize,
    /// Collapse and superpose threshold `μ ∈ (0, 1)`.
    pub mu: Rational,
    /// Main-loop iteration limit; `None` uses [`default_iteration_cap`].
    pub iteration_cap: Option<u64>,
    pub oracle: HalfLayerOracleSpec,
    /// Re-validate the whole forest at every main-loop start.
    pub strict: bool,
    /// Record one [`TraceLine`] per iteration.
    pub trace: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            delta: 4,
            mu: Rational::new(1, 10),
            iteration_cap: None,
            oracle: HalfLayerOracleSpec::new(OracleKind::ExplicitGreedy),
            strict: false,
            trace: false,
        }
    }
}

impl EngineConfig {
    pub fn check(&self) -> Result<(), EngineError> {
        if self.delta == 0 {
            return Err(EngineError::Config("Δ must be at least 1".into()));
        }
        if *self.mu.numer() == 0 || self.mu >= Rational::from_integer(1) {
            return Err(EngineError::Config(format!("μ = {} outside (0, 1)", self.mu)));
        }
        if self.iteration_cap == Some(0) {
            return Err(EngineError::Config("iteration cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// `4 · 2^⌈√(ℓ_max² + ℓ_max log₂ n)⌉` with `ℓ_max = ⌈9 log₂ n / log₂ Δ⌉`,
/// saturating. `Δ < 2` is treated as `Δ = 2`.
pub fn default_iteration_cap(n: usize, delta: usize) -> u64 {
    let log_n = (n.max(2) as f64).log2();
    let log_delta = (delta.max(2) as f64).log2();
    let ell_max = (9.0 * log_n / log_delta).ceil();
    let exponent = (ell_max * ell_max + ell_max * log_n).sqrt().ceil() as u32;
    if exponent >= 62 {
        u64::MAX
    } else {
        4u64 << exponent
    }
}

/// `9 log₂ n / log₂ Δ`, the depth bound under the strong Haxell condition.
pub fn depth_bound(n: usize, delta: usize) -> f64 {
    if delta < 2 {
        return f64::INFINITY;
    }
    9.0 * (n.max(1) as f64).log2() / (delta as f64).log2()
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("no progress within bound after {iterations} iterations (last signature {signature})")]
    NoProgress { iterations: u64, signature: Signature },
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("invariant breach: {message}\n{dump}")]
    InvariantBreach { message: String, dump: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(Violation),
}

/// Counters gathered over a run. The `*_violations` counters record
/// properties that only hold under the strong Haxell condition, so they are
/// measured rather than enforced.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EngineStats {
    pub iterations: u64,
    pub layers_built: u64,
    pub collapses: u64,
    pub superposes_kept: u64,
    pub edge_swaps: u64,
    pub max_depth: usize,
    /// Iterations after which the signature failed to decrease strictly.
    pub signature_violations: u64,
    /// Main-loop starts inspected by strict mode.
    pub strict_checks: u64,
    /// Layers with `|Y_t| < (1 − μ)|X_t|`.
    pub ratio_violations: u64,
    /// Layers with `|X_i| ≤ (Δ/10)|Y_{≤ i−1}|`.
    pub growth_violations: u64,
    /// Main-loop starts with `ℓ > 9 log₂ n / log₂ Δ`.
    pub depth_violations: u64,
}

/// Layers `L_0, …, L_ℓ`. `L_0 = (∅, roots)` holds the unmatched
/// `A`-vertices; `layers[i]` is `L_{i+1}`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlternatingForest {
    pub roots: Vec<usize>,
    pub layers: Vec<Layer>,
}

impl AlternatingForest {
    pub fn ell(&self) -> usize {
        self.layers.len()
    }

    /// `(|X_t|, |Y_t|)` for `t = 0..=ℓ`.
    pub fn sizes(&self) -> Vec<(usize, usize)> {
        std::iter::once((0, self.roots.len()))
            .chain(self.layers.iter().map(|l| (l.x.len(), l.y.len())))
            .collect()
    }

    pub fn signature(&self) -> Signature {
        Signature::from_sizes(&self.sizes())
    }
}

impl fmt::Display for AlternatingForest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "L0 roots {:?}", self.roots)?;
        for (i, layer) in self.layers.iter().enumerate() {
            writeln!(f, "L{} X {:?} Y {:?}", i + 1, layer.x, layer.y)?;
        }
        Ok(())
    }
}

/// What one main-loop iteration did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepReport {
    pub event: Event,
    pub collapses: u64,
    pub matched: usize,
    pub ell: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineOutcome {
    /// Matching edge ids, ascending.
    pub matching: Vec<EdgeId>,
    pub stats: EngineStats,
    pub trace: Vec<TraceLine>,
}

pub struct Engine<O: LayerOracle> {
    oracle: O,
    cfg: EngineConfig,
    forest: AlternatingForest,
    matched: Vec<Option<EdgeId>>,
    owner: Vec<Option<EdgeId>>,
    stats: EngineStats,
    trace: Vec<TraceLine>,
    signature: Signature,
    cap: u64,
}

impl<O: LayerOracle> Engine<O> {
    pub fn new(oracle: O, cfg: EngineConfig) -> Result<Self, EngineError> {
        cfg.check()?;
        let num_a = oracle.num_a();
        let num_b = oracle.num_b();
        let cap = cfg
            .iteration_cap
            .unwrap_or_else(|| default_iteration_cap(num_a + num_b, cfg.delta));
        let forest = AlternatingForest {
            roots: (0..num_a).collect(),
            layers: Vec::new(),
        };
        let signature = forest.signature();
        Ok(Engine {
            oracle,
            cfg,
            forest,
            matched: vec![None; num_a],
            owner: vec![None; num_b],
            stats: EngineStats::default(),
            trace: Vec::new(),
            signature,
            cap,
        })
    }

    pub fn forest(&self) -> &AlternatingForest {
        &self.forest
    }

    pub fn matching(&self) -> Matching {
        self.matched.iter().flatten().copied().collect()
    }

    pub fn stats(&self) -> &EngineStats {
        &self.stats
    }

    pub fn trace(&self) -> &[TraceLine] {
        &self.trace
    }

    pub fn oracle(&self) -> &O {
        &self.oracle
    }

    pub fn into_oracle(self) -> O {
        self.oracle
    }

    pub fn iteration_cap(&self) -> u64 {
        self.cap
    }

    pub fn is_done(&self) -> bool {
        self.forest.roots.is_empty()
    }

    /// Runs main-loop iterations until every `A`-vertex is matched.
    pub fn run(&mut self) -> Result<EngineOutcome, EngineError> {
        if self.cfg.strict {
            self.check_forest()?;
        }
        while !self.is_done() {
            self.step()?;
        }
        Ok(EngineOutcome {
            matching: self.matching().ids().to_vec(),
            stats: self.stats.clone(),
            trace: self.trace.clone(),
        })
    }

    /// One main-loop iteration: build a layer, push it, collapse.
    pub fn step(&mut self) -> Result<StepReport, EngineError> {
        if self.stats.iterations >= self.cap {
            return Err(self.no_progress());
        }
        let ell = self.forest.ell();
        let layer = self.build_layer(ell, None)?;
        if layer.x.is_empty() {
            // Every later build would be empty as well.
            return Err(self.no_progress());
        }
        self.forest.layers.push(layer);
        self.stats.layers_built += 1;
        self.stats.max_depth = self.stats.max_depth.max(self.forest.ell());

        let before = self.matched_count();
        let (collapses, kept) = self.collapse_forest()?;
        let after = self.matched_count();

        self.stats.iterations += 1;
        let event = if after > before {
            Event::Swap
        } else if kept > 0 {
            Event::Superpose
        } else if collapses > 0 {
            Event::Collapse
        } else {
            Event::Grow
        };
        let signature = self.forest.signature();
        if signature >= self.signature {
            self.stats.signature_violations += 1;
        }
        if self.cfg.trace {
            self.trace.push(TraceLine {
                iter: self.stats.iterations,
                ell: self.forest.ell(),
                matched: after,
                signature_hash: signature.hash64(),
                event,
            });
        }
        self.signature = signature;
        if self.cfg.strict {
            self.check_forest()?;
        }
        Ok(StepReport {
            event,
            collapses,
            matched: after,
            ell: self.forest.ell(),
        })
    }

    fn no_progress(&self) -> EngineError {
        EngineError::NoProgress {
            iterations: self.stats.iterations,
            signature: self.signature.clone(),
        }
    }

    fn matched_count(&self) -> usize {
        self.matched.iter().flatten().count()
    }

    /// Active `A`-vertices on top of the forest prefix `L_0..L_lower`.
    fn active(&self, lower: usize) -> Vec<usize> {
        if lower == 0 {
            self.forest.roots.clone()
        } else {
            let mut a: Vec<usize> = self.forest.layers[lower - 1]
                .y
                .iter()
                .map(|&f| self.oracle.edge_a(f))
                .collect();
            a.sort_unstable();
            a.dedup();
            a
        }
    }

    fn mark_b(&self, ids: &[EdgeId], marks: &mut [bool]) {
        for &e in ids {
            for &b in self.oracle.edge_b(e) {
                marks[b] = true;
            }
        }
    }

    /// Extends `seed` (or an empty layer) into a layer on top of the forest
    /// prefix `L_0..L_lower`, with one oracle call.
    fn build_layer(&mut self, lower: usize, seed: Option<&Layer>) -> Result<Layer, EngineError> {
        let mut capacity = vec![0usize; self.oracle.num_a()];
        for a in self.active(lower) {
            capacity[a] = self.cfg.delta;
        }
        let mut forbidden = vec![false; self.oracle.num_b()];
        for layer in &self.forest.layers[..lower] {
            self.mark_b(&layer.x, &mut forbidden);
            self.mark_b(&layer.y, &mut forbidden);
        }
        let mut out = seed.cloned().unwrap_or_default();
        self.mark_b(&out.x, &mut forbidden);
        self.mark_b(&out.y, &mut forbidden);
        for &e in &out.x {
            let a = self.oracle.edge_a(e);
            capacity[a] = capacity[a].saturating_sub(1);
        }

        let query = HalfLayerQuery {
            capacity: &capacity,
            forbidden: &forbidden,
            owner: &self.owner,
        };
        let z = self.oracle.half_layer(&query)?;
        if self.cfg.strict && !query_admits(&self.oracle, &query, &z) {
            return Err(self.breach(format!("oracle returned a non-half-layer {z:?}")));
        }
        for &e in &z {
            out.y
                .extend(self.oracle.edge_b(e).iter().filter_map(|&b| self.owner[b]));
        }
        out.x.extend(z);
        out.x.sort_unstable();
        out.y.sort_unstable();
        out.y.dedup();
        Ok(out)
    }

    fn immediately_addable(&self, e: EdgeId) -> bool {
        self.oracle.edge_b(e).iter().all(|&b| self.owner[b].is_none())
    }

    fn exceeds_mu(&self, count: usize, total: usize) -> bool {
        count as u128 * *self.cfg.mu.denom() as u128 > *self.cfg.mu.numer() as u128 * total as u128
    }

    fn match_edge(&mut self, e: EdgeId) {
        let a = self.oracle.edge_a(e);
        self.matched[a] = Some(e);
        for &b in self.oracle.edge_b(e) {
            self.owner[b] = Some(e);
        }
    }

    fn unmatch_edge(&mut self, f: EdgeId) {
        let a = self.oracle.edge_a(f);
        if self.matched[a] == Some(f) {
            self.matched[a] = None;
        }
        for &b in self.oracle.edge_b(f) {
            if self.owner[b] == Some(f) {
                self.owner[b] = None;
            }
        }
    }

    /// Returns the number of collapses and of superpose-builds kept.
    fn collapse_forest(&mut self) -> Result<(u64, u64), EngineError> {
        let mut collapses = 0;
        let mut kept = 0;
        while let Some(top) = self.forest.layers.last() {
            let ell = self.forest.ell();
            // Swaps never change which top-layer edges are immediately
            // addable, so the set is taken once per pass.
            let addable: Vec<EdgeId> = top
                .x
                .iter()
                .copied()
                .filter(|&e| self.immediately_addable(e))
                .collect();
            if !self.exceeds_mu(addable.len(), top.x.len()) {
                break;
            }
            let witness =
                |engine: &Self, a: usize| addable.iter().copied().find(|&e| engine.oracle.edge_a(e) == a);
            if ell == 1 {
                let roots = std::mem::take(&mut self.forest.roots);
                let mut remaining = Vec::with_capacity(roots.len());
                for a in roots {
                    match witness(self, a) {
                        Some(e) => {
                            self.match_edge(e);
                            self.stats.edge_swaps += 1;
                        }
                        None => remaining.push(a),
                    }
                }
                self.forest.roots = remaining;
            } else {
                let below = std::mem::take(&mut self.forest.layers[ell - 2].y);
                let mut remaining = Vec::with_capacity(below.len());
                for f in below {
                    match witness(self, self.oracle.edge_a(f)) {
                        Some(e) => {
                            self.unmatch_edge(f);
                            self.match_edge(e);
                            self.stats.edge_swaps += 1;
                        }
                        None => remaining.push(f),
                    }
                }
                self.forest.layers[ell - 2].y = remaining;
            }
            self.forest.layers.pop();
            if ell >= 2 {
                let seed = self.forest.layers[ell - 2].clone();
                let hat = self.build_layer(ell - 2, Some(&seed))?;
                let grown = hat.x.len() as u128 * *self.cfg.mu.denom() as u128
                    >= (*self.cfg.mu.denom() + *self.cfg.mu.numer()) as u128 * seed.x.len() as u128;
                if grown {
                    self.forest.layers[ell - 2] = hat;
                    kept += 1;
                    self.stats.superposes_kept += 1;
                }
            }
            collapses += 1;
            self.stats.collapses += 1;
        }
        Ok((collapses, kept))
    }

    fn breach(&self, message: String) -> EngineError {
        EngineError::InvariantBreach {
            message,
            dump: self.forest.to_string(),
        }
    }

    /// Re-validates the forest and matching; counts the Haxell-dependent
    /// properties into the stats.
    fn check_forest(&mut self) -> Result<(), EngineError> {
        self.stats.strict_checks += 1;
        let num_a = self.oracle.num_a();
        let num_b = self.oracle.num_b();

        // Matching: owners agree with the matched edges, A- and B-disjoint.
        let mut seen_b = vec![None; num_b];
        for (a, e) in self.matched.iter().enumerate() {
            let Some(e) = *e else { continue };
            if self.oracle.edge_a(e) != a {
                return Err(self.breach(format!("edge {e} matched at wrong vertex {a}")));
            }
            for &b in self.oracle.edge_b(e) {
                if seen_b[b].replace(e).is_some() || self.owner[b] != Some(e) {
                    return Err(self.breach(format!("matching not B-disjoint at {b}")));
                }
            }
        }
        if seen_b != self.owner {
            return Err(self.breach("stale B-ownership".into()));
        }
        let unmatched: Vec<usize> = (0..num_a).filter(|&a| self.matched[a].is_none()).collect();
        if unmatched != self.forest.roots {
            return Err(self.breach("L0 differs from the unmatched vertices".into()));
        }

        let mut forbidden = vec![false; num_b];
        let mut y_below = self.forest.roots.len();
        let ell = self.forest.ell();
        for t in 0..ell {
            let layer = &self.forest.layers[t];
            let mut capacity = vec![0usize; num_a];
            for a in self.active(t) {
                capacity[a] = self.cfg.delta;
            }
            let query = HalfLayerQuery {
                capacity: &capacity,
                forbidden: &forbidden,
                owner: &self.owner,
            };
            if !query_admits(&self.oracle, &query, &layer.x) {
                return Err(self.breach(format!("X_{} is not a half layer", t + 1)));
            }
            let mut blocking: Vec<EdgeId> = layer
                .x
                .iter()
                .flat_map(|&e| self.oracle.edge_b(e).iter().filter_map(|&b| self.owner[b]))
                .collect();
            blocking.sort_unstable();
            blocking.dedup();
            if blocking != layer.y {
                return Err(self.breach(format!("Y_{} is not the blocking set of X_{}", t + 1, t + 1)));
            }
            for &f in &layer.y {
                if self.oracle.edge_b(f).iter().any(|&b| forbidden[b]) {
                    return Err(self.breach(format!("Y_{} meets a lower layer", t + 1)));
                }
            }
            let addable = layer.x.iter().filter(|&&e| self.immediately_addable(e)).count();
            if self.exceeds_mu(addable, layer.x.len()) {
                return Err(self.breach(format!("L_{} is collapsible", t + 1)));
            }
            // |Y_t| ≥ (1 − μ)|X_t|
            let mu = self.cfg.mu;
            if (layer.y.len() as u128) * (*mu.denom() as u128)
                < (*mu.denom() - *mu.numer()) as u128 * layer.x.len() as u128
            {
                self.stats.ratio_violations += 1;
            }
            // |X_i| > (Δ/10)|Y_{≤ i−1}|
            if 10 * layer.x.len() as u128 <= self.cfg.delta as u128 * y_below as u128 {
                self.stats.growth_violations += 1;
            }
            y_below += layer.y.len();
            let layer = layer.clone();
            self.mark_b(&layer.x, &mut forbidden);
            self.mark_b(&layer.y, &mut forbidden);
        }
        if ell as f64 > depth_bound(num_a + num_b, self.cfg.delta) + 1e-9 {
            self.stats.depth_violations += 1;
        }
        Ok(())
    }
}

/// Runs the engine on an explicit hypergraph with the oracle named by the
/// configuration.
pub fn run_explicit(h: &BipartiteHypergraph, cfg: &EngineConfig) -> Result<EngineOutcome, EngineError> {
    h.validate().map_err(EngineError::InvalidHypergraph)?;
    let oracle = ExplicitOracle::from_spec(h, &cfg.oracle).map_err(EngineError::Config)?;
    Engine::new(oracle, cfg.clone())?.run()
}

/// A perfect matching of `h`, or an error when the engine stalls.
pub fn hypergraph_matching(h: &BipartiteHypergraph, cfg: &EngineConfig) -> Result<Matching, EngineError> {
    run_explicit(h, cfg).map(|out| out.matching.into_iter().collect())
}
