//! Short edge-disjoint paths in expanders through bipartite hypergraph
//! perfect matching.
//!
//! The crate is organised bottom-up:
//!
//! * [`hypergraph`]: explicit bipartite hypergraphs, matchings, blocking
//!   edges, exact hitting-set numbers and strong Haxell checks.
//! * [`halflayer`]: half layers, layers, the greedy maximal constructor and
//!   the [`halflayer::LayerOracle`] interface the engine is generic over.
//! * [`engine`]: the alternating-forest matching engine, its signature
//!   potential and its trace.
//! * [`graph`]: multigraphs, exact conductance and generators.
//! * [`routing`]: implicit demand-path hypergraphs, the BFS and
//!   blocking-flow half-layer oracles and the end-to-end router.
//! * [`splitting`]: expander splitting through routed template copies.
//! * [`format`]: the plain-text file formats.
//! * [`cli`]: the command-line surface used by the `hyperroute` binary.

pub mod cli;
pub mod engine;
pub mod format;
pub mod graph;
pub mod halflayer;
pub mod hypergraph;
pub mod routing;
pub mod splitting;

/// Exact non-negative rational used for every threshold comparison.
pub type Rational = num_rational::Ratio<u64>;

/// Identifier of a hyperedge. Explicit hypergraphs use the input line
/// order; implicit oracles hand out ids in discovery order.
pub type EdgeId = usize;

pub use engine::{hypergraph_matching, EngineConfig, EngineError};
pub use graph::MultiGraph;
pub use hypergraph::{BipartiteHypergraph, Matching};
pub use routing::{route, RoutingInstance};
