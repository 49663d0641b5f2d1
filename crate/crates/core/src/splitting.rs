//! Splitting an expander into `k` edge-disjoint expanders.
//!
//! A template graph of maximum degree 9 on the same vertex set supplies the
//! demands: `k` copies of each template edge. Routing them edge-disjointly
//! and giving copy `i` the union of its paths yields the parts `E_i`.

use std::fmt;

use thiserror::Error;

use crate::engine::{EngineConfig, EngineStats};
use crate::graph::{conductance_exact, generate, CutReport, Family, GraphError, MultiGraph};
use crate::routing::{route_with_stats, RoutingError, RoutingInstance};
use crate::{EdgeId, Rational};

pub const MAX_TEMPLATE_DEGREE: usize = 9;

#[derive(Debug, Error)]
pub enum SplitError {
    #[error("template has maximum degree {0}, above {MAX_TEMPLATE_DEGREE}")]
    TemplateDegree(usize),
    #[error("template has {template} vertices, graph has {graph}")]
    TemplateSize { template: usize, graph: usize },
    #[error("template is disconnected")]
    TemplateDisconnected,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("k must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Template {
    Graph(MultiGraph),
    Generated(Family),
}

/// Path length and per-demand cap used for the routing step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitParams {
    /// Default parameters from the exact conductance of the input graph.
    Defaults,
    Relaxed {
        r: usize,
        delta: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitResult {
    pub template: MultiGraph,
    /// Edge ids of `G` in each part, ascending.
    pub parts: Vec<Vec<EdgeId>>,
    /// Exact conductance of each `(V, E_i)` when within the cap.
    pub conductance: Vec<Option<Rational>>,
    pub engine: EngineStats,
}

impl SplitResult {
    /// `i |E_i| phi_num phi_den` per copy, with `- -` when not computed.
    pub fn summary_lines(&self) -> Vec<String> {
        self.parts
            .iter()
            .zip(&self.conductance)
            .enumerate()
            .map(|(i, (part, phi))| match phi {
                Some(p) => format!("{i} {} {} {}", part.len(), p.numer(), p.denom()),
                None => format!("{i} {} - -", part.len()),
            })
            .collect()
    }
}

pub fn split(
    g: &MultiGraph,
    k: usize,
    template: &Template,
    params: SplitParams,
    cfg: &EngineConfig,
    conductance_cap: usize,
) -> Result<SplitResult, SplitError> {
    if k == 0 {
        return Err(SplitError::ZeroK);
    }
    if !g.is_connected() {
        return Err(SplitError::Disconnected);
    }
    let template = match template {
        Template::Graph(t) => t.clone(),
        Template::Generated(family) => generate(*family)?,
    };
    if template.num_vertices() != g.num_vertices() {
        return Err(SplitError::TemplateSize {
            template: template.num_vertices(),
            graph: g.num_vertices(),
        });
    }
    if template.max_degree() > MAX_TEMPLATE_DEGREE {
        return Err(SplitError::TemplateDegree(template.max_degree()));
    }
    if !template.is_connected() {
        return Err(SplitError::TemplateDisconnected);
    }
    let mut demands = Vec::with_capacity(k * template.num_edges());
    for _ in 0..k {
        demands.extend_from_slice(template.edges());
    }
    let inst = match params {
        SplitParams::Relaxed { r, delta } => RoutingInstance::relaxed(g.clone(), demands, r, delta)?,
        SplitParams::Defaults => {
            let (phi, _) = conductance_exact(g, conductance_cap)?;
            RoutingInstance::with_defaults(g.clone(), demands, phi)?
        }
    };
    let out = route_with_stats(&inst, cfg)?;
    let per_copy = template.num_edges();
    let mut parts = vec![Vec::new(); k];
    for (demand, edges) in out.edge_ids.iter().enumerate() {
        parts[demand / per_copy.max(1)].extend_from_slice(edges);
    }
    for part in &mut parts {
        part.sort_unstable();
    }
    let conductance = parts
        .iter()
        .map(|part| part_conductance(g, part, conductance_cap))
        .collect::<Result<_, _>>()?;
    Ok(SplitResult {
        template,
        parts,
        conductance,
        engine: out.engine,
    })
}

fn part_conductance(g: &MultiGraph, part: &[EdgeId], cap: usize) -> Result<Option<Rational>, GraphError> {
    if g.num_vertices() > cap {
        return Ok(None);
    }
    let sub = g.edge_subgraph(part)?;
    conductance_exact(&sub, cap).map(|(phi, _)| Some(phi))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SplitIssue {
    Overlap {
        edge: EdgeId,
        first: usize,
        second: usize,
    },
    NotContained {
        part: usize,
        edge: EdgeId,
    },
    Conductance {
        part: usize,
        phi: Rational,
        cut: Vec<usize>,
    },
}

impl fmt::Display for SplitIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitIssue::Overlap { edge, first, second } => {
                write!(f, "overlap: edge {edge} in parts {first} and {second}")
            }
            SplitIssue::NotContained { part, edge } => {
                write!(f, "part {part} names unknown edge {edge}")
            }
            SplitIssue::Conductance { part, phi, cut } => {
                write!(f, "part {part} conductance {phi} below threshold (cut {cut:?})")
            }
        }
    }
}

/// Per-part measurement from [`verify_split`].
#[derive(Debug, Clone, PartialEq)]
pub struct PartReport {
    pub part: usize,
    pub edges: usize,
    pub phi: Rational,
    /// `Φ(G_i) · log₂ n / Φ(G)`.
    pub ratio: f64,
    /// `Φ(G_i) ≥ c · Φ(G)² / log₂ n`.
    pub meets_square_bound: bool,
    /// `Φ(G_i) ≥ c · Φ(G) / log₂ n`.
    pub meets_linear_bound: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitReport {
    pub phi: Rational,
    pub parts: Vec<PartReport>,
    pub issues: Vec<SplitIssue>,
}

impl SplitReport {
    pub fn ok(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for SplitReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "phi(G) = {}", self.phi)?;
        for p in &self.parts {
            writeln!(
                f,
                "part {}: |E| = {}, phi = {}, ratio = {:.4}, square bound {}, linear bound {}",
                p.part,
                p.edges,
                p.phi,
                p.ratio,
                if p.meets_square_bound { "met" } else { "missed" },
                if p.meets_linear_bound { "met" } else { "missed" },
            )?;
        }
        for issue in &self.issues {
            writeln!(f, "{issue}")?;
        }
        Ok(())
    }
}

fn to_f64(q: Rational) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Checks disjointness and containment, and asserts
/// `Φ(G_i) ≥ c · Φ(G)² / log₂ n` for every part. The linear bound
/// `c · Φ(G) / log₂ n` is measured too but only reported.
pub fn verify_split(
    g: &MultiGraph,
    parts: &[Vec<EdgeId>],
    c: Rational,
    cap: usize,
) -> Result<SplitReport, GraphError> {
    let (phi, _) = conductance_exact(g, cap)?;
    let mut issues = Vec::new();
    let mut owner: Vec<Option<usize>> = vec![None; g.num_edges()];
    for (i, part) in parts.iter().enumerate() {
        for &e in part {
            match owner.get(e) {
                None => issues.push(SplitIssue::NotContained { part: i, edge: e }),
                Some(Some(j)) => issues.push(SplitIssue::Overlap {
                    edge: e,
                    first: *j,
                    second: i,
                }),
                Some(None) => owner[e] = Some(i),
            }
        }
    }
    let log_n = (g.num_vertices() as f64).log2();
    let mut reports = Vec::new();
    for (i, part) in parts.iter().enumerate() {
        let valid: Vec<EdgeId> = part.iter().copied().filter(|&e| e < g.num_edges()).collect();
        let sub = g.edge_subgraph(&valid)?;
        let (phi_i, cut): (Rational, CutReport) = conductance_exact(&sub, cap)?;
        let p = to_f64(phi_i);
        let square = p * log_n >= to_f64(c) * to_f64(phi) * to_f64(phi);
        let linear = p * log_n >= to_f64(c) * to_f64(phi);
        if !square || *phi_i.numer() == 0 {
            issues.push(SplitIssue::Conductance {
                part: i,
                phi: phi_i,
                cut: cut.subset,
            });
        }
        reports.push(PartReport {
            part: i,
            edges: part.len(),
            phi: phi_i,
            ratio: if *phi.numer() == 0 {
                f64::INFINITY
            } else {
                p * log_n / to_f64(phi)
            },
            meets_square_bound: square,
            meets_linear_bound: linear,
        });
    }
    Ok(SplitReport {
        phi,
        parts: reports,
        issues,
    })
}
