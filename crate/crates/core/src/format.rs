//! Plain-text formats. Tokens are separated by ASCII whitespace, lines by
//! LF; indices are 0-based.
//!
//! * hypergraph: `nA nB mE r`, then `mE` lines `a k b1 … bk`
//! * matching: one edge id per line
//! * graph: `n m`, then `m` lines `u v`
//! * demands: one `s t` pair per line
//! * solution: one space-separated vertex sequence per line
//!
//! Parsers are strict: wrong token counts, trailing content and
//! out-of-range indices are errors carrying the 1-based line number. Blank
//! lines are allowed only at the end. Declared counts never drive
//! allocation beyond what the input actually contains.

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::MultiGraph;
use crate::hypergraph::BipartiteHypergraph;
use crate::routing::PathSolution;
use crate::EdgeId;

/// Largest vertex count accepted on either side.
pub const MAX_VERTICES: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

/// Non-blank lines with their 1-based numbers; blank lines before the last
/// content line are errors.
fn content_lines(text: &str) -> Result<Vec<(usize, &str)>, ParseError> {
    let mut lines: Vec<(usize, &str)> = text.split('\n').enumerate().map(|(i, l)| (i + 1, l)).collect();
    while lines.last().is_some_and(|(_, l)| l.trim().is_empty()) {
        lines.pop();
    }
    if let Some(&(line, _)) = lines.iter().find(|(_, l)| l.trim().is_empty()) {
        return err(line, "blank line");
    }
    Ok(lines)
}

fn numbers(line: usize, text: &str) -> Result<Vec<usize>, ParseError> {
    text.split_ascii_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .or_else(|_| err(line, format!("not a non-negative integer: {tok:?}")))
        })
        .collect()
}

fn exactly<const N: usize>(line: usize, text: &str, what: &str) -> Result<[usize; N], ParseError> {
    let nums = numbers(line, text)?;
    nums.as_slice().try_into().or_else(|_| {
        err(
            line,
            format!("expected {N} integers ({what}), found {}", nums.len()),
        )
    })
}

fn check_count(line: usize, n: usize, what: &str) -> Result<(), ParseError> {
    if n > MAX_VERTICES {
        return err(line, format!("{what} = {n} exceeds {MAX_VERTICES}"));
    }
    Ok(())
}

fn body_count(lines: &[(usize, &str)], declared: usize, what: &str) -> Result<(), ParseError> {
    let found = lines.len().saturating_sub(1);
    if found != declared {
        let line = lines.last().map_or(1, |l| l.0);
        return err(line, format!("header declares {declared} {what}, found {found}"));
    }
    Ok(())
}

pub fn parse_hypergraph(text: &str) -> Result<BipartiteHypergraph, ParseError> {
    let lines = content_lines(text)?;
    let Some(&(hl, header)) = lines.first() else {
        return err(1, "missing header `nA nB mE r`");
    };
    let [num_a, num_b, m, r] = exactly::<4>(hl, header, "nA nB mE r")?;
    check_count(hl, num_a, "nA")?;
    check_count(hl, num_b, "nB")?;
    if r == 0 {
        return err(hl, "rank bound must be at least 1");
    }
    body_count(&lines, m, "edges")?;
    let mut h = BipartiteHypergraph::new(num_a, num_b, r);
    for &(line, text) in &lines[1..] {
        let nums = numbers(line, text)?;
        if nums.len() < 2 {
            return err(line, "expected `a k b1 … bk`");
        }
        let (a, k) = (nums[0], nums[1]);
        if nums.len() != k + 2 {
            return err(line, format!("declared {k} B-vertices, found {}", nums.len() - 2));
        }
        let id = h.add_edge(a, nums[2..].to_vec());
        if let Err(v) = h.validate_edge(id) {
            return err(line, v.to_string());
        }
    }
    Ok(h)
}

pub fn write_hypergraph(h: &BipartiteHypergraph) -> String {
    let mut out = format!(
        "{} {} {} {}\n",
        h.num_a(),
        h.num_b(),
        h.num_edges(),
        h.rank_bound()
    );
    for e in h.edges() {
        let _ = write!(out, "{} {}", e.a, e.b.len());
        for b in &e.b {
            let _ = write!(out, " {b}");
        }
        out.push('\n');
    }
    out
}

/// Edge ids, one per line. Range checks are up to the caller.
pub fn parse_matching(text: &str) -> Result<Vec<EdgeId>, ParseError> {
    content_lines(text)?
        .into_iter()
        .map(|(line, t)| exactly::<1>(line, t, "edge id").map(|[e]| e))
        .collect()
}

pub fn write_matching(ids: &[EdgeId]) -> String {
    ids.iter().map(|e| format!("{e}\n")).collect()
}

pub fn parse_graph(text: &str) -> Result<MultiGraph, ParseError> {
    let lines = content_lines(text)?;
    let Some(&(hl, header)) = lines.first() else {
        return err(1, "missing header `n m`");
    };
    let [n, m] = exactly::<2>(hl, header, "n m")?;
    check_count(hl, n, "n")?;
    body_count(&lines, m, "edges")?;
    let mut g = MultiGraph::new(n);
    for &(line, text) in &lines[1..] {
        let [u, v] = exactly::<2>(line, text, "u v")?;
        if let Err(e) = g.add_edge(u, v) {
            return err(line, e.to_string());
        }
    }
    Ok(g)
}

pub fn write_graph(g: &MultiGraph) -> String {
    let mut out = format!("{} {}\n", g.num_vertices(), g.num_edges());
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

/// Demand pairs. Endpoint checks against a graph happen at instance
/// validation.
pub fn parse_demands(text: &str) -> Result<Vec<(usize, usize)>, ParseError> {
    content_lines(text)?
        .into_iter()
        .map(|(line, t)| exactly::<2>(line, t, "s t").map(|[s, t]| (s, t)))
        .collect()
}

pub fn write_demands(demands: &[(usize, usize)]) -> String {
    demands.iter().map(|(s, t)| format!("{s} {t}\n")).collect()
}

pub fn parse_solution(text: &str) -> Result<PathSolution, ParseError> {
    let paths = content_lines(text)?
        .into_iter()
        .map(|(line, t)| numbers(line, t))
        .collect::<Result<_, _>>()?;
    Ok(PathSolution { paths })
}

pub fn write_solution(sol: &PathSolution) -> String {
    let mut out = String::new();
    for path in &sol.paths {
        let line: Vec<String> = path.iter().map(ToString::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
