//! Command-line surface of the `hyperroute` binary.
//!
//! Exit codes: 0 success, 1 verification failure, 2 algorithmic failure
//! (iteration bound, oracle or invariant failure), 3 input error.
//!
//! Any command run with `--manifest FILE` records its arguments, input and
//! output digests in a JSON [`RunManifest`]; `replay FILE` re-runs it and
//! compares the outputs byte for byte.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::engine::{self, trace, EngineConfig, EngineError};
use crate::format;
use crate::graph::{conductance_exact, generate, Family, MultiGraph, DEFAULT_CONDUCTANCE_CAP};
use crate::halflayer::{HalfLayerOracleSpec, OracleKind};
use crate::hypergraph::{is_perfect_matching, verify_strong_haxell, ExactCaps};
use crate::routing::{route_with_stats, verify_solution, HypothesisReport, RoutingError, RoutingInstance};
use crate::splitting::{split, verify_split, SplitError, SplitParams, Template};
use crate::{EdgeId, Rational};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_ALGORITHM: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hyperroute",
    version,
    about = "Edge-disjoint short paths via hypergraph matching"
)]
pub struct Cli {
    /// Record a JSON run manifest at this path.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a graph.
    Gen(GenArgs),
    /// Perfect matching of a hypergraph file.
    Match(MatchArgs),
    /// Route demands on edge-disjoint short paths.
    Route(RouteArgs),
    /// Split a graph into k edge-disjoint expanders.
    Split(SplitArgs),
    /// Check a solution file.
    Verify(VerifyArgs),
    /// Check split part files.
    VerifySplit(VerifySplitArgs),
    /// Time routing over a grid of generated instances.
    Bench(BenchArgs),
    /// Re-run a manifest and compare outputs.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    Complete,
    Hypercube,
    RandomRegular,
    RingOfCliques,
}

impl FamilyName {
    fn label(self) -> &'static str {
        match self {
            FamilyName::Complete => "complete",
            FamilyName::Hypercube => "hypercube",
            FamilyName::RandomRegular => "random-regular",
            FamilyName::RingOfCliques => "ring-of-cliques",
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: FamilyName,
    /// Vertex count (clique size for ring-of-cliques).
    #[arg(long)]
    pub n: usize,
    /// Degree for random-regular.
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Number of cliques for ring-of-cliques.
    #[arg(long, default_value_t = 3)]
    pub cliques: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct EngineArgs {
    /// Half-layer degree cap.
    #[arg(long)]
    pub delta: Option<usize>,
    /// Collapse threshold as `p/q`.
    #[arg(long, default_value = "1/10")]
    pub mu: String,
    /// Main-loop iteration cap.
    #[arg(long)]
    pub cap: Option<u64>,
    /// Re-validate the forest every iteration.
    #[arg(long)]
    pub strict: bool,
    /// Write one trace line per iteration to this file.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MatchOracle {
    Greedy,
    Throttled,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "greedy")]
    pub oracle: MatchOracle,
    /// Kept fraction for the throttled oracle, `p/q`.
    #[arg(long, default_value = "1/2")]
    pub throttle: String,
    /// Only offer edges of rank at most this.
    #[arg(long)]
    pub rank_limit: Option<usize>,
    /// Check the strong Haxell condition at this `φ` first.
    #[arg(long)]
    pub verify_haxell: Option<String>,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphOracleName {
    Bfs,
    BlockingFlow,
}

impl GraphOracleName {
    fn kind(self) -> OracleKind {
        match self {
            GraphOracleName::Bfs => OracleKind::GraphBfs,
            GraphOracleName::BlockingFlow => OracleKind::GraphBlockingFlow,
        }
    }

    fn label(self) -> &'static str {
        match self {
            GraphOracleName::Bfs => "bfs",
            GraphOracleName::BlockingFlow => "blocking-flow",
        }
    }
}

#[derive(Debug, Args, Clone)]
pub struct PathArgs {
    #[arg(long, value_enum, default_value = "bfs")]
    pub oracle: GraphOracleName,
    /// Use `--r` and `--delta` instead of the default parameters.
    #[arg(long)]
    pub relaxed: bool,
    /// Maximum path length (relaxed mode).
    #[arg(long)]
    pub r: Option<usize>,
    /// Graph conductance `p/q`; computed exactly when absent.
    #[arg(long)]
    pub phi: Option<String>,
}

#[derive(Debug, Args)]
pub struct RouteArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub demands: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub path: PathArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub k: usize,
    /// Template graph file; a generated template when absent.
    #[arg(long)]
    pub template: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "random-regular")]
    pub template_family: FamilyName,
    #[arg(long, default_value_t = 3)]
    pub template_d: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for `part_<i>.txt` files.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub path: PathArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub demands: PathBuf,
    #[arg(long)]
    pub solution: PathBuf,
    /// Length bound; `n − 1` when absent.
    #[arg(long)]
    pub r: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifySplitArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Part graph files.
    #[arg(long, num_args = 1.., required = true)]
    pub parts: Vec<PathBuf>,
    /// Constant in `Φ(G_i) ≥ c · Φ(G)² / log₂ n`.
    #[arg(long, default_value = "1/200")]
    pub c: String,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["complete", "hypercube"])]
    pub families: Vec<FamilyName>,
    #[arg(long, value_delimiter = ',', default_values = ["8", "16"])]
    pub sizes: Vec<usize>,
    /// Demand rounds; every vertex is in at most `k` demands.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["bfs", "blocking-flow"])]
    pub oracles: Vec<GraphOracleName>,
    #[arg(long, default_value_t = 3)]
    pub r: usize,
    #[arg(long, default_value_t = 2)]
    pub delta: usize,
    #[arg(long)]
    pub cap: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(id = "recorded", value_name = "MANIFEST")]
    pub manifest: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    /// CSV columns blanked before hashing (timings).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub masked_columns: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, without `--manifest`.
    pub args: Vec<String>,
    pub inputs: Vec<FileDigest>,
    pub seed: Option<u64>,
    pub overrides: BTreeMap<String, String>,
    pub outputs: Vec<FileDigest>,
    pub stdout_sha256: String,
    pub wall_ms: u128,
    pub status: String,
    pub exit_code: i32,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn verify(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_VERIFY,
            message: message.into(),
        }
    }

    fn algorithm(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_ALGORITHM,
            message: message.into(),
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Config(_) | EngineError::InvalidHypergraph(_) => Failure::input(e.to_string()),
            _ => Failure::algorithm(e.to_string()),
        }
    }
}

impl From<RoutingError> for Failure {
    fn from(e: RoutingError) -> Self {
        match e {
            RoutingError::Invalid(_) => Failure::input(e.to_string()),
            RoutingError::Engine(inner) => inner.into(),
            _ => Failure::algorithm(e.to_string()),
        }
    }
}

impl From<SplitError> for Failure {
    fn from(e: SplitError) -> Self {
        match e {
            SplitError::Routing(inner) => inner.into(),
            other => Failure::input(other.to_string()),
        }
    }
}

/// Per-run bookkeeping: stdout text and the files read and written.
#[derive(Default)]
struct Run {
    stdout: String,
    stderr: String,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    seed: Option<u64>,
    overrides: BTreeMap<String, String>,
    /// CSV columns blanked when hashing stdout.
    stdout_mask: Vec<usize>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn mask_columns(text: &str, columns: &[usize]) -> String {
    let mut out = String::new();
    for line in text.lines() {
        let fields: Vec<&str> = line
            .split(',')
            .enumerate()
            .map(|(i, f)| if columns.contains(&i) { "" } else { f })
            .collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

fn stdout_digest(run: &Run) -> String {
    if run.stdout_mask.is_empty() {
        sha256_hex(run.stdout.as_bytes())
    } else {
        sha256_hex(mask_columns(&run.stdout, &run.stdout_mask).as_bytes())
    }
}

fn digest(path: &Path, contents: &str, masked_columns: Vec<usize>) -> FileDigest {
    let hashed = if masked_columns.is_empty() {
        sha256_hex(contents.as_bytes())
    } else {
        sha256_hex(mask_columns(contents, &masked_columns).as_bytes())
    };
    FileDigest {
        path: path.display().to_string(),
        sha256: hashed,
        masked_columns,
    }
}

impl Run {
    fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let text =
            fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        self.inputs.push(digest(path, &text, Vec::new()));
        Ok(text)
    }

    fn write(&mut self, path: &Path, contents: &str, masked: Vec<usize>) -> Result<(), Failure> {
        fs::write(path, contents).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
        self.outputs.push(digest(path, contents, masked));
        Ok(())
    }

    /// Writes to `path`, or to stdout when absent.
    fn emit(&mut self, path: Option<&Path>, contents: &str) -> Result<(), Failure> {
        match path {
            Some(p) => self.write(p, contents, Vec::new()),
            None => {
                self.stdout.push_str(contents);
                Ok(())
            }
        }
    }

    fn note(&mut self, line: impl AsRef<str>) {
        self.stderr.push_str(line.as_ref());
        self.stderr.push('\n');
    }

    fn set(&mut self, key: &str, value: impl ToString) {
        self.overrides.insert(key.to_string(), value.to_string());
    }
}

fn parse_rational(text: &str, what: &str) -> Result<Rational, Failure> {
    let bad = || Failure::input(format!("{what}: expected p or p/q, got {text:?}"));
    let (p, q) = match text.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (text.trim(), "1"),
    };
    let p: u64 = p.parse().map_err(|_| bad())?;
    let q: u64 = q.parse().map_err(|_| bad())?;
    if q == 0 {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

fn parse_file<T>(
    run: &mut Run,
    path: &Path,
    parse: impl Fn(&str) -> Result<T, format::ParseError>,
) -> Result<T, Failure> {
    let text = run.read(path)?;
    parse(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn engine_config(
    run: &mut Run,
    args: &EngineArgs,
    oracle: HalfLayerOracleSpec,
) -> Result<EngineConfig, Failure> {
    let mut cfg = EngineConfig {
        mu: parse_rational(&args.mu, "--mu")?,
        iteration_cap: args.cap,
        oracle,
        strict: args.strict,
        trace: args.trace.is_some(),
        ..EngineConfig::default()
    };
    if let Some(d) = args.delta {
        cfg.delta = d;
        run.set("delta", d);
    }
    if let Some(c) = args.cap {
        run.set("cap", c);
    }
    run.set("mu", cfg.mu);
    cfg.check()?;
    Ok(cfg)
}

fn write_trace(run: &mut Run, args: &EngineArgs, lines: &[engine::TraceLine]) -> Result<(), Failure> {
    if let Some(path) = &args.trace {
        run.write(path, &trace::render(lines), Vec::new())?;
    }
    Ok(())
}

fn family(name: FamilyName, n: usize, d: usize, cliques: usize, seed: u64) -> Family {
    match name {
        FamilyName::Complete => Family::Complete { n },
        FamilyName::Hypercube => Family::Hypercube { n },
        FamilyName::RandomRegular => Family::RandomRegular { n, d, seed },
        FamilyName::RingOfCliques => Family::RingOfCliques { cliques, size: n },
    }
}

fn cmd_gen(run: &mut Run, a: &GenArgs) -> Result<(), Failure> {
    run.seed = Some(a.seed);
    let g =
        generate(family(a.family, a.n, a.d, a.cliques, a.seed)).map_err(|e| Failure::input(e.to_string()))?;
    run.emit(a.out.as_deref(), &format::write_graph(&g))
}

fn cmd_match(run: &mut Run, a: &MatchArgs) -> Result<(), Failure> {
    let h = parse_file(run, &a.input, format::parse_hypergraph)?;
    if let Some(phi) = &a.verify_haxell {
        let phi = parse_rational(phi, "--verify-haxell")?;
        let verdict = match verify_strong_haxell(&h, phi, &ExactCaps::default()) {
            Ok(true) => "holds".to_string(),
            Ok(false) => "fails".to_string(),
            Err(e) => format!("not checked ({e})"),
        };
        run.stdout
            .push_str(&format!("strong Haxell condition at phi = {phi}: {verdict}\n"));
    }
    let kind = match a.oracle {
        MatchOracle::Greedy => OracleKind::ExplicitGreedy,
        MatchOracle::Throttled => OracleKind::ThrottledTest {
            fraction: parse_rational(&a.throttle, "--throttle")?,
        },
    };
    let mut spec = HalfLayerOracleSpec::new(kind);
    spec.rank_limit = a.rank_limit;
    let cfg = engine_config(run, &a.engine, spec)?;
    let out = engine::run_explicit(&h, &cfg);
    let out = out?;
    write_trace(run, &a.engine, &out.trace)?;
    let m = out.matching.iter().copied().collect();
    if !is_perfect_matching(&h, &m).unwrap_or(false) {
        return Err(Failure::algorithm("engine returned a non-perfect matching"));
    }
    run.note(format!(
        "matched {} vertices in {} iterations",
        out.matching.len(),
        out.stats.iterations
    ));
    run.emit(a.out.as_deref(), &format::write_matching(&out.matching))
}

fn routing_instance(
    run: &mut Run,
    g: MultiGraph,
    demands: Vec<(usize, usize)>,
    path: &PathArgs,
    delta: Option<usize>,
) -> Result<(RoutingInstance, Option<Rational>), Failure> {
    let phi = match &path.phi {
        Some(p) => Some(parse_rational(p, "--phi")?),
        None if g.num_vertices() >= 2 && g.num_vertices() <= DEFAULT_CONDUCTANCE_CAP => Some(
            conductance_exact(&g, DEFAULT_CONDUCTANCE_CAP)
                .map_err(|e| Failure::input(e.to_string()))?
                .0,
        ),
        None => None,
    };
    let inst = if path.relaxed {
        let (Some(r), Some(delta)) = (path.r, delta) else {
            return Err(Failure::input("--relaxed needs --r and --delta"));
        };
        run.set("r", r);
        RoutingInstance::relaxed(g, demands, r, delta)?
    } else {
        let Some(phi) = phi else {
            return Err(Failure::input(
                "graph too large for exact conductance; pass --phi or --relaxed",
            ));
        };
        let mut inst = RoutingInstance::with_defaults(g, demands, phi)?;
        if let Some(d) = delta {
            inst.delta = d;
        }
        inst
    };
    run.set("oracle", path.oracle.label());
    Ok((inst, phi))
}

fn cmd_route(run: &mut Run, a: &RouteArgs) -> Result<(), Failure> {
    let g = parse_file(run, &a.graph, format::parse_graph)?;
    let demands = parse_file(run, &a.demands, format::parse_demands)?;
    let (inst, phi) = routing_instance(run, g, demands, &a.path, a.engine.delta)?;
    let cfg = engine_config(run, &a.engine, HalfLayerOracleSpec::new(a.path.oracle.kind()))?;
    let report = phi.map(|p| HypothesisReport::new(&inst, p).to_string());
    if let Some(r) = &report {
        run.note(r);
    }
    match route_with_stats(&inst, &cfg) {
        Ok(out) => {
            write_trace(run, &a.engine, &out.trace)?;
            run.note(format!(
                "routed {} demands, r = {}, delta = {}, {} iterations",
                inst.demands.len(),
                inst.r,
                inst.delta,
                out.engine.iterations
            ));
            run.emit(a.out.as_deref(), &format::write_solution(&out.solution))
        }
        Err(e) => {
            let mut f: Failure = e.into();
            if let Some(r) = report {
                f.message = format!("{}\n{r}", f.message);
            }
            Err(f)
        }
    }
}

fn cmd_split(run: &mut Run, a: &SplitArgs) -> Result<(), Failure> {
    run.seed = Some(a.seed);
    let g = parse_file(run, &a.graph, format::parse_graph)?;
    let template = match &a.template {
        Some(p) => Template::Graph(parse_file(run, p, format::parse_graph)?),
        None => Template::Generated(family(
            a.template_family,
            g.num_vertices(),
            a.template_d,
            1,
            a.seed,
        )),
    };
    let params = if a.path.relaxed {
        let (Some(r), Some(delta)) = (a.path.r, a.engine.delta) else {
            return Err(Failure::input("--relaxed needs --r and --delta"));
        };
        run.set("r", r);
        SplitParams::Relaxed { r, delta }
    } else {
        SplitParams::Defaults
    };
    let cfg = engine_config(run, &a.engine, HalfLayerOracleSpec::new(a.path.oracle.kind()))?;
    let res = split(&g, a.k, &template, params, &cfg, DEFAULT_CONDUCTANCE_CAP)?;
    fs::create_dir_all(&a.out_dir).map_err(|e| Failure::input(format!("{}: {e}", a.out_dir.display())))?;
    for (i, part) in res.parts.iter().enumerate() {
        let sub = g
            .edge_subgraph(part)
            .map_err(|e| Failure::algorithm(e.to_string()))?;
        run.write(
            &a.out_dir.join(format!("part_{i}.txt")),
            &format::write_graph(&sub),
            Vec::new(),
        )?;
    }
    let summary: String = res.summary_lines().iter().map(|l| format!("{l}\n")).collect();
    run.stdout.push_str(&summary);
    Ok(())
}

fn cmd_verify(run: &mut Run, a: &VerifyArgs) -> Result<(), Failure> {
    let g = parse_file(run, &a.graph, format::parse_graph)?;
    let demands = parse_file(run, &a.demands, format::parse_demands)?;
    let sol = parse_file(run, &a.solution, format::parse_solution)?;
    let r = a.r.unwrap_or(g.num_vertices().saturating_sub(1).max(1));
    let inst = RoutingInstance::relaxed(g, demands, r, 1)?;
    verify_solution(&inst, &sol).map_err(|v| Failure::verify(v.to_string()))?;
    run.stdout.push_str("ok\n");
    Ok(())
}

/// Maps each part's vertex pairs to edge ids of `g`, taking the lowest id
/// of the pair not yet used by any part. Pairs absent from `g`, or used
/// more often than `g` has them, get ids that the checker rejects.
fn part_edge_ids(g: &MultiGraph, parts: &[MultiGraph]) -> Vec<Vec<EdgeId>> {
    let mut taken = vec![false; g.num_edges()];
    parts
        .iter()
        .map(|p| {
            p.edges()
                .iter()
                .map(|&(u, v)| {
                    if u >= g.num_vertices() || v >= g.num_vertices() {
                        return g.num_edges();
                    }
                    let ids: Vec<EdgeId> = g
                        .neighbors(u)
                        .iter()
                        .filter(|&&(w, _)| w == v)
                        .map(|&(_, e)| e)
                        .collect();
                    match ids.iter().find(|&&e| !taken[e]) {
                        Some(&e) => {
                            taken[e] = true;
                            e
                        }
                        None => ids.first().copied().unwrap_or(g.num_edges()),
                    }
                })
                .collect()
        })
        .collect()
}

fn cmd_verify_split(run: &mut Run, a: &VerifySplitArgs) -> Result<(), Failure> {
    let g = parse_file(run, &a.graph, format::parse_graph)?;
    let c = parse_rational(&a.c, "--c")?;
    let mut parts = Vec::new();
    for p in &a.parts {
        let part = parse_file(run, p, format::parse_graph)?;
        if part.num_vertices() != g.num_vertices() {
            return Err(Failure::input(format!(
                "{}: vertex count differs from the graph",
                p.display()
            )));
        }
        parts.push(part);
    }
    let ids = part_edge_ids(&g, &parts);
    let report =
        verify_split(&g, &ids, c, DEFAULT_CONDUCTANCE_CAP).map_err(|e| Failure::input(e.to_string()))?;
    run.stdout.push_str(&report.to_string());
    if report.ok() {
        Ok(())
    } else {
        Err(Failure::verify(format!("{} split issue(s)", report.issues.len())))
    }
}

#[derive(Debug, Serialize)]
struct BenchRow {
    family: &'static str,
    n: usize,
    k: usize,
    oracle: &'static str,
    iters: u64,
    wall_ms: u128,
    status: String,
}

/// `k` rounds of a random pairing of the vertices.
fn bench_demands(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for _ in 0..k {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        out.extend(perm.chunks_exact(2).map(|c| (c[0], c[1])));
    }
    out
}

fn cmd_bench(run: &mut Run, a: &BenchArgs) -> Result<(), Failure> {
    run.seed = Some(a.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut csv = csv::Writer::from_writer(Vec::new());
    for &fam in &a.families {
        for &n in &a.sizes {
            let graph = generate(family(fam, n, 3, 3, a.seed));
            let demands = bench_demands(graph.as_ref().map_or(0, |g| g.num_vertices()), a.k, &mut rng);
            for &oracle in &a.oracles {
                let started = Instant::now();
                let (iters, status, depth) = match &graph {
                    Err(e) => (0, format!("input-error: {e}"), 0),
                    Ok(g) => {
                        let cfg = EngineConfig {
                            iteration_cap: a.cap,
                            oracle: HalfLayerOracleSpec::new(oracle.kind()),
                            ..EngineConfig::default()
                        };
                        match RoutingInstance::relaxed(g.clone(), demands.clone(), a.r, a.delta)
                            .and_then(|inst| route_with_stats(&inst, &cfg))
                        {
                            Ok(out) => (out.engine.iterations, "ok".to_string(), out.engine.max_depth),
                            Err(RoutingError::Stalled(EngineError::NoProgress { iterations, .. })) => {
                                (iterations, "stalled".to_string(), 0)
                            }
                            Err(e) => (0, format!("error: {e}"), 0),
                        }
                    }
                };
                let wall_ms = started.elapsed().as_millis();
                run.note(format!(
                    "{} n={n} {}: signature length {}",
                    fam.label(),
                    oracle.label(),
                    depth + 1
                ));
                csv.serialize(BenchRow {
                    family: fam.label(),
                    n,
                    k: a.k,
                    oracle: oracle.label(),
                    iters,
                    wall_ms,
                    status: status.replace(',', ";"),
                })
                .map_err(|e| Failure::input(e.to_string()))?;
            }
        }
    }
    let bytes = csv.into_inner().map_err(|e| Failure::input(e.to_string()))?;
    let text = String::from_utf8(bytes).map_err(|e| Failure::input(e.to_string()))?;
    match &a.out {
        Some(p) => run.write(p, &text, vec![5]),
        None => {
            run.stdout.push_str(&text);
            run.stdout_mask = vec![5];
            Ok(())
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Gen(_) => "gen",
        Command::Match(_) => "match",
        Command::Route(_) => "route",
        Command::Split(_) => "split",
        Command::Verify(_) => "verify",
        Command::VerifySplit(_) => "verify-split",
        Command::Bench(_) => "bench",
        Command::Replay(_) => "replay",
    }
}

fn dispatch(run: &mut Run, c: &Command) -> Result<(), Failure> {
    match c {
        Command::Gen(a) => cmd_gen(run, a),
        Command::Match(a) => cmd_match(run, a),
        Command::Route(a) => cmd_route(run, a),
        Command::Split(a) => cmd_split(run, a),
        Command::Verify(a) => cmd_verify(run, a),
        Command::VerifySplit(a) => cmd_verify_split(run, a),
        Command::Bench(a) => cmd_bench(run, a),
        Command::Replay(a) => cmd_replay(run, a),
    }
}

/// Drops `--manifest X` / `--manifest=X` from an argument list.
fn strip_manifest(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
        } else if a == "--manifest" {
            skip = true;
        } else if !a.starts_with("--manifest=") {
            out.push(a.clone());
        }
    }
    out
}

fn cmd_replay(run: &mut Run, a: &ReplayArgs) -> Result<(), Failure> {
    let text = run.read(&a.manifest)?;
    let m: RunManifest =
        serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", a.manifest.display())))?;
    if m.command == "replay" {
        return Err(Failure::input("cannot replay a replay"));
    }
    let mut argv = vec![OsString::from("hyperroute")];
    argv.extend(m.args.iter().map(OsString::from));
    let cli = Cli::try_parse_from(argv).map_err(|e| Failure::input(e.to_string()))?;
    let mut inner = Run::default();
    let result = dispatch(&mut inner, &cli.command);
    let code = result.as_ref().err().map_or(EXIT_OK, |f| f.code);
    let mut diffs = Vec::new();
    if code != m.exit_code {
        diffs.push(format!("exit code {code} != recorded {}", m.exit_code));
    }
    if stdout_digest(&inner) != m.stdout_sha256 {
        diffs.push("stdout differs".to_string());
    }
    for want in &m.outputs {
        match inner.outputs.iter().find(|o| o.path == want.path) {
            Some(got) if got.sha256 == want.sha256 => {}
            Some(_) => diffs.push(format!("{} differs", want.path)),
            None => diffs.push(format!("{} not written", want.path)),
        }
    }
    if diffs.is_empty() {
        run.stdout
            .push_str(&format!("replay identical: {} output(s)\n", m.outputs.len()));
        Ok(())
    } else {
        Err(Failure::verify(diffs.join("\n")))
    }
}

/// Runs the CLI on `args` (program name first), writing to the given
/// streams. Returns the exit code.
pub fn run_with_io(args: Vec<OsString>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_INPUT
                }
            };
        }
    };
    let started = Instant::now();
    let mut run = Run::default();
    let result = dispatch(&mut run, &cli.command);
    let code = result.as_ref().err().map_or(EXIT_OK, |f| f.code);
    let _ = stdout.write_all(run.stdout.as_bytes());
    let _ = stderr.write_all(run.stderr.as_bytes());
    if let Err(f) = &result {
        let _ = writeln!(stderr, "error: {}", f.message);
    }
    if let Some(path) = &cli.manifest {
        let raw: Vec<String> = args
            .iter()
            .skip(1)
            .map(|a| a.to_string_lossy().into_owned())
            .collect();
        let stdout_sha256 = stdout_digest(&run);
        let manifest = RunManifest {
            command: command_name(&cli.command).to_string(),
            args: strip_manifest(&raw),
            inputs: run.inputs,
            seed: run.seed,
            overrides: run.overrides,
            outputs: run.outputs,
            stdout_sha256,
            wall_ms: started.elapsed().as_millis(),
            status: match &result {
                Ok(()) => "ok".to_string(),
                Err(f) => f.message.lines().next().unwrap_or("").to_string(),
            },
            exit_code: code,
        };
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        if let Err(e) = fs::write(path, json + "\n") {
            let _ = writeln!(stderr, "error: {}: {e}", path.display());
            return if code == EXIT_OK { EXIT_INPUT } else { code };
        }
    }
    code
}

pub fn run(args: Vec<OsString>) -> i32 {
    run_with_io(args, &mut std::io::stdout(), &mut std::io::stderr())
}
