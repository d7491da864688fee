//! Command-line front end for `randobdd`.
//!
//! Exit codes: 0 success, 2 usage, 3 input error, 4 internal invariant
//! violation.

use std::ffi::OsString;
use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use randobdd::graph::{
    decode_edges, encode_graph, parse_graph, random_density_graph, EncodedGraph, Format, Graph,
    GraphVars,
};
use randobdd::independence::{
    verify_eps_kwise_mc, verify_kwise_exact, Alg1Family, BiasedFamily, LayeredSampler, SeedFamily,
    SeededSampler, TupleSelection, MAX_EXACT_SEED_BITS,
};
use randobdd::matching::{maximal_matching_rm, verify_matching, RmConfig};
use randobdd::mis::{distributed_mis_sim_with, verify_mis, MisRule};
use randobdd::random::required_width;
use randobdd::{Error, ObddManager};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "randobdd",
    version,
    about = "Implicit randomized graph algorithms on OBDDs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Maximal matching of a graph file.
    Match(MatchArgs),
    /// Random graph from a layered random diagram.
    Gen(GenArgs),
    /// Distributed maximal independent set simulation.
    Mis(MisArgs),
    /// Check (almost) k-wise independence of a random function family.
    VerifyIndependence(IndependenceArgs),
    /// Sweep over graph sizes and densities, appending CSV rows.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Edgelist,
    Dimacs,
    Matrixmarket,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Edgelist => Format::EdgeList,
            FormatArg::Dimacs => Format::Dimacs,
            FormatArg::Matrixmarket => Format::MatrixMarket,
        }
    }
}

#[derive(Debug, Args)]
struct MatchArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "edgelist")]
    format: FormatArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    sparsify: bool,
    #[arg(long)]
    max_inner_iters: Option<usize>,
    /// Append the result row here instead of printing it.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Bits per node label; the graph has 2^n nodes.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    density: f64,
    #[arg(long, default_value_t = 146)]
    width: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RuleArg {
    Max,
    Min,
}

#[derive(Debug, Args)]
struct MisArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "edgelist")]
    format: FormatArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "max")]
    rule: RuleArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Alg1,
    Biased,
    Layered,
}

#[derive(Debug, Args)]
struct IndependenceArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    /// Tolerance of the sampled test; also the accuracy of the biased family.
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    /// Monte Carlo samples, used when the seed space is too large to enumerate.
    #[arg(long, default_value_t = 10_000)]
    samples: u64,
    /// Target probability of the biased and layered families.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 6)]
    min_n: usize,
    #[arg(long, default_value_t = 10)]
    max_n: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    densities: Vec<f64>,
    #[arg(long, default_value_t = 5)]
    reps: u64,
    #[arg(long, default_value_t = 146)]
    width: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    sparsify: bool,
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// One benchmark result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BenchRow {
    pub graph_id: String,
    pub n: usize,
    #[serde(rename = "N")]
    pub num_nodes: usize,
    #[serde(rename = "M")]
    pub num_edges: u64,
    /// 16 hex digits.
    pub seed: String,
    pub outer_iters: usize,
    pub inner_iters_total: usize,
    pub func_ops: u64,
    pub peak_live_nodes: usize,
    pub matching_size: usize,
    pub wall_time_ms: u64,
}

pub const BENCH_HEADER: &str = "graph_id,n,N,M,seed,outer_iters,inner_iters_total,func_ops,peak_live_nodes,matching_size,wall_time_ms";

#[derive(Debug)]
struct Failure {
    code: i32,
    error: anyhow::Error,
}

impl Failure {
    fn invariant(msg: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INVARIANT,
            error: anyhow!(msg.into()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::SeedSpaceTooLarge { .. } => EXIT_USAGE,
            Error::Parse { .. } | Error::Validation(_) | Error::Io(_) => EXIT_INPUT,
            Error::Obdd(_) | Error::InnerLoopCap { .. } => EXIT_INVARIANT,
        };
        Failure {
            code,
            error: e.into(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: EXIT_INPUT,
            error: e.into(),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure {
            code: EXIT_INPUT,
            error: e.into(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

trait WithContext<T> {
    fn ctx(self, what: impl FnOnce() -> String) -> CliResult<T>;
}

impl<T, E: Into<Failure>> WithContext<T> for Result<T, E> {
    fn ctx(self, what: impl FnOnce() -> String) -> CliResult<T> {
        self.map_err(|e| {
            let f = e.into();
            Failure {
                code: f.code,
                error: f.error.context(what()),
            }
        })
    }
}

/// Runs the command line `argv` (program name first), writing results to
/// `out` and diagnostics to stderr. Returns the exit code.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Match(a) => cmd_match(a, out),
        Command::Gen(a) => cmd_gen(a, out),
        Command::Mis(a) => cmd_mis(a, out),
        Command::VerifyIndependence(a) => cmd_independence(a, out),
        Command::Bench(a) => cmd_bench(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            f.code
        }
    }
}

fn load_graph(path: &Path, format: FormatArg) -> CliResult<Graph> {
    let parsed = parse_graph(path, format.into()).ctx(|| format!("reading {}", path.display()))?;
    Ok(parsed.graph)
}

fn encode(g: &Graph) -> CliResult<(ObddManager, EncodedGraph)> {
    let vars = GraphVars::for_nodes(g.num_nodes().max(1))?;
    let mut mgr = vars.manager()?;
    let eg = encode_graph(&mut mgr, &vars, g)?;
    Ok((mgr, eg))
}

/// Runs and verifies one matching.
fn bench_row(
    graph_id: &str,
    g: &Graph,
    mgr: &mut ObddManager,
    eg: &EncodedGraph,
    cfg: &RmConfig,
) -> CliResult<BenchRow> {
    let start = Instant::now();
    let r = maximal_matching_rm(mgr, eg, cfg).ctx(|| format!("matching {graph_id}"))?;
    let wall_time_ms = start.elapsed().as_millis() as u64;
    match verify_matching(g, &r.edges) {
        Ok((true, true)) => {}
        Ok(v) => {
            return Err(Failure::invariant(format!(
                "{graph_id}: result is not a maximal matching (matching, maximal) = {v:?}"
            )))
        }
        Err(e) => return Err(Failure::invariant(format!("{graph_id}: {e}"))),
    }
    Ok(BenchRow {
        graph_id: graph_id.to_string(),
        n: eg.vars.n,
        num_nodes: g.num_nodes(),
        num_edges: g.num_edges() as u64,
        seed: format!("{:016x}", cfg.seed),
        outer_iters: r.stats.outer_iterations,
        inner_iters_total: r.stats.inner_iterations_total,
        func_ops: r.stats.func_ops,
        peak_live_nodes: r.stats.peak_live_nodes,
        matching_size: r.edges.len(),
        wall_time_ms,
    })
}

/// Writes `rows` to `path` (appending, header only for a new or empty file)
/// or to `out`.
fn write_rows(rows: &[BenchRow], path: Option<&Path>, out: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(path) => {
            let fresh = std::fs::metadata(path)
                .map(|m| m.len() == 0)
                .unwrap_or(true);
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .ctx(|| format!("opening {}", path.display()))?;
            write_csv(rows, fresh, file)
        }
        None => write_csv(rows, true, out),
    }
}

fn write_csv<W: Write>(rows: &[BenchRow], header: bool, sink: W) -> CliResult<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(header)
        .from_writer(sink);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_match(a: MatchArgs, out: &mut dyn Write) -> CliResult<()> {
    let g = load_graph(&a.input, a.format)?;
    let (mut mgr, eg) = encode(&g)?;
    let cfg = RmConfig {
        sparsify: a.sparsify,
        max_inner_iterations: a.max_inner_iters,
        seed: a.seed,
        ..RmConfig::default()
    };
    let id = a
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "graph".into());
    let row = bench_row(&id, &g, &mut mgr, &eg, &cfg)?;
    log::info!(
        "{id}: matching of {} edges, verified maximal",
        row.matching_size
    );
    write_rows(&[row], a.csv.as_deref(), out)
}

fn cmd_gen(a: GenArgs, out: &mut dyn Write) -> CliResult<()> {
    let vars = GraphVars::new(a.n)?;
    let mut mgr = vars.manager()?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let eg = random_density_graph(&mut mgr, &vars, a.density, a.width, &mut rng)?;
    let g = Graph::from_edges(eg.num_nodes, decode_edges(&mgr, &eg)?)?;
    let text = g.to_edge_list();
    match a.out {
        Some(path) => std::fs::write(&path, text).ctx(|| format!("writing {}", path.display()))?,
        None => out.write_all(text.as_bytes())?,
    }
    log::info!("{} nodes, {} edges", g.num_nodes(), g.num_edges());
    Ok(())
}

fn cmd_mis(a: MisArgs, out: &mut dyn Write) -> CliResult<()> {
    let g = load_graph(&a.input, a.format)?;
    let rule = match a.rule {
        RuleArg::Max => MisRule::StrictMax,
        RuleArg::Min => MisRule::StrictMin,
    };
    let r = distributed_mis_sim_with(&g, a.seed, rule);
    let verdict = verify_mis(&g, &r.set);
    if verdict != (true, true) {
        return Err(Failure::invariant(format!(
            "not a maximal independent set: (independent, maximal) = {verdict:?}"
        )));
    }
    writeln!(
        out,
        "size={} rounds={} bits_per_node_round={:.4} channel_bits_mean={:.4} channel_bits_max={} seed={:016x}",
        r.set.len(),
        r.rounds,
        r.bits_per_node_round(),
        r.channel_bits_mean,
        r.channel_bits_max,
        r.seed
    )?;
    Ok(())
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn cmd_independence(a: IndependenceArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.n == 0 || a.n > 20 {
        return Err(Failure {
            code: EXIT_USAGE,
            error: anyhow!("--n must be in 1..=20"),
        });
    }
    let all = binomial(1 << a.n, a.k as u64) <= 20_000;
    let tuples = if all {
        TupleSelection::All
    } else {
        TupleSelection::Random { count: 1000 }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let report = match a.family {
        FamilyArg::Alg1 => {
            let f = Alg1Family { n: a.n };
            if all && f.seed_bits() <= MAX_EXACT_SEED_BITS {
                verify_kwise_exact(&f, a.k, &tuples)?
            } else {
                verify_eps_kwise_mc(&SeededSampler(f), a.k, a.eps, a.samples, &tuples, &mut rng)?
            }
        }
        FamilyArg::Biased => {
            let f = BiasedFamily::new(a.n, a.p, a.eps)?;
            if all && f.seed_bits() <= MAX_EXACT_SEED_BITS {
                verify_kwise_exact(&f, a.k, &tuples)?
            } else {
                verify_eps_kwise_mc(&SeededSampler(f), a.k, a.eps, a.samples, &tuples, &mut rng)?
            }
        }
        FamilyArg::Layered => {
            let w = required_width(a.n, a.k, a.eps);
            let s = LayeredSampler {
                n: a.n,
                w,
                p_sink: a.p,
            };
            verify_eps_kwise_mc(&s, a.k, a.eps, a.samples, &tuples, &mut rng)?
        }
    };
    writeln!(out, "{}", report.verdict)?;
    writeln!(out, "{report}")?;
    Ok(())
}

fn cmd_bench(a: BenchArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.min_n == 0 || a.min_n > a.max_n || a.max_n > 20 {
        return Err(Failure {
            code: EXIT_USAGE,
            error: anyhow!("need 1 <= --min-n <= --max-n <= 20"),
        });
    }
    let mut jobs = Vec::new();
    for n in a.min_n..=a.max_n {
        for &d in &a.densities {
            for rep in 0..a.reps {
                jobs.push((n, d, rep));
            }
        }
    }
    let rows: Vec<CliResult<BenchRow>> = jobs
        .par_iter()
        .enumerate()
        .map(|(j, &(n, d, rep))| {
            let job_seed = a.seed ^ (j as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
            let mut rng = ChaCha8Rng::seed_from_u64(job_seed);
            let vars = GraphVars::new(n)?;
            let mut mgr = vars.manager()?;
            let eg = random_density_graph(&mut mgr, &vars, d, a.width, &mut rng)?;
            let g = Graph::from_edges(eg.num_nodes, decode_edges(&mgr, &eg)?)?;
            let cfg = RmConfig {
                sparsify: a.sparsify,
                seed: job_seed,
                ..RmConfig::default()
            };
            bench_row(&format!("rd-n{n}-d{d}-r{rep}"), &g, &mut mgr, &eg, &cfg)
        })
        .collect();
    let rows: Vec<BenchRow> = rows.into_iter().collect::<CliResult<_>>()?;
    write_rows(&rows, a.csv.as_deref(), out)
}
