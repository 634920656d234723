//! `bmcm`: generate random bipartite graphs, solve them with the auction, verify the
//! solver's invariants and run scaling experiments.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 invalid flags, 3 unreadable or
//! invalid input and other I/O failures.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bmcm", version, about = "Auction-based bipartite maximum-cardinality matching")]
struct Cli {
    /// Seed for every random choice made by the subcommand.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Suppress informational logging on stderr.
    #[arg(long, global = true)]
    quiet: bool,

    /// Write one JSON record per auction step to this file.
    #[arg(long, global = true, value_name = "PATH")]
    trace: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a B(n, p) graph and write it in the bmcm text format.
    Generate(GenerateArgs),
    /// Solve a graph file and print {cardinality, T, termination} as JSON.
    Solve(SolveArgs),
    /// Run the auction with per-step invariant checks and compare against Hopcroft-Karp.
    Verify(VerifyArgs),
    /// Sweep n and seeds, write per-instance CSV and print a JSON summary.
    Bench(BenchArgs),
    /// Solve a dense assignment problem read from CSV with the epsilon-auction.
    Assign(AssignArgs),
    /// Time the parallel solver for several worker counts; prints CSV (q,wall_time_ns).
    Probe(ProbeArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolveAlgorithm {
    Sequential,
    Parallel,
    Sparsified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Policy {
    Fifo,
    Lifo,
    Random,
}

#[derive(Debug, Args)]
struct SolveArgs {
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = SolveAlgorithm::Sequential)]
    algorithm: SolveAlgorithm,
    /// Worker count for the parallel algorithm.
    #[arg(long, default_value_t = 1)]
    q: usize,
    /// Sparsification constant c for the sparsified algorithm.
    #[arg(long)]
    sparsify_c: Option<f64>,
    /// Free-vertex selection order (sequential and sparsified only).
    #[arg(long, value_enum, default_value_t = Policy::Fifo)]
    policy: Policy,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    input: PathBuf,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated list of n values.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// `clogn:<c>` for p = c ln(n)/n, or `fixed:<p>`.
    #[arg(long)]
    p_rule: Option<String>,
    /// Shorthand for `--p-rule fixed:<p>`.
    #[arg(long)]
    p: Option<f64>,
    /// Instances per n.
    #[arg(long, default_value_t = 1)]
    seeds: usize,
    /// `sequential`, `parallel:<q>` or `sparsified:<c>`.
    #[arg(long, default_value = "sequential")]
    algorithm: String,
    /// Record the Hopcroft-Karp cardinality of every instance.
    #[arg(long)]
    oracle: bool,
    /// CSV output path; the CSV goes to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the JSON summary to this file.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Write wall_ns as 0 so repeated runs are byte-identical.
    #[arg(long)]
    no_timing: bool,
    /// Instances solved concurrently.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Debug, Args)]
struct AssignArgs {
    input: PathBuf,
    /// Bid slack; defaults to 1/(N+1), which is exact for integer rewards.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Only bid on objects with positive reward.
    #[arg(long)]
    restrict_positive: bool,
}

#[derive(Debug, Args)]
struct ProbeArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
    q: Vec<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(if cli.quiet {
            log::LevelFilter::Error
        } else {
            log::LevelFilter::Info
        })
        .parse_env("BMCM_LOG")
        .target(env_logger::Target::Stderr)
        .init();

    match commands::dispatch(&cli) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {failure}");
            failure.exit_code()
        }
    }
}
