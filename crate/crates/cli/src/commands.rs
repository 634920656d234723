use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use bmcm_core::assignment::{self, AuctionOptions, RewardInstance};
use bmcm_core::auction::{self, level_cap};
use bmcm_core::experiment::{self, Algorithm, ExperimentSpec, PRule};
use bmcm_core::graph::{self, generate_bnp, GraphGenSpec};
use bmcm_core::parallel::{run_parallel_with, speedup_probe};
use bmcm_core::verify::{self, LevelSets};
use bmcm_core::{
    AuctionState, BipartiteGraph, MatchResult, ParallelConfig, SelectionPolicy, StepReport,
    Termination,
};
use log::info;
use serde::Serialize;

use crate::{
    AssignArgs, BenchArgs, Cli, Command, GenerateArgs, Policy, ProbeArgs, SolveAlgorithm,
    SolveArgs, VerifyArgs,
};

#[derive(Debug)]
pub enum Failure {
    /// Invalid or inconsistent flags.
    Usage(String),
    /// Unreadable or malformed input, or a failed write.
    Input(String),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Usage(_) => ExitCode::from(2),
            Failure::Input(_) => ExitCode::from(3),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Input(m) => f.write_str(m),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<bmcm_core::Error> for Failure {
    fn from(e: bmcm_core::Error) -> Self {
        use bmcm_core::Error as E;
        match e {
            E::InvalidParameter(_) | E::Domain(_) => Failure::Usage(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

type CmdResult = Result<ExitCode, Failure>;

pub fn dispatch(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Generate(args) => cmd_generate(cli, args),
        Command::Solve(args) => cmd_solve(cli, args),
        Command::Verify(args) => cmd_verify(cli, args),
        Command::Bench(args) => cmd_bench(cli, args),
        Command::Assign(args) => cmd_assign(args),
        Command::Probe(args) => cmd_probe(cli, args),
    }
}

/// Worker counts are capped by `BMCM_THREADS` when it is set.
fn cap_workers(q: usize) -> usize {
    match std::env::var("BMCM_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        Some(cap) if cap >= 1 => q.min(cap),
        _ => q,
    }
}

fn load_graph(path: &Path) -> Result<BipartiteGraph, Failure> {
    graph::read_graph(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string(value).map_err(|e| Failure::Input(e.to_string()))?;
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "{text}")?;
    Ok(())
}

fn cmd_generate(cli: &Cli, args: &GenerateArgs) -> CmdResult {
    let spec = GraphGenSpec::new(args.n, args.p, cli.seed)?;
    let g = generate_bnp(&spec);
    let text = graph::to_text(&g);
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    info!("generated n = {} with {} edges", g.n(), g.edge_count());
    Ok(ExitCode::SUCCESS)
}

/// JSON-lines step trace; the first write error is kept and reported at the end.
struct Trace {
    out: Option<BufWriter<File>>,
    error: Option<io::Error>,
}

impl Trace {
    fn open(path: Option<&Path>) -> Result<Self, Failure> {
        let out = match path {
            Some(p) => Some(BufWriter::new(File::create(p)?)),
            None => None,
        };
        Ok(Self { out, error: None })
    }

    fn record(&mut self, step: &StepReport) {
        if self.error.is_some() {
            return;
        }
        if let Some(out) = self.out.as_mut() {
            let line = serde_json::to_string(step).expect("step reports serialize");
            if let Err(e) = writeln!(out, "{line}") {
                self.error = Some(e);
            }
        }
    }

    fn finish(mut self) -> Result<(), Failure> {
        if let Some(e) = self.error.take() {
            return Err(e.into());
        }
        if let Some(out) = self.out.as_mut() {
            out.flush()?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct SolveOutput {
    cardinality: usize,
    #[serde(rename = "T")]
    t: u64,
    termination: Termination,
    #[serde(skip_serializing_if = "Option::is_none")]
    fallback: Option<bool>,
}

fn cmd_solve(cli: &Cli, args: &SolveArgs) -> CmdResult {
    if args.q == 0 {
        return Err(Failure::Usage("--q must be at least 1".into()));
    }
    if args.algorithm == SolveAlgorithm::Sparsified && args.sparsify_c.is_none() {
        return Err(Failure::Usage("--algorithm sparsified needs --sparsify-c".into()));
    }
    if args.algorithm == SolveAlgorithm::Parallel && args.policy != Policy::Fifo {
        return Err(Failure::Usage("the parallel solver only supports --policy fifo".into()));
    }
    let policy = match args.policy {
        Policy::Fifo => SelectionPolicy::Fifo,
        Policy::Lifo => SelectionPolicy::Lifo,
        Policy::Random => SelectionPolicy::Random { seed: cli.seed },
    };
    let g = load_graph(&args.input)?;
    let mut trace = Trace::open(cli.trace.as_deref())?;
    let mut observe = |step: &StepReport, _: &AuctionState<'_>| trace.record(step);

    let (result, fallback) = match args.algorithm {
        SolveAlgorithm::Sequential => (auction::run_with(&g, policy, &mut observe), None),
        SolveAlgorithm::Parallel => {
            let cfg = ParallelConfig::new(cap_workers(args.q))?;
            (run_parallel_with(&g, &cfg, &mut observe), None)
        }
        SolveAlgorithm::Sparsified => {
            let c = args.sparsify_c.expect("checked above");
            let sparse = match graph::sparsify(&g, c, cli.seed, None) {
                Ok(s) => s,
                Err(bmcm_core::Error::EmptyGraph) => g.clone(),
                Err(e) => return Err(e.into()),
            };
            info!("sparsified {} -> {} edges", g.edge_count(), sparse.edge_count());
            let first = auction::run_with(&sparse, policy, &mut observe);
            if first.termination == Termination::Perfect {
                (first, Some(false))
            } else {
                info!("sparsified graph gave {}; solving the dense graph", first.termination);
                (auction::run_with(&g, policy, &mut observe), Some(true))
            }
        }
    };
    trace.finish()?;

    print_json(&SolveOutput {
        cardinality: result.cardinality(),
        t: result.iterations,
        termination: result.termination,
        fallback,
    })?;
    Ok(ExitCode::SUCCESS)
}

/// Per-step invariant tallies gathered while the verified run is in progress.
#[derive(Default)]
struct StepChecks {
    iteration_sum: bool,
    monotone_levels: bool,
    eps_cs: bool,
    level_lemma: bool,
    path_length_lemma: bool,
    level_sets: bool,
    sampled: usize,
}

fn cmd_verify(cli: &Cli, args: &VerifyArgs) -> CmdResult {
    let g = load_graph(&args.input)?;
    let n = g.n();
    let stride = (n / 4).max(1) as u64;
    let mut trace = Trace::open(cli.trace.as_deref())?;

    let mut checks = StepChecks {
        iteration_sum: true,
        monotone_levels: true,
        eps_cs: true,
        level_lemma: true,
        path_length_lemma: true,
        level_sets: true,
        sampled: 0,
    };
    let mut previous_h = vec![0u32; n];
    let mut previous_sets = LevelSets::from_levels(&previous_h);

    let result: MatchResult = auction::run_with(&g, SelectionPolicy::Fifo, |step, state| {
        trace.record(step);
        let h = state.h();
        checks.iteration_sum &=
            state.iteration() == h.iter().map(|&x| u64::from(x)).sum::<u64>();
        checks.monotone_levels &= h.iter().zip(&previous_h).all(|(a, b)| a >= b);
        previous_h.copy_from_slice(h);
        checks.eps_cs &= state.check_eps_cs();
        let snap = state.snapshot();
        checks.level_lemma &= verify::check_level_lemma(&g, &snap);
        if step.iteration % stride == 0 {
            checks.sampled += 1;
            checks.path_length_lemma &= verify::check_path_length_lemma(&g, &snap);
            let sets = LevelSets::from_levels(h);
            checks.level_sets &= sets.is_nested() && previous_sets.is_subset_of(&sets);
            previous_sets = sets;
        }
    });
    trace.finish()?;

    let oracle = verify::hopcroft_karp(&g);
    let reference = verify::augmenting_path_matching(&g);
    let auction_perfect = result.termination == Termination::Perfect;
    let oracle_perfect = oracle.len() == n;

    let mut lines: Vec<(bool, String)> = vec![
        (checks.iteration_sum, "iteration_sum T = sum(h) after every step".into()),
        (checks.monotone_levels, "levels never decrease".into()),
        (checks.eps_cs, "eps_cs after every step".into()),
        (checks.level_lemma, "level_lemma after every step".into()),
        (
            checks.path_length_lemma,
            format!("path_length_lemma on {} sampled snapshots", checks.sampled),
        ),
        (checks.level_sets, "level_sets nested and growing over time".into()),
        (
            result.matching.validate(&g).is_ok(),
            "matching uses graph edges only".into(),
        ),
        (
            oracle.len() == reference.len(),
            format!(
                "oracles agree: hopcroft_karp {} = augmenting_path {}",
                oracle.len(),
                reference.len()
            ),
        ),
        (
            result.cardinality() <= oracle.len(),
            format!(
                "cardinality auction {} <= oracle {}",
                result.cardinality(),
                oracle.len()
            ),
        ),
        (
            auction_perfect == oracle_perfect,
            format!(
                "termination {} consistent with oracle (perfect matching exists: {})",
                result.termination, oracle_perfect
            ),
        ),
    ];
    if oracle_perfect {
        lines.push((
            result.iterations <= level_cap(n),
            format!("T = {} <= {}", result.iterations, level_cap(n)),
        ));
    }

    let mut stdout = io::stdout().lock();
    let mut all_pass = true;
    for (pass, label) in &lines {
        all_pass &= pass;
        writeln!(stdout, "{} {label}", if *pass { "PASS" } else { "FAIL" })?;
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn parse_p_rule(args: &BenchArgs) -> Result<PRule, Failure> {
    let bad = |s: &str| Failure::Usage(format!("cannot parse --p-rule {s:?}"));
    match (&args.p_rule, args.p) {
        (Some(_), Some(_)) => Err(Failure::Usage("give either --p or --p-rule, not both".into())),
        (None, None) => Err(Failure::Usage("one of --p or --p-rule is required".into())),
        (None, Some(p)) => Ok(PRule::Fixed(p)),
        (Some(rule), None) => {
            let (kind, value) = rule.split_once(':').ok_or_else(|| bad(rule))?;
            let value: f64 = value.parse().map_err(|_| bad(rule))?;
            match kind {
                "clogn" => Ok(PRule::CLogOverN(value)),
                "fixed" => Ok(PRule::Fixed(value)),
                _ => Err(bad(rule)),
            }
        }
    }
}

fn parse_algorithm(s: &str) -> Result<Algorithm, Failure> {
    let bad = || Failure::Usage(format!("cannot parse --algorithm {s:?}"));
    match s.split_once(':') {
        None if s == "sequential" => Ok(Algorithm::Sequential),
        Some(("parallel", q)) => Ok(Algorithm::Parallel(cap_workers(
            q.parse().map_err(|_| bad())?,
        ))),
        Some(("sparsified", c)) => Ok(Algorithm::Sparsified(c.parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

fn cmd_bench(cli: &Cli, args: &BenchArgs) -> CmdResult {
    let mut spec = ExperimentSpec::new(args.n.clone(), parse_p_rule(args)?, args.seeds);
    spec.base_seed = cli.seed;
    spec.algorithm = parse_algorithm(&args.algorithm)?;
    spec.oracle_check = args.oracle;
    spec.record_timing = !args.no_timing;
    spec.threads = cap_workers(args.threads);
    spec.validate()?;

    let report = experiment::run_experiment(&spec)?;
    info!("{} rows", report.rows.len());
    let summary = experiment::summarize(&report);
    let summary_text =
        serde_json::to_string_pretty(&summary).map_err(|e| Failure::Input(e.to_string()))?;

    match &args.out {
        Some(path) => {
            let file = BufWriter::new(File::create(path)?);
            report.write_csv(file)?;
            writeln!(io::stdout().lock(), "{summary_text}")?;
        }
        None => report.write_csv(io::stdout().lock())?,
    }
    if let Some(path) = &args.summary {
        std::fs::write(path, format!("{summary_text}\n"))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_assign(args: &AssignArgs) -> CmdResult {
    if let Some(eps) = args.epsilon {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Failure::Usage(format!("--epsilon {eps} must be positive")));
        }
    }
    let rows = assignment::read_rewards_csv(&args.input)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.input.display())))?;
    let epsilon = args.epsilon.unwrap_or(1.0 / (rows.len() as f64 + 1.0));
    let inst = RewardInstance::new(rows, epsilon).map_err(|e| Failure::Input(e.to_string()))?;
    let opts = AuctionOptions {
        restrict_positive: args.restrict_positive,
        max_iterations: None,
    };
    let result = assignment::auction_solve_with(&inst, opts, |_, _| {})?;
    print_json(&result)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_probe(cli: &Cli, args: &ProbeArgs) -> CmdResult {
    if args.q.contains(&0) {
        return Err(Failure::Usage("--q values must be at least 1".into()));
    }
    let g = generate_bnp(&GraphGenSpec::new(args.n, args.p, cli.seed)?);
    let q_list: Vec<usize> = args.q.iter().map(|&q| cap_workers(q)).collect();
    let rows = speedup_probe(&g, &q_list)?;
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "q,wall_time_ns")?;
    for row in rows {
        writeln!(stdout, "{},{}", row.q, row.wall_time_ns)?;
    }
    Ok(ExitCode::SUCCESS)
}
