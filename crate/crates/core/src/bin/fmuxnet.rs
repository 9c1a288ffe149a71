use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fmuxnet::flows::{enumerate_aggregation_trees, ScheduleSet, DEFAULT_TREE_LIMIT};
use fmuxnet::fmux::FmuxFunction;
use fmuxnet::graph::NetworkGraph;
use fmuxnet::harness::{
    analyze, sweep, verify, CapacityUnits, DetectorOverrides, ExperimentConfig, GraphSource, HarnessError,
    LambdaSpec, Model, Prepared, RunStats, ScheduleSource, StabilityVerdict, Suite, TreeSource,
};
use fmuxnet::wireless::{ArrivalLaw, Policy};

#[derive(Parser)]
#[command(name = "fmuxnet", version, about = "In-network computation of FMux functions: capacity analysis and simulation")]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Min-mincut, maximum refresh rate and an optimal tree packing.
    Analyze(AnalyzeArgs),
    /// Run one simulation and write its time series.
    Simulate(SimulateArgs),
    /// Run a (lambda, seed) grid from a config file.
    Sweep(SweepArgs),
    /// Run the built-in invariant suites.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FunctionName {
    Parity,
    Max,
    Kth,
}

#[derive(Args)]
struct FunctionArgs {
    #[arg(long, value_enum)]
    function: Option<FunctionName>,
    /// Rank for `kth`.
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 16)]
    alphabet_size: u32,
}

impl FunctionArgs {
    fn get(&self) -> Option<FmuxFunction> {
        self.function.map(|f| match f {
            FunctionName::Parity => FmuxFunction::Parity,
            FunctionName::Max => FmuxFunction::max(self.alphabet_size),
            FunctionName::Kth => FmuxFunction::kth(self.k, self.alphabet_size),
        })
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Schedule-set file; without it capacities are wired.
    #[arg(long)]
    schedules: Option<PathBuf>,
    /// `all` or a tree-list file.
    #[arg(long, default_value = "all")]
    trees: String,
    #[command(flatten)]
    function: FunctionArgs,
    /// Treat capacities as bits and divide by log2 |R(f)|.
    #[arg(long)]
    bits: bool,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Wireline,
    Wireless,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    GreedyMaxweight,
    StaticSss,
    SingleTree,
    FixedSplit,
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment config; other flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Schedule-set file, `wired` or `singletons`.
    #[arg(long)]
    schedules: Option<String>,
    /// `all`, `complete-depth2` or a tree-list file.
    #[arg(long)]
    trees: Option<String>,
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
    /// Tree weights for `fixed-split`, comma separated.
    #[arg(long, value_delimiter = ',')]
    weights: Vec<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[command(flatten)]
    function: FunctionArgs,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    sample_every: Option<f64>,
    /// Batch size for Bernoulli batch arrivals (wireless).
    #[arg(long)]
    batch: Option<u32>,
    #[arg(long)]
    allow_cyclic: bool,
    #[arg(long)]
    check_invariants: bool,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary JSON path; stderr when omitted.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Directory for per-point CSVs and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config's rates, comma separated.
    #[arg(long, value_delimiter = ',')]
    lambdas: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long)]
    horizon: Option<f64>,
    #[command(flatten)]
    function: FunctionArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Flows,
    Fmux,
    Wireline,
    Wireless,
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.cmd {
        Cmd::Analyze(a) => run_analyze(a),
        Cmd::Simulate(a) => run_simulate(a),
        Cmd::Sweep(a) => run_sweep(a),
        Cmd::Verify(a) => run_verify(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

type CliResult = Result<ExitCode, Box<dyn std::error::Error>>;

fn write_json(value: &impl Serialize, out: Option<&Path>) -> Result<(), Box<dyn std::error::Error>> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

fn tree_source(spec: &str) -> TreeSource {
    match spec {
        "all" => TreeSource::All { limit: DEFAULT_TREE_LIMIT },
        "complete-depth2" => TreeSource::CompleteDepth2,
        path => TreeSource::File { path: path.into() },
    }
}

fn schedule_source(spec: &str) -> ScheduleSource {
    match spec {
        "wired" => ScheduleSource::Wired,
        "singletons" => ScheduleSource::Singletons { rate: 1.0 },
        path => ScheduleSource::File { path: path.into() },
    }
}

fn run_analyze(a: AnalyzeArgs) -> CliResult {
    let g = NetworkGraph::load(&a.graph)?;
    let function = a.function.get().unwrap_or(FmuxFunction::Parity);
    let gamma = a.schedules.as_ref().map(|p| ScheduleSet::load(&g, p)).transpose()?;
    let trees = match a.trees.as_str() {
        "all" => enumerate_aggregation_trees(&g, DEFAULT_TREE_LIMIT)?,
        _ => tree_source(&a.trees).load(&g)?,
    };
    let bits = a.bits.then(|| function.bits_per_packet());
    let analysis = analyze(&g, gamma.as_ref(), &trees, bits)?;
    write_json(&analysis, a.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SimulateSummary {
    model: Model,
    policy: String,
    function: FmuxFunction,
    lambda: f64,
    seed: u64,
    horizon: f64,
    delta_star: f64,
    lambda_star: f64,
    #[serde(flatten)]
    stats: RunStats,
    /// Absent when the run is too short for the detector.
    stability: Option<StabilityVerdict>,
}

fn simulate_config(a: &SimulateArgs) -> Result<ExperimentConfig, HarnessError> {
    let mut cfg = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => {
            let graph = a.graph.clone().ok_or_else(|| HarnessError::Config("--graph or --config is required".into()))?;
            let model = a.model.ok_or_else(|| HarnessError::Config("--model or --config is required".into()))?;
            ExperimentConfig {
                graph: GraphSource::Path(graph),
                model: match model {
                    ModelArg::Wireline => Model::Wireline,
                    ModelArg::Wireless => Model::Wireless,
                },
                policy: Policy::GreedyMaxweight,
                schedules: ScheduleSource::default(),
                trees: TreeSource::default(),
                function: FmuxFunction::Parity,
                lambdas: LambdaSpec::List(Vec::new()),
                seeds: Vec::new(),
                horizon: 10_000.0,
                sample_every: 1.0,
                detector: DetectorOverrides::default(),
                capacity_units: CapacityUnits::Packets,
                bits_per_packet: None,
                arrivals: ArrivalLaw::Poisson,
                allow_cyclic: false,
                check_invariants: false,
            }
        }
    };
    if let Some(g) = &a.graph {
        cfg.graph = GraphSource::Path(g.clone());
    }
    if let Some(m) = a.model {
        cfg.model = match m {
            ModelArg::Wireline => Model::Wireline,
            ModelArg::Wireless => Model::Wireless,
        };
    }
    if let Some(s) = &a.schedules {
        cfg.schedules = schedule_source(s);
    }
    if let Some(t) = &a.trees {
        cfg.trees = tree_source(t);
    }
    if let Some(p) = a.policy {
        cfg.policy = match p {
            PolicyArg::GreedyMaxweight => Policy::GreedyMaxweight,
            PolicyArg::StaticSss => Policy::StaticSss,
            PolicyArg::SingleTree => Policy::SingleTree,
            PolicyArg::FixedSplit => Policy::FixedSplit { weights: a.weights.clone() },
        };
    }
    if let Some(f) = a.function.get() {
        cfg.function = f;
    }
    if let Some(h) = a.horizon {
        cfg.horizon = h;
    }
    if let Some(s) = a.sample_every {
        cfg.sample_every = s;
    }
    if let Some(batch) = a.batch {
        cfg.arrivals = ArrivalLaw::BernoulliBatch { batch };
    }
    cfg.allow_cyclic |= a.allow_cyclic;
    cfg.check_invariants |= a.check_invariants;
    Ok(cfg)
}

fn run_simulate(a: SimulateArgs) -> CliResult {
    let cfg = simulate_config(&a)?;
    let lambda = match (a.lambda, cfg.lambdas.values().first()) {
        (Some(l), _) => l,
        (None, Some(&l)) => l,
        (None, None) => return Err("--lambda is required".into()),
    };
    let prepared = Prepared::new(cfg)?;
    let run = prepared.run_point(lambda, a.seed)?;
    match &a.out {
        Some(p) => fs::write(p, &run.csv)?,
        None => io::stdout().write_all(&run.csv)?,
    }
    let c = &prepared.config;
    let summary = SimulateSummary {
        model: c.model,
        policy: c.policy_name().to_string(),
        function: c.function,
        lambda,
        seed: a.seed,
        horizon: c.horizon,
        delta_star: prepared.delta_star,
        lambda_star: prepared.lambda_star,
        stats: run.stats,
        stability: run.verdict,
    };
    match &a.summary {
        Some(p) => write_json(&summary, Some(p))?,
        None => eprintln!("{}", serde_json::to_string_pretty(&summary)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn run_sweep(a: SweepArgs) -> CliResult {
    let mut cfg = ExperimentConfig::load(&a.config)?;
    if !a.lambdas.is_empty() {
        cfg.lambdas = LambdaSpec::List(a.lambdas.clone());
    }
    if !a.seeds.is_empty() {
        cfg.seeds = a.seeds.clone();
    }
    if let Some(h) = a.horizon {
        cfg.horizon = h;
    }
    if let Some(f) = a.function.get() {
        cfg.function = f;
    }
    let summary = sweep(&cfg, a.out.as_deref())?;
    for l in &summary.lambdas {
        eprintln!("lambda {:<8} {:?} ({} stable, {} unstable)", l.lambda, l.verdict, l.stable_seeds, l.unstable_seeds);
    }
    eprintln!("lambda_hat = {:?}, lambda_star = {}", summary.lambda_hat, summary.lambda_star);
    write_json(&summary, None)?;
    Ok(ExitCode::SUCCESS)
}

fn run_verify(a: VerifyArgs) -> CliResult {
    let suite = match a.suite {
        SuiteArg::Flows => Suite::Flows,
        SuiteArg::Fmux => Suite::Fmux,
        SuiteArg::Wireline => Suite::Wireline,
        SuiteArg::Wireless => Suite::Wireless,
        SuiteArg::All => Suite::All,
    };
    let report = verify(suite);
    for c in &report.checks {
        eprintln!("{} {:?}/{}: {}", if c.passed { "PASS" } else { "FAIL" }, c.suite, c.name, c.detail);
    }
    write_json(&report, a.out.as_deref())?;
    Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
