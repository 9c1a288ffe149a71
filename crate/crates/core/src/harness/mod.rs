//! Experiment plumbing: configuration, lambda sweeps, stability verdicts and
//! the verification suites.

mod analysis;
mod stability;
mod verify;

use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use analysis::{analyze, Analysis, PackingRecord};
pub use stability::{detect_stability, DetectorParams, StabilityVerdict, Verdict};
pub use verify::{verify, CheckResult, Suite, VerifyReport};

use crate::flows::{
    complete_graph_depth2_trees, enumerate_aggregation_trees, min_mincut, optimal_sss, AggregationTree, FlowError,
    RateVector, ScheduleFile, ScheduleRecord, ScheduleSet, TreeRecord, DEFAULT_TREE_LIMIT,
};
use crate::fmux::FmuxFunction;
use crate::graph::{GraphError, GraphFile, NetworkGraph, Topology};
use crate::sim::SimError;
use crate::wireless::{self, ArrivalLaw, Policy, WirelessConfig};
use crate::wireline::{self, WirelineConfig};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("series of {len} samples is shorter than the required {needed}")]
    SeriesTooShort { len: usize, needed: usize },
    #[error("bad experiment config: {0}")]
    Config(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Wireline,
    Wireless,
}

/// Where the graph comes from: a file path, a generator, or an inline document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSource {
    Path(PathBuf),
    Generated(Topology),
    Inline(GraphFile),
}

impl GraphSource {
    pub fn load(&self) -> Result<NetworkGraph, HarnessError> {
        Ok(match self {
            GraphSource::Path(p) => NetworkGraph::load(p)?,
            GraphSource::Generated(t) => t.generate()?,
            GraphSource::Inline(f) => f.build()?,
        })
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleSource {
    /// One schedule with every link at its capacity.
    #[default]
    Wired,
    /// One link at a time at the given rate.
    Singletons { rate: f64 },
    File { path: PathBuf },
    Inline { schedules: Vec<ScheduleRecord> },
}

impl ScheduleSource {
    pub fn load(&self, g: &NetworkGraph) -> Result<ScheduleSet, HarnessError> {
        Ok(match self {
            ScheduleSource::Wired => ScheduleSet::wired(g),
            ScheduleSource::Singletons { rate } => ScheduleSet::singletons(g, *rate),
            ScheduleSource::File { path } => ScheduleSet::load(g, path)?,
            ScheduleSource::Inline { schedules } => {
                ScheduleSet::from_file(g, &ScheduleFile { schedules: schedules.clone(), c_max: None })?
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TreeSource {
    All {
        #[serde(default = "default_tree_limit")]
        limit: usize,
    },
    /// The edge-disjoint depth-two trees of a complete graph.
    CompleteDepth2,
    File { path: PathBuf },
    Inline { trees: Vec<TreeRecord> },
}

impl Default for TreeSource {
    fn default() -> Self {
        TreeSource::All { limit: DEFAULT_TREE_LIMIT }
    }
}

fn default_tree_limit() -> usize {
    DEFAULT_TREE_LIMIT
}

/// Tree list file: `{"trees": [{"parents": {"1": 0, ...}}, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeFile {
    pub trees: Vec<TreeRecord>,
}

impl TreeSource {
    pub fn load(&self, g: &NetworkGraph) -> Result<Vec<AggregationTree>, HarnessError> {
        let records = match self {
            TreeSource::All { limit } => return Ok(enumerate_aggregation_trees(g, *limit)?),
            TreeSource::CompleteDepth2 => return Ok(complete_graph_depth2_trees(g)?),
            TreeSource::File { path } => {
                let text = fs::read_to_string(path).map_err(io_err(path))?;
                serde_json::from_str::<TreeFile>(&text)?.trees
            }
            TreeSource::Inline { trees } => trees.clone(),
        };
        records
            .iter()
            .map(|r| AggregationTree::from_record(g, r).map_err(HarnessError::from))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityUnits {
    /// Packets per time unit (or per slot).
    #[default]
    Packets,
    /// Bits per time unit, divided by the packet size before simulating.
    Bits,
}

/// An explicit list of rates or an inclusive arithmetic range.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaSpec {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl LambdaSpec {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            LambdaSpec::List(ref v) => v.clone(),
            LambdaSpec::Range { start, stop, step } => {
                let n = ((stop - start) / step + 1e-9).floor().max(0.0) as usize;
                (0..=n).map(|k| start + k as f64 * step).collect()
            }
        }
    }
}

/// Optional overrides for the detector defaults.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct DetectorOverrides {
    pub window: Option<usize>,
    pub burn_in: Option<f64>,
    pub eps_stable: Option<f64>,
    pub eps_unstable: Option<f64>,
    pub q_cap: Option<f64>,
}

impl DetectorOverrides {
    pub fn apply(&self, mut p: DetectorParams) -> DetectorParams {
        p.window = self.window.unwrap_or(p.window);
        p.burn_in = self.burn_in.unwrap_or(p.burn_in);
        p.eps_stable = self.eps_stable.unwrap_or(p.eps_stable);
        p.eps_unstable = self.eps_unstable.unwrap_or(p.eps_unstable);
        p.q_cap = self.q_cap.unwrap_or(p.q_cap);
        p
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    pub model: Model,
    /// Wireless policy; ignored by the wireline model.
    #[serde(default = "default_policy")]
    pub policy: Policy,
    #[serde(default)]
    pub schedules: ScheduleSource,
    #[serde(default)]
    pub trees: TreeSource,
    #[serde(default = "default_function")]
    pub function: FmuxFunction,
    #[serde(default = "no_lambdas")]
    pub lambdas: LambdaSpec,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "one")]
    pub sample_every: f64,
    #[serde(default)]
    pub detector: DetectorOverrides,
    #[serde(default)]
    pub capacity_units: CapacityUnits,
    /// Overrides `log2 |R(f)|` when converting bits to packets.
    #[serde(default)]
    pub bits_per_packet: Option<f64>,
    #[serde(default = "default_arrivals")]
    pub arrivals: ArrivalLaw,
    #[serde(default)]
    pub allow_cyclic: bool,
    #[serde(default)]
    pub check_invariants: bool,
}

fn default_policy() -> Policy {
    Policy::GreedyMaxweight
}
fn default_function() -> FmuxFunction {
    FmuxFunction::Parity
}
fn no_lambdas() -> LambdaSpec {
    LambdaSpec::List(Vec::new())
}
fn default_horizon() -> f64 {
    200_000.0
}
fn one() -> f64 {
    1.0
}
fn default_arrivals() -> ArrivalLaw {
    ArrivalLaw::Poisson
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn policy_name(&self) -> &'static str {
        match self.model {
            Model::Wireline => "random-useful",
            Model::Wireless => self.policy.name(),
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if !(self.horizon > 0.0) || !(self.sample_every > 0.0) {
            return Err(HarnessError::Config("horizon and sample interval must be positive".into()));
        }
        if self.model == Model::Wireless && self.sample_every.fract() != 0.0 {
            return Err(HarnessError::Config("wireless sample interval must be a whole number of slots".into()));
        }
        Ok(())
    }

    /// Sweep requirements: a nonempty grid and a horizon long enough for the detector.
    pub fn validate_sweep(&self) -> Result<(), HarnessError> {
        self.validate()?;
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("at least one seed is required".into()));
        }
        if self.lambdas.values().is_empty() {
            return Err(HarnessError::Config("empty lambda grid".into()));
        }
        let window = self.detector.window.unwrap_or(1000) as f64;
        if self.horizon / self.sample_every < 10.0 * window {
            return Err(HarnessError::Config(format!(
                "horizon {} gives {} samples; the detector needs at least {}",
                self.horizon,
                (self.horizon / self.sample_every) as u64,
                10.0 * window
            )));
        }
        Ok(())
    }
}

/// Inputs resolved once per experiment: packet-denominated graph, schedules and trees.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ExperimentConfig,
    pub graph: NetworkGraph,
    pub gamma: ScheduleSet,
    pub trees: Vec<AggregationTree>,
    pub delta_star: f64,
    pub argmin_node: usize,
    /// Analytic maximum refresh rate in rounds per time unit.
    pub lambda_star: f64,
}

impl Prepared {
    pub fn new(config: ExperimentConfig) -> Result<Self, HarnessError> {
        config.validate()?;
        config.function.validate().map_err(SimError::from)?;
        let raw = config.graph.load()?;
        let graph = match config.capacity_units {
            CapacityUnits::Packets => raw,
            CapacityUnits::Bits => {
                let bits = config.bits_per_packet.unwrap_or_else(|| config.function.bits_per_packet());
                if !(bits > 0.0) {
                    return Err(HarnessError::Config(format!("packet size {bits} bits")));
                }
                let caps: Vec<f64> = raw.capacities().iter().map(|c| c / bits).collect();
                info!("capacities divided by {bits} bits per packet");
                raw.with_capacities(&caps)?
            }
        };
        let (gamma, trees, delta_star, argmin_node) = match config.model {
            Model::Wireline => {
                let m = min_mincut(&graph, &RateVector::from_graph(&graph));
                (ScheduleSet::wired(&graph), Vec::new(), m.value, m.argmin)
            }
            Model::Wireless => {
                let gamma = config.schedules.load(&graph)?;
                let trees = config.trees.load(&graph)?;
                let opt = optimal_sss(&graph, &gamma)?;
                let m = min_mincut(&graph, &opt.rates);
                (gamma, trees, opt.value, m.argmin)
            }
        };
        Ok(Prepared { config, graph, gamma, trees, delta_star, argmin_node, lambda_star: delta_star })
    }

    pub fn detector(&self, lambda: f64) -> DetectorParams {
        self.config.detector.apply(DetectorParams::defaults(lambda, self.graph.num_nodes()))
    }

    /// Runs one `(lambda, seed)` point and returns its CSV text and stats.
    pub fn run_point(&self, lambda: f64, seed: u64) -> Result<PointRun, HarnessError> {
        let c = &self.config;
        let mut csv = Vec::new();
        let (series, stats) = match c.model {
            Model::Wireline => {
                let cfg = WirelineConfig {
                    lambda,
                    function: c.function,
                    seed,
                    horizon: c.horizon,
                    sample_every: c.sample_every,
                    check_invariants: c.check_invariants,
                    allow_cyclic: c.allow_cyclic,
                    record_footprints: false,
                };
                let m = wireline::run(&self.graph, cfg)?;
                m.write_csv(&mut csv)?;
                let stats = RunStats {
                    arrived: m.arrived,
                    completed: m.completed,
                    oracle_checks: m.oracle_checks,
                    mean_latency: m.mean_latency,
                };
                (m.series(), stats)
            }
            Model::Wireless => {
                let cfg = WirelessConfig {
                    lambda,
                    function: c.function,
                    seed,
                    horizon: c.horizon as u64,
                    sample_every: c.sample_every as u64,
                    arrivals: c.arrivals,
                    policy: c.policy.clone(),
                    check_invariants: c.check_invariants,
                };
                let m = wireless::run(&self.graph, &self.gamma, &self.trees, cfg)?;
                m.write_csv(&mut csv)?;
                let stats = RunStats {
                    arrived: m.arrived,
                    completed: m.completed,
                    oracle_checks: m.oracle_checks,
                    mean_latency: m.mean_latency,
                };
                (m.series(), stats)
            }
        };
        let verdict = match detect_stability(&series, c.sample_every, &self.detector(lambda)) {
            Ok(v) => Some(v),
            Err(HarnessError::SeriesTooShort { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(PointRun { lambda, seed, verdict, stats, csv })
    }

    /// Output file name for a point: model, policy, lambda and seed.
    pub fn file_name(&self, lambda: f64, seed: u64) -> String {
        format!("{:?}_{}_lambda{}_seed{}.csv", self.config.model, self.config.policy_name(), lambda, seed).to_lowercase()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunStats {
    pub arrived: u64,
    pub completed: u64,
    pub oracle_checks: u64,
    pub mean_latency: f64,
}

#[derive(Debug, Clone)]
pub struct PointRun {
    pub lambda: f64,
    pub seed: u64,
    /// `None` when the run is too short for the detector.
    pub verdict: Option<StabilityVerdict>,
    pub stats: RunStats,
    pub csv: Vec<u8>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointSummary {
    pub lambda: f64,
    pub seed: u64,
    pub verdict: Verdict,
    pub slope: f64,
    pub max_queue: f64,
    #[serde(flatten)]
    pub stats: RunStats,
    pub csv: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LambdaSummary {
    pub lambda: f64,
    /// Stable if every seed is stable, unstable if every seed is unstable.
    pub verdict: Verdict,
    pub stable_seeds: usize,
    pub unstable_seeds: usize,
    /// Stable verdict above an unstable rate, downgraded to inconclusive.
    pub monotonicity_violation: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub model: Model,
    pub policy: String,
    pub function: FmuxFunction,
    pub delta_star: f64,
    pub lambda_star: f64,
    /// Largest rate judged stable.
    pub lambda_hat: Option<f64>,
    /// At least three seeds per rate.
    pub definitive: bool,
    pub lambdas: Vec<LambdaSummary>,
    pub points: Vec<PointSummary>,
}

/// Runs the `(lambda, seed)` grid in parallel and merges results in grid
/// order. CSV files and `summary.json` go to `out_dir` when given.
pub fn sweep(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<SweepSummary, HarnessError> {
    config.validate_sweep()?;
    if config.seeds.len() < 3 {
        warn!("fewer than 3 seeds: verdicts are not definitive");
    }
    let prepared = Prepared::new(config.clone())?;
    let lambdas = config.lambdas.values();
    let grid: Vec<(f64, u64)> = lambdas.iter().flat_map(|&l| config.seeds.iter().map(move |&s| (l, s))).collect();
    let runs: Vec<PointRun> =
        grid.par_iter().map(|&(l, s)| prepared.run_point(l, s)).collect::<Result<_, _>>()?;

    if let Some(dir) = out_dir {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut points = Vec::with_capacity(runs.len());
    for r in &runs {
        let csv = match out_dir {
            Some(dir) => {
                let name = prepared.file_name(r.lambda, r.seed);
                let path = dir.join(&name);
                fs::write(&path, &r.csv).map_err(io_err(&path))?;
                Some(name)
            }
            None => None,
        };
        let v = r.verdict.expect("sweep horizon validated against the detector window");
        points.push(PointSummary {
            lambda: r.lambda,
            seed: r.seed,
            verdict: v.verdict,
            slope: v.slope,
            max_queue: v.max_queue,
            stats: r.stats,
            csv,
        });
    }
    let summaries = summarize(&lambdas, &points);
    let lambda_hat = summaries.iter().filter(|s| s.verdict == Verdict::Stable).map(|s| s.lambda).reduce(f64::max);
    let summary = SweepSummary {
        model: config.model,
        policy: config.policy_name().to_string(),
        function: config.function,
        delta_star: prepared.delta_star,
        lambda_star: prepared.lambda_star,
        lambda_hat,
        definitive: config.seeds.len() >= 3,
        lambdas: summaries,
        points,
    };
    if let Some(dir) = out_dir {
        let path = dir.join("summary.json");
        fs::write(&path, serde_json::to_string_pretty(&summary)?).map_err(io_err(&path))?;
    }
    Ok(summary)
}

fn summarize(lambdas: &[f64], points: &[PointSummary]) -> Vec<LambdaSummary> {
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut seen_unstable = false;
    sorted
        .iter()
        .map(|&lambda| {
            let at: Vec<_> = points.iter().filter(|p| p.lambda == lambda).collect();
            let stable = at.iter().filter(|p| p.verdict == Verdict::Stable).count();
            let unstable = at.iter().filter(|p| p.verdict == Verdict::Unstable).count();
            let mut verdict = if stable == at.len() {
                Verdict::Stable
            } else if unstable == at.len() {
                Verdict::Unstable
            } else {
                Verdict::Inconclusive
            };
            let violation = verdict == Verdict::Stable && seen_unstable;
            if violation {
                verdict = Verdict::Inconclusive;
            }
            seen_unstable |= verdict == Verdict::Unstable;
            LambdaSummary { lambda, verdict, stable_seeds: stable, unstable_seeds: unstable, monotonicity_violation: violation }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(lambda: f64, verdict: Verdict) -> PointSummary {
        PointSummary {
            lambda,
            seed: 0,
            verdict,
            slope: 0.0,
            max_queue: 0.0,
            stats: RunStats { arrived: 0, completed: 0, oracle_checks: 0, mean_latency: 0.0 },
            csv: None,
        }
    }

    #[test]
    fn lambda_range_is_inclusive() {
        let r = LambdaSpec::Range { start: 3.2, stop: 4.8, step: 0.4 };
        assert_eq!(r.values().len(), 5);
    }

    #[test]
    fn monotonicity_violations_are_flagged() {
        let pts = vec![point(1.0, Verdict::Stable), point(2.0, Verdict::Unstable), point(3.0, Verdict::Stable)];
        let s = summarize(&[1.0, 2.0, 3.0], &pts);
        assert_eq!(s[2].verdict, Verdict::Inconclusive);
        assert!(s[2].monotonicity_violation);
    }

    #[test]
    fn config_round_trip_and_validation() {
        let text = r#"{
            "graph": {"kind": "complete", "n": 4, "capacity": 1.0},
            "model": "wireline",
            "lambdas": {"start": 1.0, "stop": 2.0, "step": 0.5},
            "seeds": [1],
            "horizon": 500.0
        }"#;
        let cfg: ExperimentConfig = serde_json::from_str(text).unwrap();
        assert_eq!(cfg.lambdas.values(), vec![1.0, 1.5, 2.0]);
        assert!(matches!(cfg.validate_sweep(), Err(HarnessError::Config(_))));
        assert!(Prepared::new(cfg).is_ok());
    }

    #[test]
    fn small_sweep_writes_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            graph: GraphSource::Generated(Topology::Line { n: 3, capacity: 1.0 }),
            model: Model::Wireless,
            policy: Policy::SingleTree,
            schedules: ScheduleSource::Wired,
            trees: TreeSource::default(),
            function: FmuxFunction::Parity,
            lambdas: LambdaSpec::List(vec![0.5, 1.5]),
            seeds: vec![1, 2],
            horizon: 1000.0,
            sample_every: 1.0,
            detector: DetectorOverrides { window: Some(100), ..Default::default() },
            capacity_units: CapacityUnits::Packets,
            bits_per_packet: None,
            arrivals: ArrivalLaw::Poisson,
            allow_cyclic: false,
            check_invariants: true,
        };
        let s = sweep(&cfg, Some(dir.path())).unwrap();
        assert_eq!(s.points.len(), 4);
        assert_eq!(s.lambdas[0].verdict, Verdict::Stable);
        assert_eq!(s.lambdas[1].verdict, Verdict::Unstable);
        assert_eq!(s.lambda_hat, Some(0.5));
        assert!(dir.path().join("wireless_single-tree_lambda0.5_seed2.csv").exists());
        assert!(dir.path().join("summary.json").exists());
    }
}
