//! Slotted-time simulator for aggregation over interfering links.
//!
//! Each round is routed along one aggregation tree. Every node keeps, per
//! tree, a useful queue (rounds it may forward now) and a not-useful queue
//! (rounds still waiting for packets from its tree children). A node only
//! forwards a round after merging the packets of all its children for it.
//!
//! A slot runs in five steps: arrivals, routing, scheduling, transmissions,
//! then internal transfers and completions.

mod policy;

use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use log::warn;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

pub use policy::{
    greedy_tree_load, link_weights, lyapunov_value, maxweight_schedule, schedule_weight, static_sss_plan,
    QueueLengths, ScheduleChoice, StaticSssPlan, TreeIndex,
};

use crate::flows::{AggregationTree, ScheduleSet};
use crate::fmux::{FmuxFunction, Payload, Value};
use crate::graph::{LinkId, NetworkGraph, NodeId};
use crate::nodeset::NodeSet;
use crate::sim::{LatencyStats, RoundId, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum ArrivalLaw {
    /// Poisson(lambda) rounds per slot.
    Poisson,
    /// `batch` rounds with probability `lambda / batch`, else none.
    BernoulliBatch { batch: u32 },
    /// `floor((t+1) lambda) - floor(t lambda)` rounds in slot `t`.
    Deterministic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Policy {
    /// Greedy tree loading with MaxWeight scheduling.
    GreedyMaxweight,
    /// Schedules drawn from the optimal static split, rounds split across
    /// trees by a packing of the induced rates.
    StaticSss,
    /// MaxWeight over exactly one tree.
    SingleTree,
    /// Each round joins tree `k` with probability `weights[k]`; MaxWeight.
    FixedSplit { weights: Vec<f64> },
}

impl Policy {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::GreedyMaxweight => "greedy-maxweight",
            Policy::StaticSss => "static-sss",
            Policy::SingleTree => "single-tree",
            Policy::FixedSplit { .. } => "fixed-split",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct WirelessConfig {
    pub lambda: f64,
    pub function: FmuxFunction,
    pub seed: u64,
    /// Number of slots.
    pub horizon: u64,
    pub sample_every: u64,
    pub arrivals: ArrivalLaw,
    pub policy: Policy,
    /// Assert Type-AT and exactly-once sending on every transmission.
    pub check_invariants: bool,
}

impl Default for WirelessConfig {
    fn default() -> Self {
        WirelessConfig {
            lambda: 0.5,
            function: FmuxFunction::Parity,
            seed: 0,
            horizon: 10_000,
            sample_every: 1,
            arrivals: ArrivalLaw::Poisson,
            policy: Policy::GreedyMaxweight,
            check_invariants: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WirelessSample {
    pub slot: u64,
    pub total_useful: u64,
    pub total_nonuseful: u64,
    pub v: f64,
    pub completed: u64,
    pub mean_latency: f64,
    pub rounds_in_flight: u64,
    /// Rounds assigned to each tree so far, per slot elapsed.
    pub tree_load: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct WirelessMetrics {
    pub samples: Vec<WirelessSample>,
    pub slots: u64,
    pub arrived: u64,
    pub completed: u64,
    pub transmissions: u64,
    pub oracle_checks: u64,
    /// Transmissions checked against the aggregate-and-transmit rule.
    pub type_at_checks: u64,
    /// Completed rounds whose tree links were each crossed exactly once.
    pub conservation_checks: u64,
    pub schedule_counts: Vec<u64>,
    pub tree_rounds: Vec<u64>,
    pub mean_latency: f64,
}

impl WirelessMetrics {
    /// Rounds in flight at each sample: the series fed to the stability detector.
    pub fn series(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.rounds_in_flight as f64).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SimError> {
        let mut out = csv::Writer::from_writer(w);
        let trees = self.tree_rounds.len();
        let mut header: Vec<String> =
            ["slot", "total_useful", "total_nonuseful", "V", "completed", "mean_latency"].map(String::from).to_vec();
        header.extend((0..trees).map(|k| format!("load_tree_{k}")));
        out.write_record(&header)?;
        for s in &self.samples {
            let mut row = vec![
                s.slot.to_string(),
                s.total_useful.to_string(),
                s.total_nonuseful.to_string(),
                s.v.to_string(),
                s.completed.to_string(),
                s.mean_latency.to_string(),
            ];
            row.extend(s.tree_load.iter().map(f64::to_string));
            out.write_record(&row)?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

struct Round {
    tree: usize,
    arrival: u64,
    sensed: Vec<Value>,
    payload: Vec<Payload>,
    contributors: Vec<NodeSet>,
    delivered: Vec<u16>,
    sent: NodeSet,
}

pub struct WirelessSim {
    g: NetworkGraph,
    gamma: ScheduleSet,
    trees: Vec<AggregationTree>,
    index: TreeIndex,
    cfg: WirelessConfig,
    rng: ChaCha8Rng,
    poisson: Option<Poisson<f64>>,
    /// Integer packets per slot for each schedule's links.
    int_rates: Vec<Vec<(LinkId, u64)>>,
    split: Option<WeightedIndex<f64>>,
    schedule_law: Option<WeightedIndex<f64>>,
    plan: Option<StaticSssPlan>,
    useful: Vec<Vec<BTreeSet<RoundId>>>,
    waiting: Vec<Vec<BTreeSet<RoundId>>>,
    rounds: HashMap<RoundId, Round>,
    ready: Vec<(NodeId, RoundId)>,
    slot: u64,
    next_round: RoundId,
    latency: LatencyStats,
    metrics: WirelessMetrics,
}

impl WirelessSim {
    pub fn new(
        g: &NetworkGraph,
        gamma: &ScheduleSet,
        trees: &[AggregationTree],
        cfg: WirelessConfig,
    ) -> Result<Self, SimError> {
        cfg.function.validate()?;
        if trees.is_empty() {
            return Err(SimError::Config("tree set is empty".into()));
        }
        if !(cfg.lambda >= 0.0) || !cfg.lambda.is_finite() {
            return Err(SimError::Config(format!("lambda must be finite and >= 0, got {}", cfg.lambda)));
        }
        if cfg.sample_every == 0 {
            return Err(SimError::Config("sample interval must be positive".into()));
        }
        let mut split = None;
        let mut schedule_law = None;
        let mut plan = None;
        match &cfg.policy {
            Policy::SingleTree if trees.len() != 1 => return Err(SimError::MultiTreeConfig(trees.len())),
            Policy::FixedSplit { weights } => {
                if weights.len() != trees.len() || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return Err(SimError::Config("fixed split needs one weight per tree, summing to 1".into()));
                }
                split = Some(weight_index(weights)?);
            }
            Policy::StaticSss => {
                let p = static_sss_plan(g, gamma, trees)?;
                split = Some(weight_index(&p.tree_weights)?);
                schedule_law = Some(weight_index(p.rule.weights())?);
                plan = Some(p);
            }
            _ => {}
        }
        let poisson = match cfg.arrivals {
            ArrivalLaw::Poisson if cfg.lambda > 0.0 => {
                Some(Poisson::new(cfg.lambda).map_err(|e| SimError::Config(format!("poisson: {e}")))?)
            }
            ArrivalLaw::BernoulliBatch { batch } if batch == 0 || cfg.lambda > batch as f64 => {
                return Err(SimError::Config(format!("batch {batch} cannot carry lambda {}", cfg.lambda)));
            }
            _ => None,
        };
        let int_rates = gamma
            .schedules()
            .iter()
            .enumerate()
            .map(|(k, s)| {
                s.links
                    .iter()
                    .zip(&s.rates)
                    .map(|(&l, &c)| {
                        if c.fract() != 0.0 {
                            warn!("schedule {k}: rate {c} on link {l} floored to {}", c.floor());
                        }
                        (l, c.floor() as u64)
                    })
                    .collect()
            })
            .collect();
        let n = g.num_nodes();
        let nt = trees.len();
        Ok(WirelessSim {
            index: TreeIndex::new(g, trees),
            g: g.clone(),
            gamma: gamma.clone(),
            trees: trees.to_vec(),
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            poisson,
            int_rates,
            split,
            schedule_law,
            plan,
            useful: vec![vec![BTreeSet::new(); nt]; n],
            waiting: vec![vec![BTreeSet::new(); nt]; n],
            rounds: HashMap::new(),
            ready: Vec::new(),
            slot: 0,
            next_round: 0,
            latency: LatencyStats::default(),
            metrics: WirelessMetrics {
                schedule_counts: vec![0; gamma.len()],
                tree_rounds: vec![0; nt],
                ..Default::default()
            },
            cfg,
        })
    }

    pub fn trees(&self) -> &[AggregationTree] {
        &self.trees
    }

    pub fn plan(&self) -> Option<&StaticSssPlan> {
        self.plan.as_ref()
    }

    pub fn metrics(&self) -> &WirelessMetrics {
        &self.metrics
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    /// `Q_i^{tau,u}` for every node and tree.
    pub fn queue_lengths(&self) -> QueueLengths {
        self.useful.iter().map(|row| row.iter().map(BTreeSet::len).collect()).collect()
    }

    pub fn useful_queue(&self, node: NodeId, tree: usize) -> Vec<RoundId> {
        self.useful[node][tree].iter().copied().collect()
    }

    pub fn waiting_queue(&self, node: NodeId, tree: usize) -> Vec<RoundId> {
        self.waiting[node][tree].iter().copied().collect()
    }

    pub fn rounds_in_flight(&self) -> usize {
        self.rounds.len()
    }

    pub fn lyapunov(&self) -> f64 {
        lyapunov_value(&self.queue_lengths())
    }

    fn arrivals(&mut self) -> u64 {
        let lambda = self.cfg.lambda;
        if lambda == 0.0 {
            return 0;
        }
        match self.cfg.arrivals {
            ArrivalLaw::Poisson => self.poisson.as_ref().expect("lambda > 0").sample(&mut self.rng) as u64,
            ArrivalLaw::BernoulliBatch { batch } => {
                if self.rng.random_bool(lambda / batch as f64) {
                    batch as u64
                } else {
                    0
                }
            }
            ArrivalLaw::Deterministic => {
                let t = self.slot as f64;
                ((t + 1.0) * lambda).floor() as u64 - (t * lambda).floor() as u64
            }
        }
    }

    /// Adds a round on `tree`: leaves hold it as useful, every other node
    /// waits for its children.
    pub fn add_round(&mut self, tree: usize) -> RoundId {
        let id = self.next_round;
        self.next_round += 1;
        let n = self.g.num_nodes();
        let a = self.g.aggregator();
        let f = self.cfg.function;
        let alphabet = f.alphabet_size();
        let mut sensed = vec![0; n];
        let mut payload = Vec::with_capacity(n);
        let mut contributors = Vec::with_capacity(n);
        for (i, x) in sensed.iter_mut().enumerate() {
            if i == a {
                payload.push(f.identity());
                contributors.push(NodeSet::EMPTY);
            } else {
                *x = self.rng.random_range(0..alphabet);
                payload.push(f.lift(*x).expect("value drawn from alphabet"));
                contributors.push(NodeSet::singleton(i));
            }
            if self.index.num_children[tree][i] == 0 && i != a {
                self.useful[i][tree].insert(id);
            } else {
                self.waiting[i][tree].insert(id);
            }
        }
        self.rounds.insert(
            id,
            Round {
                tree,
                arrival: self.slot,
                sensed,
                payload,
                contributors,
                delivered: vec![0; n],
                sent: NodeSet::EMPTY,
            },
        );
        self.metrics.arrived += 1;
        self.metrics.tree_rounds[tree] += 1;
        id
    }

    /// Sends up to `count` rounds of `tree` from the sender's useful queue
    /// over `link`, lowest round id first.
    fn transmit(&mut self, link: LinkId, tree: usize, count: u64) -> Result<u64, SimError> {
        let (i, j) = (self.g.link(link).from, self.g.link(link).to);
        let mut moved = 0;
        while moved < count {
            let Some(r) = self.useful[i][tree].pop_first() else { break };
            self.deliver(i, j, r)?;
            moved += 1;
        }
        Ok(moved)
    }

    fn deliver(&mut self, i: NodeId, j: NodeId, r: RoundId) -> Result<(), SimError> {
        let f = self.cfg.function;
        let round = self.rounds.get_mut(&r).expect("queued round is live");
        let tree = round.tree;
        if self.cfg.check_invariants {
            if round.delivered[i] as usize != self.index.num_children[tree][i] {
                return Err(SimError::Invariant(format!("round {r} left node {i} before all its children reported")));
            }
            if round.sent.contains(i) {
                return Err(SimError::Invariant(format!("round {r} sent twice from node {i}")));
            }
            if self.trees[tree].parent(i) != Some(j) {
                return Err(SimError::Invariant(format!("round {r} sent off its tree on {i} -> {j}")));
            }
            if !round.contributors[i].is_disjoint(round.contributors[j]) {
                return Err(SimError::Invariant(format!("round {r}: readings merged twice at {j}")));
            }
            self.metrics.type_at_checks += 1;
        }
        round.sent.insert(i);
        let incoming = std::mem::replace(&mut round.payload[i], f.identity());
        f.absorb(&mut round.payload[j], &incoming);
        round.contributors[j] = round.contributors[j].union(round.contributors[i]);
        round.contributors[i] = NodeSet::EMPTY;
        round.delivered[j] += 1;
        if round.delivered[j] as usize == self.index.num_children[tree][j] {
            self.ready.push((j, r));
        }
        self.metrics.transmissions += 1;
        Ok(())
    }

    fn finish(&mut self, r: RoundId) -> Result<(), SimError> {
        let a = self.g.aggregator();
        let f = self.cfg.function;
        let round = self.rounds.remove(&r).expect("live round");
        let all = NodeSet::full(self.g.num_nodes()).without(a);
        if round.contributors[a] != all || round.sent != all {
            return Err(SimError::Invariant(format!(
                "round {r}: aggregator holds {:?}, senders {:?}",
                round.contributors[a], round.sent
            )));
        }
        self.metrics.conservation_checks += 1;
        let readings: Vec<Value> = self.g.sensors().map(|i| round.sensed[i]).collect();
        let expected = f.offline_evaluate(&readings);
        let got = f.finalize(&round.payload[a]);
        self.metrics.oracle_checks += 1;
        if expected != got {
            return Err(SimError::OracleMismatch { round: r, expected, got });
        }
        self.latency.push((self.slot + 1 - round.arrival) as f64);
        self.metrics.completed += 1;
        Ok(())
    }

    /// Applies a chosen schedule and tree choices (steps 4 and 5).
    pub fn slot_update(&mut self, choice: &ScheduleChoice) -> Result<(), SimError> {
        let rates = self.int_rates[choice.schedule].clone();
        if self.cfg.policy == Policy::StaticSss {
            for (l, c) in rates {
                let mut left = c;
                // serve every tree routed over l, oldest round first
                while left > 0 {
                    let from = self.g.link(l).from;
                    let next = self.index.link_trees[l]
                        .iter()
                        .filter_map(|&t| self.useful[from][t].first().map(|&r| (r, t)))
                        .min();
                    let Some((_, t)) = next else { break };
                    left -= self.transmit(l, t, 1)?;
                }
            }
        } else {
            for &(l, t) in &choice.trees {
                let c = rates.iter().find(|&&(x, _)| x == l).map_or(0, |&(_, c)| c);
                self.transmit(l, t, c)?;
            }
        }
        self.metrics.schedule_counts[choice.schedule] += 1;

        let a = self.g.aggregator();
        let mut ready = std::mem::take(&mut self.ready);
        ready.sort_unstable();
        for (node, r) in ready {
            let tree = self.rounds[&r].tree;
            self.waiting[node][tree].remove(&r);
            if node == a {
                self.finish(r)?;
            } else {
                self.useful[node][tree].insert(r);
            }
        }
        Ok(())
    }

    fn choose_schedule(&mut self) -> ScheduleChoice {
        match self.cfg.policy {
            Policy::StaticSss => {
                let k = self.schedule_law.as_ref().expect("static plan").sample(&mut self.rng);
                ScheduleChoice { schedule: k, trees: Vec::new(), weight: 0.0 }
            }
            _ => {
                let q = self.queue_lengths();
                maxweight_schedule(&self.g, &self.gamma, &self.index, &q, &mut self.rng)
            }
        }
    }

    /// Runs one slot.
    pub fn step(&mut self) -> Result<(), SimError> {
        let arrivals = self.arrivals();
        if arrivals > 0 {
            match self.cfg.policy {
                Policy::GreedyMaxweight => {
                    let t = greedy_tree_load(&self.queue_lengths(), self.trees.len(), &mut self.rng);
                    for _ in 0..arrivals {
                        self.add_round(t);
                    }
                }
                Policy::SingleTree => {
                    for _ in 0..arrivals {
                        self.add_round(0);
                    }
                }
                Policy::StaticSss | Policy::FixedSplit { .. } => {
                    for _ in 0..arrivals {
                        let t = self.split.as_ref().expect("split law").sample(&mut self.rng);
                        self.add_round(t);
                    }
                }
            }
        }
        let choice = self.choose_schedule();
        self.slot_update(&choice)?;
        self.slot += 1;
        self.metrics.slots = self.slot;
        if self.slot % self.cfg.sample_every == 0 {
            self.record();
        }
        Ok(())
    }

    fn record(&mut self) {
        let useful: usize = self.useful.iter().flatten().map(BTreeSet::len).sum();
        let waiting: usize = self.waiting.iter().flatten().map(BTreeSet::len).sum();
        let slots = self.slot as f64;
        self.metrics.samples.push(WirelessSample {
            slot: self.slot,
            total_useful: useful as u64,
            total_nonuseful: waiting as u64,
            v: self.lyapunov(),
            completed: self.metrics.completed,
            mean_latency: self.latency.mean(),
            rounds_in_flight: self.rounds.len() as u64,
            tree_load: self.metrics.tree_rounds.iter().map(|&c| c as f64 / slots).collect(),
        });
    }

    pub fn run(mut self) -> Result<WirelessMetrics, SimError> {
        while self.slot < self.cfg.horizon {
            self.step()?;
        }
        self.metrics.mean_latency = self.latency.mean();
        Ok(self.metrics)
    }
}

fn weight_index(w: &[f64]) -> Result<WeightedIndex<f64>, SimError> {
    WeightedIndex::new(w).map_err(|e| SimError::Config(format!("weights {w:?}: {e}")))
}

/// Runs the simulator to the horizon.
pub fn run(
    g: &NetworkGraph,
    gamma: &ScheduleSet,
    trees: &[AggregationTree],
    cfg: WirelessConfig,
) -> Result<WirelessMetrics, SimError> {
    WirelessSim::new(g, gamma, trees, cfg)?.run()
}

/// MaxWeight over a single tree, as a schedule choice.
pub fn single_tree_backpressure<R: Rng + ?Sized>(
    g: &NetworkGraph,
    gamma: &ScheduleSet,
    trees: &[AggregationTree],
    q: &QueueLengths,
    rng: &mut R,
) -> Result<ScheduleChoice, SimError> {
    if trees.len() != 1 {
        return Err(SimError::MultiTreeConfig(trees.len()));
    }
    Ok(maxweight_schedule(g, gamma, &TreeIndex::new(g, trees), q, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::{enumerate_aggregation_trees, Schedule};
    use crate::graph::{triangle, Topology};

    fn line() -> (NetworkGraph, Vec<AggregationTree>) {
        let g = Topology::Line { n: 3, capacity: 1.0 }.generate().unwrap();
        let t = enumerate_aggregation_trees(&g, 10).unwrap();
        (g, t)
    }

    fn quiet(policy: Policy) -> WirelessConfig {
        WirelessConfig { lambda: 0.0, policy, check_invariants: true, ..Default::default() }
    }

    #[test]
    fn line_round_takes_two_slots() {
        let (g, t) = line();
        let gamma = ScheduleSet::wired(&g);
        let mut sim = WirelessSim::new(&g, &gamma, &t, quiet(Policy::SingleTree)).unwrap();
        sim.add_round(0);
        assert_eq!(sim.useful_queue(2, 0), vec![0]);
        assert_eq!(sim.waiting_queue(1, 0), vec![0]);
        sim.step().unwrap();
        assert_eq!(sim.useful_queue(1, 0), vec![0]);
        assert_eq!(sim.metrics().completed, 0);
        sim.step().unwrap();
        assert_eq!(sim.metrics().completed, 1);
        assert_eq!(sim.latency.mean(), 2.0);
    }

    #[test]
    fn transmission_is_min_of_rate_and_queue() {
        let (g, t) = line();
        let gamma = ScheduleSet::new(&g, vec![Schedule { links: vec![1], rates: vec![3.0] }], None).unwrap();
        let mut sim = WirelessSim::new(&g, &gamma, &t, quiet(Policy::SingleTree)).unwrap();
        sim.add_round(0);
        sim.step().unwrap();
        assert_eq!(sim.metrics().transmissions, 1);
        assert!(sim.useful_queue(2, 0).is_empty());
    }

    #[test]
    fn empty_schedule_leaves_queues() {
        let (g, t) = line();
        let gamma = ScheduleSet::new(&g, vec![Schedule { links: vec![], rates: vec![] }], None).unwrap();
        let mut sim = WirelessSim::new(&g, &gamma, &t, quiet(Policy::SingleTree)).unwrap();
        sim.add_round(0);
        sim.step().unwrap();
        assert_eq!(sim.useful_queue(2, 0), vec![0]);
    }

    #[test]
    fn single_tree_rejects_many() {
        let g = triangle();
        let t = enumerate_aggregation_trees(&g, 10).unwrap();
        let gamma = ScheduleSet::wired(&g);
        assert!(matches!(
            WirelessSim::new(&g, &gamma, &t, quiet(Policy::SingleTree)),
            Err(SimError::MultiTreeConfig(2))
        ));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(single_tree_backpressure(&g, &gamma, &t, &vec![vec![0; 2]; 3], &mut rng).is_err());
        let c = single_tree_backpressure(&g, &gamma, &t[..1], &vec![vec![0]; 3], &mut rng).unwrap();
        assert_eq!(c.weight, 0.0);
    }

    #[test]
    fn all_policies_complete_rounds() {
        let g = triangle();
        let t = enumerate_aggregation_trees(&g, 10).unwrap();
        let gamma = ScheduleSet::singletons(&g, 1.0);
        for policy in [Policy::GreedyMaxweight, Policy::StaticSss, Policy::FixedSplit { weights: vec![0.5, 0.5] }] {
            for f in [FmuxFunction::Parity, FmuxFunction::max(16), FmuxFunction::kth(2, 8)] {
                let cfg = WirelessConfig {
                    lambda: 0.3,
                    function: f,
                    seed: 3,
                    horizon: 3000,
                    policy: policy.clone(),
                    check_invariants: true,
                    ..Default::default()
                };
                let m = run(&g, &gamma, &t, cfg).unwrap();
                assert!(m.completed > 700, "{policy:?}: {}", m.completed);
                assert_eq!(m.completed, m.oracle_checks);
            }
        }
    }

    #[test]
    fn csv_is_deterministic() {
        let g = triangle();
        let t = enumerate_aggregation_trees(&g, 10).unwrap();
        let gamma = ScheduleSet::singletons(&g, 1.0);
        let cfg = WirelessConfig { lambda: 0.4, seed: 9, horizon: 500, ..Default::default() };
        let mut a = Vec::new();
        let mut b = Vec::new();
        run(&g, &gamma, &t, cfg.clone()).unwrap().write_csv(&mut a).unwrap();
        run(&g, &gamma, &t, cfg).unwrap().write_csv(&mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("slot,total_useful,total_nonuseful,V,completed,mean_latency,load_tree_0,load_tree_1\n"));
    }
}
