//! Continuous-time simulator of random useful-packet forwarding with
//! in-network aggregation on wireline networks.
//!
//! Every link `(u, v)` carries one packet at a time and takes an
//! Exponential(`c_uv`) time per packet. Whenever a link is idle and some round
//! has a packet at `u` that is useful for `v`, the link starts transmitting
//! one such packet chosen uniformly at random. On arrival the packet is merged
//! into `v`'s payload for that round and `u` leaves the round's footprint.

mod footprint;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::io::Write;

use log::{debug, warn};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use footprint::{
    counting_lemma_report, fluid_lyapunov, is_valid_footprint, lemma_betas, reaches_aggregator,
    valid_footprint_sets, verify_counting_lemma, Counters, LemmaReport, LemmaViolation, MAX_ENUM_NODES,
};

use crate::fmux::{FmuxFunction, Payload, Value};
use crate::graph::{LinkId, NetworkGraph, NodeId};
use crate::nodeset::NodeSet;
use crate::sim::{exp_sample, LatencyStats, RoundId, SimError};

/// Footprint-class counters are recorded only up to this many nodes.
pub const MAX_COUNTER_NODES: usize = 12;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct WirelineConfig {
    /// Round arrival rate (rounds per time unit); 0 disables arrivals.
    pub lambda: f64,
    pub function: FmuxFunction,
    pub seed: u64,
    pub horizon: f64,
    pub sample_every: f64,
    /// Check footprint validity and the activity condition after every event.
    pub check_invariants: bool,
    /// Permit cyclic graphs. Starts are then also guarded by an explicit
    /// reachability check on the remaining footprint.
    pub allow_cyclic: bool,
    /// Record idle-round counts per footprint class at each sample.
    pub record_footprints: bool,
}

impl Default for WirelineConfig {
    fn default() -> Self {
        WirelineConfig {
            lambda: 1.0,
            function: FmuxFunction::Parity,
            seed: 0,
            horizon: 1000.0,
            sample_every: 1.0,
            check_invariants: false,
            allow_cyclic: false,
            record_footprints: false,
        }
    }
}

/// Transmission state of one round, enough to decide usefulness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundView {
    /// Nodes holding a packet of the round.
    pub footprint: NodeSet,
    /// Nodes currently transmitting their packet of the round.
    pub senders: NodeSet,
    /// Nodes with an inbound transfer of the round in progress.
    pub receivers: NodeSet,
}

impl RoundView {
    pub fn idle(footprint: NodeSet) -> Self {
        RoundView { footprint, senders: NodeSet::EMPTY, receivers: NodeSet::EMPTY }
    }

    /// Footprint once every in-progress transfer has finished.
    pub fn settled(&self) -> NodeSet {
        self.footprint.difference(self.senders)
    }
}

/// Is the round's packet at `u` useful for link `(u, v)`?
///
/// With `T` the settled footprint: `u` and `v` are in `T`, `u` is neither the
/// aggregator nor awaiting an inbound packet of the round, and every in-neighbor
/// of `u` in `T` other than the aggregator keeps some out-neighbor in `T`
/// other than `u`.
pub fn is_useful(g: &NetworkGraph, r: &RoundView, link: LinkId) -> bool {
    Adjacency::new(g).useful(r, link)
}

struct Adjacency {
    ends: Vec<(NodeId, NodeId)>,
    in_set: Vec<NodeSet>,
    out_set: Vec<NodeSet>,
    aggregator: NodeId,
}

impl Adjacency {
    fn new(g: &NetworkGraph) -> Self {
        let n = g.num_nodes();
        let mut in_set = vec![NodeSet::EMPTY; n];
        let mut out_set = vec![NodeSet::EMPTY; n];
        let ends = g
            .links()
            .iter()
            .map(|l| {
                out_set[l.from].insert(l.to);
                in_set[l.to].insert(l.from);
                (l.from, l.to)
            })
            .collect();
        Adjacency { ends, in_set, out_set, aggregator: g.aggregator() }
    }

    fn useful(&self, r: &RoundView, link: LinkId) -> bool {
        let (u, v) = self.ends[link];
        let t = r.settled();
        if u == self.aggregator || !t.contains(u) || !t.contains(v) || r.receivers.contains(u) {
            return false;
        }
        self.in_set[u]
            .intersection(t)
            .without(self.aggregator)
            .iter()
            .all(|w| self.out_set[w].intersection(t).len() >= 2)
    }
}

struct Round {
    arrival: f64,
    footprint: NodeSet,
    senders: NodeSet,
    receivers: NodeSet,
    inbound: Vec<u16>,
    transfers: Vec<LinkId>,
    payload: Vec<Payload>,
    contributors: Vec<NodeSet>,
    sensed: Vec<Value>,
}

impl Round {
    fn view(&self) -> RoundView {
        RoundView { footprint: self.footprint, senders: self.senders, receivers: self.receivers }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum EventKind {
    Arrival,
    Completion { link: LinkId, token: u64 },
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then(other.seq.cmp(&self.seq))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WirelineSample {
    pub time: f64,
    pub rounds_in_flight: u64,
    pub completed: u64,
    pub mean_latency: f64,
}

/// Idle-round counts `X_S` at one sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct FootprintSnapshot {
    pub time: f64,
    pub counts: Vec<(NodeSet, usize)>,
}

#[derive(Debug, Clone, Default)]
pub struct TraceMetrics {
    pub samples: Vec<WirelineSample>,
    pub arrived: u64,
    pub completed: u64,
    pub transfers: u64,
    pub events: u64,
    /// Completed rounds whose output was compared with the offline value.
    pub oracle_checks: u64,
    /// Number of full invariant sweeps performed.
    pub invariant_checks: u64,
    pub mean_latency: f64,
    pub footprints: Vec<FootprintSnapshot>,
}

impl TraceMetrics {
    /// Rounds in flight at each sample: the series fed to the stability detector.
    pub fn series(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.rounds_in_flight as f64).collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SimError> {
        let mut out = csv::Writer::from_writer(w);
        for s in &self.samples {
            out.serialize(s)?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Outcome of one transfer completion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Completion {
    pub round: RoundId,
    pub link: LinkId,
    /// The round reached the aggregator and was oracle-checked.
    pub finished: bool,
}

pub struct WirelineSim {
    g: NetworkGraph,
    adj: Adjacency,
    cfg: WirelineConfig,
    acyclic: bool,
    rng: ChaCha8Rng,
    now: f64,
    seq: u64,
    events: BinaryHeap<Event>,
    next_round: RoundId,
    rounds: HashMap<RoundId, Round>,
    /// Idle rounds grouped by footprint.
    idle: BTreeMap<NodeSet, Vec<RoundId>>,
    /// Per-link usefulness of an idle round, by footprint.
    masks: HashMap<NodeSet, Vec<bool>>,
    active: BTreeSet<RoundId>,
    busy: Vec<Option<(RoundId, u64)>>,
    latency: LatencyStats,
    metrics: TraceMetrics,
    next_sample: f64,
}

impl WirelineSim {
    pub fn new(g: &NetworkGraph, cfg: WirelineConfig) -> Result<Self, SimError> {
        cfg.function.validate()?;
        if !(cfg.lambda >= 0.0) || !cfg.lambda.is_finite() {
            return Err(SimError::Config(format!("lambda must be finite and >= 0, got {}", cfg.lambda)));
        }
        if !(cfg.horizon > 0.0) || !(cfg.sample_every > 0.0) {
            return Err(SimError::Config("horizon and sample interval must be positive".into()));
        }
        let acyclic = g.is_acyclic();
        if !acyclic && !cfg.allow_cyclic {
            g.topological_order()?;
        }
        let mut sim = WirelineSim {
            adj: Adjacency::new(g),
            g: g.clone(),
            acyclic,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            now: 0.0,
            seq: 0,
            events: BinaryHeap::new(),
            next_round: 0,
            rounds: HashMap::new(),
            idle: BTreeMap::new(),
            masks: HashMap::new(),
            active: BTreeSet::new(),
            busy: vec![None; g.num_links()],
            latency: LatencyStats::default(),
            metrics: TraceMetrics::default(),
            next_sample: cfg.sample_every,
            cfg,
        };
        if sim.cfg.lambda > 0.0 {
            let dt = exp_sample(&mut sim.rng, sim.cfg.lambda);
            sim.push(dt, EventKind::Arrival);
        }
        Ok(sim)
    }

    pub fn graph(&self) -> &NetworkGraph {
        &self.g
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn rounds_in_flight(&self) -> usize {
        self.rounds.len()
    }

    pub fn view(&self, r: RoundId) -> Option<RoundView> {
        self.rounds.get(&r).map(Round::view)
    }

    /// Round currently on `link`, if any.
    pub fn transfer_on(&self, link: LinkId) -> Option<RoundId> {
        self.busy[link].map(|(r, _)| r)
    }

    /// Payload of round `r` held at `node`.
    pub fn payload(&self, r: RoundId, node: NodeId) -> Option<&Payload> {
        let round = self.rounds.get(&r)?;
        round.footprint.contains(node).then(|| &round.payload[node])
    }

    pub fn metrics(&self) -> &TraceMetrics {
        &self.metrics
    }

    /// Idle-round counts per footprint class.
    pub fn footprint_counts(&self) -> Vec<(NodeSet, usize)> {
        self.idle.iter().map(|(&s, v)| (s, v.len())).collect()
    }

    fn push(&mut self, dt: f64, kind: EventKind) {
        self.seq += 1;
        self.events.push(Event { time: self.now + dt, seq: self.seq, kind });
    }

    fn useful(&self, r: &RoundView, link: LinkId) -> bool {
        if self.g.capacity(link) <= 0.0 || !self.adj.useful(r, link) {
            return false;
        }
        if self.acyclic {
            return true;
        }
        let rest = r.settled().without(self.adj.ends[link].0);
        reaches_aggregator(&self.g, rest) == rest
    }

    fn idle_mask(&mut self, s: NodeSet) -> &[bool] {
        if !self.masks.contains_key(&s) {
            let view = RoundView::idle(s);
            let m = (0..self.g.num_links()).map(|l| self.useful(&view, l)).collect();
            self.masks.insert(s, m);
        }
        &self.masks[&s]
    }

    /// Is round `r` currently useful on `link`?
    pub fn round_useful(&self, r: RoundId, link: LinkId) -> bool {
        self.rounds.get(&r).is_some_and(|round| self.useful(&round.view(), link))
    }

    /// Rounds with a useful packet across `link`, idle classes first (in
    /// footprint order) then active rounds by id.
    pub fn useful_candidates(&mut self, link: LinkId) -> Vec<RoundId> {
        let classes: Vec<NodeSet> = self.idle.keys().copied().collect();
        let mut out = Vec::new();
        for s in classes {
            if self.idle_mask(s)[link] {
                out.extend(&self.idle[&s]);
            }
        }
        out.extend(self.active.iter().filter(|&&r| self.round_useful(r, link)));
        out
    }

    /// Picks a useful packet for `link` uniformly at random. Idle rounds are
    /// counted through their footprint class, active rounds one by one.
    pub fn select_packet(&mut self, link: LinkId) -> Option<RoundId> {
        let classes: Vec<NodeSet> = self.idle.keys().copied().collect();
        let mut idle_total = 0usize;
        let mut useful_classes = Vec::new();
        for s in classes {
            if self.idle_mask(s)[link] {
                idle_total += self.idle[&s].len();
                useful_classes.push(s);
            }
        }
        let active: Vec<RoundId> = self.active.iter().copied().filter(|&r| self.round_useful(r, link)).collect();
        let total = idle_total + active.len();
        if total == 0 {
            return None;
        }
        let mut k = self.rng.random_range(0..total);
        for s in useful_classes {
            let members = &self.idle[&s];
            if k < members.len() {
                return Some(members[k]);
            }
            k -= members.len();
        }
        Some(active[k])
    }

    /// Adds a round at the current time without starting any transfer.
    pub fn add_round(&mut self) -> RoundId {
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
        }
        let full = NodeSet::full(n);
        self.rounds.insert(
            id,
            Round {
                arrival: self.now,
                footprint: full,
                senders: NodeSet::EMPTY,
                receivers: NodeSet::EMPTY,
                inbound: vec![0; n],
                transfers: Vec::new(),
                payload,
                contributors,
                sensed,
            },
        );
        self.idle.entry(full).or_default().push(id);
        self.metrics.arrived += 1;
        id
    }

    /// Starts sending round `r`'s packet across the idle `link`.
    pub fn start_transfer(&mut self, link: LinkId, r: RoundId) -> Result<(), SimError> {
        if self.busy[link].is_some() {
            return Err(SimError::Invariant(format!("link {link} already busy")));
        }
        if !self.round_useful(r, link) {
            return Err(SimError::Invariant(format!("round {r} not useful on link {link}")));
        }
        let (u, v) = self.adj.ends[link];
        let round = self.rounds.get_mut(&r).expect("checked above");
        if round.transfers.is_empty() {
            let class = self.idle.get_mut(&round.footprint).expect("idle round has a class");
            let pos = class.iter().position(|&x| x == r).expect("idle round in its class");
            class.swap_remove(pos);
            if class.is_empty() {
                self.idle.remove(&round.footprint);
            }
            self.active.insert(r);
        }
        round.senders.insert(u);
        round.receivers.insert(v);
        round.inbound[v] += 1;
        round.transfers.push(link);
        self.seq += 1;
        let token = self.seq;
        self.busy[link] = Some((r, token));
        let dt = exp_sample(&mut self.rng, self.g.capacity(link));
        self.push(dt, EventKind::Completion { link, token });
        self.metrics.transfers += 1;
        Ok(())
    }

    /// Finishes the transfer on `link`: merges the packet into the receiver,
    /// drops the sender from the footprint, and completes the round if only
    /// the aggregator is left. Does not start new transfers.
    pub fn on_completion(&mut self, link: LinkId) -> Result<Completion, SimError> {
        let (r, _) = self.busy[link]
            .take()
            .ok_or_else(|| SimError::Invariant(format!("no transfer on link {link}")))?;
        let (u, v) = self.adj.ends[link];
        let f = self.cfg.function;
        let a = self.g.aggregator();
        let round = self.rounds.get_mut(&r).expect("busy link refers to a live round");
        if !round.footprint.contains(v) {
            return Err(SimError::Invariant(format!("round {r}: receiver {v} left the footprint")));
        }
        if !round.contributors[u].is_disjoint(round.contributors[v]) {
            return Err(SimError::Invariant(format!("round {r}: readings merged twice at {v}")));
        }
        let incoming = std::mem::replace(&mut round.payload[u], f.identity());
        f.absorb(&mut round.payload[v], &incoming);
        round.contributors[v] = round.contributors[v].union(round.contributors[u]);
        round.contributors[u] = NodeSet::EMPTY;
        round.footprint.remove(u);
        round.senders.remove(u);
        round.inbound[v] -= 1;
        if round.inbound[v] == 0 {
            round.receivers.remove(v);
        }
        round.transfers.retain(|&l| l != link);

        if self.cfg.check_invariants && !is_valid_footprint(&self.g, round.footprint) {
            return Err(SimError::Invariant(format!("round {r}: footprint {:?} not valid", round.footprint)));
        }
        let mut finished = false;
        if round.transfers.is_empty() {
            self.active.remove(&r);
            if round.footprint == NodeSet::singleton(a) {
                finished = true;
                let round = self.rounds.remove(&r).expect("live round");
                self.finish(r, round)?;
            } else {
                self.idle.entry(round.footprint).or_default().push(r);
            }
        }
        Ok(Completion { round: r, link, finished })
    }

    fn finish(&mut self, r: RoundId, round: Round) -> Result<(), SimError> {
        let a = self.g.aggregator();
        let f = self.cfg.function;
        let all = NodeSet::full(self.g.num_nodes()).without(a);
        if round.contributors[a] != all {
            return Err(SimError::Invariant(format!(
                "round {r}: aggregator holds readings of {:?}, expected {:?}",
                round.contributors[a], all
            )));
        }
        let readings: Vec<Value> = self.g.sensors().map(|i| round.sensed[i]).collect();
        let expected = f.offline_evaluate(&readings);
        let got = f.finalize(&round.payload[a]);
        self.metrics.oracle_checks += 1;
        if expected != got {
            return Err(SimError::OracleMismatch { round: r, expected, got });
        }
        self.latency.push(self.now - round.arrival);
        self.metrics.completed += 1;
        Ok(())
    }

    /// Restores the activity condition after rounds in `dirty` changed state
    /// and `freed` became idle. Only changed rounds can have become useful on
    /// links that were already idle.
    fn conserve(&mut self, mut dirty: Vec<RoundId>, freed: Option<LinkId>) -> Result<(), SimError> {
        if let Some(l) = freed {
            if let Some(r) = self.select_packet(l) {
                self.start_transfer(l, r)?;
                dirty.push(r);
            }
        }
        while let Some(r) = dirty.pop() {
            if !self.rounds.contains_key(&r) {
                continue;
            }
            let mut idle: Vec<LinkId> = (0..self.g.num_links()).filter(|&l| self.busy[l].is_none()).collect();
            idle.shuffle(&mut self.rng);
            for l in idle {
                if self.busy[l].is_none() && self.round_useful(r, l) {
                    let pick = self.select_packet(l).expect("a useful round exists");
                    self.start_transfer(l, pick)?;
                    dirty.push(pick);
                }
            }
        }
        Ok(())
    }

    /// Every idle link has no useful packet.
    pub fn check_activity(&mut self) -> Result<(), SimError> {
        for l in 0..self.g.num_links() {
            if self.busy[l].is_none() {
                if let Some(r) = self.useful_candidates(l).first() {
                    return Err(SimError::Invariant(format!("link {l} idle while round {r} is useful")));
                }
            }
        }
        Ok(())
    }

    fn check_all(&mut self) -> Result<(), SimError> {
        self.check_activity()?;
        for (r, round) in &self.rounds {
            if !is_valid_footprint(&self.g, round.footprint) || !is_valid_footprint(&self.g, round.view().settled()) {
                return Err(SimError::Invariant(format!("round {r}: invalid footprint {:?}", round.footprint)));
            }
            let senders = round.transfers.iter().map(|&l| self.adj.ends[l].0);
            if senders.clone().collect::<NodeSet>().len() != round.transfers.len() {
                return Err(SimError::Invariant(format!("round {r}: node sending twice")));
            }
        }
        self.metrics.invariant_checks += 1;
        Ok(())
    }

    fn record_until(&mut self, t: f64) {
        while self.next_sample <= t {
            let time = self.next_sample;
            self.metrics.samples.push(WirelineSample {
                time,
                rounds_in_flight: self.rounds.len() as u64,
                completed: self.metrics.completed,
                mean_latency: self.latency.mean(),
            });
            if self.cfg.record_footprints && self.g.num_nodes() <= MAX_COUNTER_NODES {
                let counts = self.footprint_counts();
                self.metrics.footprints.push(FootprintSnapshot { time, counts });
            }
            self.next_sample = self.cfg.sample_every * (self.metrics.samples.len() + 1) as f64;
        }
    }

    /// Processes the next event if it falls within the horizon.
    pub fn step(&mut self) -> Result<bool, SimError> {
        let Some(&ev) = self.events.peek() else {
            self.record_until(self.cfg.horizon);
            return Ok(false);
        };
        if ev.time > self.cfg.horizon {
            self.record_until(self.cfg.horizon);
            return Ok(false);
        }
        self.events.pop();
        self.record_until(ev.time);
        self.now = ev.time;
        self.metrics.events += 1;
        match ev.kind {
            EventKind::Arrival => {
                let r = self.add_round();
                let dt = exp_sample(&mut self.rng, self.cfg.lambda);
                self.push(dt, EventKind::Arrival);
                self.conserve(vec![r], None)?;
            }
            EventKind::Completion { link, token } => {
                if self.busy[link].map(|(_, t)| t) != Some(token) {
                    return Ok(true);
                }
                let c = self.on_completion(link)?;
                let dirty = if c.finished { Vec::new() } else { vec![c.round] };
                self.conserve(dirty, Some(link))?;
            }
        }
        if self.cfg.check_invariants {
            self.check_all()?;
        }
        Ok(true)
    }

    pub fn run(mut self) -> Result<TraceMetrics, SimError> {
        while self.step()? {}
        self.metrics.mean_latency = self.latency.mean();
        if self.rounds.len() as u64 > self.metrics.completed.max(1000) {
            debug!("{} rounds still in flight at the horizon", self.rounds.len());
        }
        Ok(self.metrics)
    }
}

/// Runs the simulator to the horizon.
pub fn run(g: &NetworkGraph, cfg: WirelineConfig) -> Result<TraceMetrics, SimError> {
    if !g.is_acyclic() && cfg.allow_cyclic {
        warn!("cyclic graph: starts are guarded by an explicit reachability check");
    }
    WirelineSim::new(g, cfg)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{triangle, Topology};

    fn set(v: &[usize]) -> NodeSet {
        v.iter().copied().collect()
    }

    fn figure1() -> NetworkGraph {
        NetworkGraph::new(4, 0, &[(1, 0, 1.0), (2, 1, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap()
    }

    #[test]
    fn figure1_cases() {
        let g = figure1();
        let r = RoundView::idle(set(&[0, 2, 3]));
        assert!(!is_useful(&g, &r, g.link_id(2, 1).unwrap()));
        assert!(!is_useful(&g, &r, g.link_id(3, 0).unwrap()));
        assert!(is_useful(&g, &r, g.link_id(2, 3).unwrap()));
    }

    #[test]
    fn senders_and_receivers_restrict_usefulness() {
        let g = triangle();
        let l10 = g.link_id(1, 0).unwrap();
        let l21 = g.link_id(2, 1).unwrap();
        // 1 is receiving from 2: it cannot send yet
        let r = RoundView { footprint: set(&[0, 1, 2]), senders: set(&[2]), receivers: set(&[1]) };
        assert!(!is_useful(&g, &r, l10));
        // the aggregator never sends, and nobody sends to a departing node
        let r = RoundView { footprint: set(&[0, 1, 2]), senders: set(&[1]), receivers: set(&[0]) };
        assert!(!is_useful(&g, &r, l21));
    }

    fn cfg(lambda: f64) -> WirelineConfig {
        WirelineConfig { lambda, seed: 7, horizon: 200.0, check_invariants: true, ..Default::default() }
    }

    #[test]
    fn two_node_completion() {
        let g = NetworkGraph::new(2, 0, &[(1, 0, 1.0)]).unwrap();
        let mut sim = WirelineSim::new(&g, cfg(0.0)).unwrap();
        let r = sim.add_round();
        sim.start_transfer(0, r).unwrap();
        let c = sim.on_completion(0).unwrap();
        assert!(c.finished);
        assert_eq!(sim.metrics().completed, 1);
        assert!(sim.view(r).is_none());
    }

    #[test]
    fn triangle_hand_trace() {
        let g = triangle();
        let mut sim = WirelineSim::new(&g, WirelineConfig { function: FmuxFunction::max(16), ..cfg(0.0) }).unwrap();
        let r = sim.add_round();
        let l21 = g.link_id(2, 1).unwrap();
        let before = sim.payload(r, 2).cloned().unwrap();
        let mine = sim.payload(r, 1).cloned().unwrap();
        sim.start_transfer(l21, r).unwrap();
        sim.on_completion(l21).unwrap();
        assert_eq!(sim.view(r).unwrap().footprint, set(&[0, 1]));
        assert_eq!(sim.payload(r, 1).unwrap(), &FmuxFunction::max(16).combine(&before, &mine));
    }

    #[test]
    fn concurrent_transfers_are_independent() {
        let g = triangle();
        let mut sim = WirelineSim::new(&g, cfg(0.0)).unwrap();
        let r = sim.add_round();
        let l20 = g.link_id(2, 0).unwrap();
        let l10 = g.link_id(1, 0).unwrap();
        sim.start_transfer(l20, r).unwrap();
        sim.start_transfer(l10, r).unwrap();
        let c = sim.on_completion(l10).unwrap();
        assert!(!c.finished);
        assert_eq!(sim.transfer_on(l20), Some(r));
        assert!(sim.on_completion(l20).unwrap().finished);
    }

    #[test]
    fn no_arrivals_no_rounds() {
        let g = triangle();
        let m = run(&g, cfg(0.0)).unwrap();
        assert!(m.samples.iter().all(|s| s.rounds_in_flight == 0));
        assert_eq!(m.samples.len(), 200);
    }

    #[test]
    fn invariants_hold_on_small_run() {
        let g = Topology::Grid { n: 9, capacity: 1.0 }.generate().unwrap();
        let g2 = Topology::RandomDag { n: 6, p: 0.5, cap_min: 1, cap_max: 3, seed: 3 }.generate().unwrap();
        for f in [FmuxFunction::Parity, FmuxFunction::kth(2, 8)] {
            let m = run(&g2, WirelineConfig { function: f, ..cfg(0.5) }).unwrap();
            assert!(m.completed > 20);
            assert_eq!(m.completed, m.oracle_checks);
        }
        assert!(matches!(run(&g, cfg(0.5)), Err(SimError::Graph(_))));
        let m = run(&g, WirelineConfig { allow_cyclic: true, ..cfg(0.5) }).unwrap();
        assert!(m.completed > 20);
    }

    #[test]
    fn same_seed_same_trace() {
        let g = triangle();
        let mut a = Vec::new();
        let mut b = Vec::new();
        run(&g, cfg(0.6)).unwrap().write_csv(&mut a).unwrap();
        run(&g, cfg(0.6)).unwrap().write_csv(&mut b).unwrap();
        assert_eq!(a, b);
    }
}
