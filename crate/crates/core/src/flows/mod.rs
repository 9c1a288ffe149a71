//! Capacity analysis: max-flow/min-cut, the min-mincut bottleneck, the
//! aggregation-tree packing LP and the best static service split.

mod maxflow;
mod packing;
mod trees;

use std::fs;
use std::ops::{Deref, DerefMut};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, LinkId, NetworkGraph, NodeId};
use crate::lp::LpError;

pub use maxflow::{max_flow, min_mincut, MaxFlow, MinMincut};
pub use packing::{
    max_refresh_rate, optimal_sss, refresh_rate, rule_min_mincut, tree_packing_lp, OptimalSss, PackedTree, TreePacking,
};
pub use trees::{
    complete_graph_depth2_trees, enumerate_aggregation_trees, AggregationTree, TreeRecord, DEFAULT_TREE_LIMIT,
};

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("more than {0} aggregation trees; raise the limit or supply a tree list")]
    TooManyTrees(usize),
    #[error("invalid aggregation tree: {0}")]
    InvalidTree(String),
    #[error("invalid schedule set: {0}")]
    BadSchedule(String),
    #[error("invalid static service split: {0}")]
    BadRule(String),
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("LP failure: {0}")]
    Lp(#[from] LpError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed file: {0}")]
    Json(#[from] serde_json::Error),
}

/// Per-link rates indexed by [`LinkId`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateVector(Vec<f64>);

impl RateVector {
    pub fn new(rates: Vec<f64>) -> Self {
        RateVector(rates)
    }

    pub fn zeros(num_links: usize) -> Self {
        RateVector(vec![0.0; num_links])
    }

    /// The graph's own capacities.
    pub fn from_graph(g: &NetworkGraph) -> Self {
        RateVector(g.capacities().to_vec())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for RateVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for RateVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// One admissible schedule: the links it activates and their rates.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub links: Vec<LinkId>,
    pub rates: Vec<f64>,
}

/// The interference structure: a finite list of admissible schedules.
#[derive(Debug, Clone)]
pub struct ScheduleSet {
    schedules: Vec<Schedule>,
    dense: Vec<RateVector>,
}

impl ScheduleSet {
    pub fn new(g: &NetworkGraph, schedules: Vec<Schedule>, c_max: Option<f64>) -> Result<Self, FlowError> {
        if schedules.is_empty() {
            return Err(FlowError::Empty("schedule set"));
        }
        let mut dense = Vec::with_capacity(schedules.len());
        for (k, s) in schedules.iter().enumerate() {
            if s.links.len() != s.rates.len() {
                return Err(FlowError::BadSchedule(format!("schedule {k}: {} links but {} rates", s.links.len(), s.rates.len())));
            }
            let mut rv = RateVector::zeros(g.num_links());
            let mut seen = vec![false; g.num_links()];
            for (&l, &r) in s.links.iter().zip(&s.rates) {
                if l >= g.num_links() {
                    return Err(FlowError::BadSchedule(format!("schedule {k}: unknown link id {l}")));
                }
                if std::mem::replace(&mut seen[l], true) {
                    return Err(FlowError::BadSchedule(format!("schedule {k}: link {l} repeated")));
                }
                if !(r >= 0.0) {
                    return Err(FlowError::BadSchedule(format!("schedule {k}: negative rate {r}")));
                }
                if let Some(cm) = c_max {
                    if r > cm {
                        return Err(FlowError::BadSchedule(format!("schedule {k}: rate {r} exceeds c_max {cm}")));
                    }
                }
                rv[l] = r;
            }
            dense.push(rv);
        }
        Ok(ScheduleSet { schedules, dense })
    }

    /// Wireline special case: one schedule activating every link at capacity.
    pub fn wired(g: &NetworkGraph) -> Self {
        let s = Schedule { links: (0..g.num_links()).collect(), rates: g.capacities().to_vec() };
        ScheduleSet::new(g, vec![s], None).expect("graph capacities are valid rates")
    }

    /// Single shared channel: each schedule activates exactly one link.
    pub fn singletons(g: &NetworkGraph, rate: f64) -> Self {
        let s = (0..g.num_links()).map(|l| Schedule { links: vec![l], rates: vec![rate] }).collect();
        ScheduleSet::new(g, s, None).expect("nonnegative rate")
    }

    pub fn len(&self) -> usize {
        self.schedules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schedules.is_empty()
    }

    pub fn get(&self, k: usize) -> &Schedule {
        &self.schedules[k]
    }

    pub fn schedules(&self) -> &[Schedule] {
        &self.schedules
    }

    /// `c(I)` as a dense vector over all links.
    pub fn rates(&self, k: usize) -> &RateVector {
        &self.dense[k]
    }

    pub fn with_schedule(&self, g: &NetworkGraph, extra: Schedule) -> Result<Self, FlowError> {
        let mut s = self.schedules.clone();
        s.push(extra);
        ScheduleSet::new(g, s, None)
    }

    pub fn from_file(g: &NetworkGraph, file: &ScheduleFile) -> Result<Self, FlowError> {
        let mut schedules = Vec::with_capacity(file.schedules.len());
        for (k, rec) in file.schedules.iter().enumerate() {
            let links = rec
                .links
                .iter()
                .map(|&[u, v]| {
                    g.link_id(u, v)
                        .ok_or_else(|| FlowError::BadSchedule(format!("schedule {k}: link {u} -> {v} not in graph")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            schedules.push(Schedule { links, rates: rec.rates.clone() });
        }
        ScheduleSet::new(g, schedules, file.c_max)
    }

    pub fn load(g: &NetworkGraph, path: impl AsRef<Path>) -> Result<Self, FlowError> {
        let file: ScheduleFile = serde_json::from_str(&fs::read_to_string(path)?)?;
        Self::from_file(g, &file)
    }

    pub fn to_file(&self, g: &NetworkGraph) -> ScheduleFile {
        ScheduleFile {
            schedules: self
                .schedules
                .iter()
                .map(|s| ScheduleRecord {
                    links: s.links.iter().map(|&l| [g.link(l).from, g.link(l).to]).collect(),
                    rates: s.rates.clone(),
                })
                .collect(),
            c_max: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub schedules: Vec<ScheduleRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_max: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScheduleRecord {
    pub links: Vec<[NodeId; 2]>,
    pub rates: Vec<f64>,
}

/// Static service split: a probability distribution over a [`ScheduleSet`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SssRule {
    weights: Vec<f64>,
}

impl SssRule {
    pub fn new(weights: Vec<f64>) -> Result<Self, FlowError> {
        if weights.iter().any(|&w| !(w >= 0.0)) {
            return Err(FlowError::BadRule("negative weight".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(FlowError::BadRule(format!("weights sum to {sum}")));
        }
        Ok(SssRule { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `sum_I pi(I) c(I)`.
    pub fn induced_rates(&self, gamma: &ScheduleSet) -> RateVector {
        assert_eq!(self.weights.len(), gamma.len());
        let mut out = RateVector::zeros(gamma.rates(0).len());
        for (k, &w) in self.weights.iter().enumerate() {
            for (o, &c) in out.iter_mut().zip(gamma.rates(k).iter()) {
                *o += w * c;
            }
        }
        out
    }
}
