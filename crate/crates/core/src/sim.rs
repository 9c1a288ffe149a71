//! Pieces shared by both simulators.

use rand::Rng;
use thiserror::Error;

use crate::flows::FlowError;
use crate::fmux::{FmuxError, Value};
use crate::graph::GraphError;

pub type RoundId = u64;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("round {round}: aggregated output {got:?} but offline value is {expected:?}")]
    OracleMismatch { round: RoundId, expected: Option<Value>, got: Option<Value> },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("bad configuration: {0}")]
    Config(String),
    #[error("single-tree policy needs exactly one tree, got {0}")]
    MultiTreeConfig(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Fmux(#[from] FmuxError),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

/// Exponential variate with the given rate, by inverse CDF.
pub fn exp_sample<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

/// Running mean of completion latencies.
#[derive(Debug, Clone, Copy, Default)]
pub struct LatencyStats {
    pub count: u64,
    pub sum: f64,
}

impl LatencyStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        self.sum += x;
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum / self.count as f64
        }
    }
}
