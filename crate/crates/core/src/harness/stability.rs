//! Empirical stability verdicts from a queue-size time series.

use serde::{Deserialize, Serialize};

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    /// Samples per window.
    pub window: usize,
    /// Fraction of the series discarded at the start.
    pub burn_in: f64,
    /// Stable requires slope at most this (queue units per time unit).
    pub eps_stable: f64,
    /// Unstable requires slope at least this.
    pub eps_unstable: f64,
    /// Stable also requires the post-burn-in maximum at most this.
    pub q_cap: f64,
}

impl DetectorParams {
    /// `eps_s = 0.01 lambda`, `eps_u = 0.05 lambda`, `Q_cap = 50 lambda N`.
    pub fn defaults(lambda: f64, num_nodes: usize) -> Self {
        DetectorParams {
            window: 1000,
            burn_in: 0.2,
            eps_stable: 0.01 * lambda,
            eps_unstable: 0.05 * lambda,
            q_cap: 50.0 * lambda * num_nodes as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub slope: f64,
    pub max_queue: f64,
    pub verdict: Verdict,
}

/// Discards the burn-in, averages each window, fits a least-squares line to
/// the window means against time and applies the thresholds. `dt` is the
/// time between samples.
pub fn detect_stability(series: &[f64], dt: f64, p: &DetectorParams) -> Result<StabilityVerdict, HarnessError> {
    if p.window == 0 || series.len() < p.window * 10 {
        return Err(HarnessError::SeriesTooShort { len: series.len(), needed: p.window.max(1) * 10 });
    }
    let start = (series.len() as f64 * p.burn_in).ceil() as usize;
    let tail = &series[start..];
    let max_queue = tail.iter().copied().fold(0.0, f64::max);
    let points: Vec<(f64, f64)> = tail
        .chunks_exact(p.window)
        .enumerate()
        .map(|(k, w)| {
            let t = (start as f64 + (k as f64 + 0.5) * p.window as f64) * dt;
            (t, w.iter().sum::<f64>() / w.len() as f64)
        })
        .collect();
    let slope = ols_slope(&points);
    let verdict = if slope <= p.eps_stable && max_queue <= p.q_cap {
        Verdict::Stable
    } else if slope >= p.eps_unstable {
        Verdict::Unstable
    } else {
        Verdict::Inconclusive
    };
    Ok(StabilityVerdict { slope, max_queue, verdict })
}

fn ols_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return 0.0;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
