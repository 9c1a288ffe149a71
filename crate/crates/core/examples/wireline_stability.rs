//! Wireline K5 below and above the min-mincut, judged by the slope detector.
//!
//! cargo run --release --example wireline_stability [horizon]

use fmuxnet::graph::Topology;
use fmuxnet::harness::{detect_stability, DetectorParams};
use fmuxnet::wireline::{self, WirelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let horizon: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(50_000.0);
    let g = Topology::Complete { n: 5, capacity: 1.0 }.generate()?;
    for lambda in [3.6, 4.4] {
        let m = wireline::run(&g, WirelineConfig { lambda, seed: 1, horizon, allow_cyclic: true, ..Default::default() })?;
        let p = DetectorParams::defaults(lambda, g.num_nodes());
        let v = detect_stability(&m.series(), 1.0, &p)?;
        println!("lambda {lambda}: {:?}, slope {:.4} (stable <= {:.3}), max {} (cap {})",
            v.verdict, v.slope, p.eps_stable, v.max_queue, p.q_cap);
    }
    Ok(())
}
