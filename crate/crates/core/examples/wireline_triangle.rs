//! Random useful-packet forwarding on the three-node DAG, event by event.
//!
//! cargo run --example wireline_triangle

use fmuxnet::fmux::FmuxFunction;
use fmuxnet::graph::triangle;
use fmuxnet::wireline::{self, WirelineConfig, WirelineSim};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = triangle();
    let cfg = WirelineConfig {
        lambda: 0.5,
        function: FmuxFunction::max(16),
        seed: 7,
        horizon: 12.0,
        check_invariants: true,
        ..Default::default()
    };
    let mut sim = WirelineSim::new(&g, cfg.clone())?;
    while sim.step()? {
        let busy: Vec<String> = (0..g.num_links())
            .filter_map(|l| sim.transfer_on(l).map(|r| format!("{}->{}:r{r}", g.link(l).from, g.link(l).to)))
            .collect();
        println!("t={:7.3}  in flight {}  idle {:?}  busy [{}]",
            sim.now(), sim.rounds_in_flight(), sim.footprint_counts(), busy.join(" "));
    }
    let m = sim.metrics();
    println!("{} rounds done, {} checked against the offline value", m.completed, m.oracle_checks);

    // a longer run at 90% of the min-mincut
    let long = wireline::run(&g, WirelineConfig { lambda: 0.9, horizon: 20_000.0, sample_every: 100.0, ..cfg })?;
    println!("lambda 0.9: {} arrived, {} completed, mean latency {:.3}", long.arrived, long.completed, long.mean_latency);
    let mut csv = Vec::new();
    long.write_csv(&mut csv)?;
    for line in String::from_utf8(csv)?.lines().take(4) {
        println!("  {line}");
    }
    Ok(())
}
