//! Greedy tree loading with MaxWeight scheduling.
//!
//! cargo run --release --example wireless_greedy

use fmuxnet::flows::{complete_graph_depth2_trees, enumerate_aggregation_trees, ScheduleSet};
use fmuxnet::graph::{triangle, Topology};
use fmuxnet::wireless::{self, Policy, WirelessConfig, WirelessSim};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // shared channel: one of the three links per slot
    let g = triangle();
    let gamma = ScheduleSet::singletons(&g, 1.0);
    let trees = enumerate_aggregation_trees(&g, 10)?;
    let cfg = WirelessConfig { lambda: 0.45, seed: 1, horizon: 12, policy: Policy::GreedyMaxweight, ..Default::default() };
    let mut sim = WirelessSim::new(&g, &gamma, &trees, cfg.clone())?;
    for _ in 0..12 {
        sim.step()?;
        println!("slot {:3}  queues {:?}  V {}", sim.slot(), sim.queue_lengths(), sim.lyapunov());
    }
    let m = wireless::run(&g, &gamma, &trees, WirelessConfig { horizon: 100_000, ..cfg })?;
    println!("shared channel: {} rounds, mean latency {:.2}, schedule use {:?}", m.completed, m.mean_latency, m.schedule_counts);

    // K5 with the four depth-2 trees: greedy loading spreads rounds evenly
    let k5 = Topology::Complete { n: 5, capacity: 1.0 }.generate()?;
    let wired = ScheduleSet::wired(&k5);
    let depth2 = complete_graph_depth2_trees(&k5)?;
    let lambda = 3.9;
    let m = wireless::run(&k5, &wired, &depth2, WirelessConfig { lambda, seed: 2, horizon: 50_000, ..Default::default() })?;
    let loads: Vec<f64> = m.tree_rounds.iter().map(|&r| r as f64 / m.slots as f64).collect();
    println!("K5 at lambda {lambda}: per-tree load {loads:.3?} (lambda/4 = {:.3})", lambda / 4.0);
    Ok(())
}
