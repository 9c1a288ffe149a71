//! The randomized static policy: schedules drawn from the optimal split.
//!
//! cargo run --release --example static_sss

use fmuxnet::flows::{enumerate_aggregation_trees, ScheduleSet};
use fmuxnet::graph::triangle;
use fmuxnet::wireless::{self, static_sss_plan, Policy, WirelessConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = triangle();
    let gamma = ScheduleSet::singletons(&g, 1.0);
    let trees = enumerate_aggregation_trees(&g, 10)?;
    let plan = static_sss_plan(&g, &gamma, &trees)?;
    println!("value {:.3}, schedule weights {:?}, tree split {:?}", plan.value, plan.rule.weights(), plan.tree_weights);

    let slots = 100_000;
    let cfg = WirelessConfig { lambda: 0.45, seed: 3, horizon: slots, policy: Policy::StaticSss, ..Default::default() };
    let m = wireless::run(&g, &gamma, &trees, cfg)?;
    for (k, &n) in m.schedule_counts.iter().enumerate() {
        println!("schedule {k}: {:.4} of slots (target {:.4})", n as f64 / slots as f64, plan.rule.weights()[k]);
    }
    let s = m.series();
    println!("mean rounds in flight {:.2}, {} completed", s.iter().sum::<f64>() / s.len() as f64, m.completed);
    Ok(())
}
