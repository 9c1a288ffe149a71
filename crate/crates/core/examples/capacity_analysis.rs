//! Min-mincut, Edmonds packing and the best static schedule split.
//!
//! cargo run --example capacity_analysis

use fmuxnet::flows::{
    complete_graph_depth2_trees, enumerate_aggregation_trees, max_refresh_rate, min_mincut, optimal_sss,
    tree_packing_lp, RateVector, ScheduleSet,
};
use fmuxnet::fmux::FmuxFunction;
use fmuxnet::graph::{triangle, Topology};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k5 = Topology::Complete { n: 5, capacity: 1.0 }.generate()?;
    let caps = RateVector::from_graph(&k5);
    let cut = min_mincut(&k5, &caps);
    println!("K5: min-mincut {} (attained at node {})", cut.value, cut.argmin);

    let all = enumerate_aggregation_trees(&k5, 100_000)?;
    let packing = tree_packing_lp(&k5, &caps, &all)?;
    println!("{} aggregation trees, packing total {:.6}", all.len(), packing.total);

    // the four depth-2 trees: each one is a star through a different relay
    let witness = complete_graph_depth2_trees(&k5)?;
    let w = tree_packing_lp(&k5, &caps, &witness)?;
    for e in &w.entries {
        println!("  weight {:.3}  parents {:?}", e.weight, e.tree.parents());
    }
    println!("  min slack {:.2e}", w.min_slack(&k5, &caps));

    for f in [FmuxFunction::Parity, FmuxFunction::max(16), FmuxFunction::kth(2, 16)] {
        println!("{:>6}: {:.2} bits/packet, lambda* = {:.4} rounds per unit at 4 bits/unit",
            f.name(), f.bits_per_packet(), max_refresh_rate(4.0, &f));
    }

    // three links sharing one channel: one link at a time
    let g = triangle();
    let gamma = ScheduleSet::singletons(&g, 1.0);
    let opt = optimal_sss(&g, &gamma)?;
    println!("shared channel: value {:.4}, schedule weights {:?}", opt.value, opt.rule.weights());
    println!("  induced rates {:?}", &opt.rates[..]);
    Ok(())
}
