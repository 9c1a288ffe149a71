//! Footprint classes, the fluid Lyapunov function and the counting lemma.
//!
//! cargo run --example counting_lemma

use fmuxnet::graph::triangle;
use fmuxnet::nodeset::NodeSet;
use fmuxnet::wireline::{counting_lemma_report, fluid_lyapunov, lemma_betas, valid_footprint_sets, Counters};

fn main() {
    let g = triangle();
    let sets = valid_footprint_sets(&g);
    println!("valid footprints: {sets:?}");

    let mut x: Counters = sets.iter().map(|&s| (s, 0.0)).collect();
    x.insert([0, 2].into_iter().collect::<NodeSet>(), 1.0);
    x.insert(NodeSet::full(3), 0.1);
    for alpha in [0.1, 1.0, 10.0] {
        let beta = lemma_betas(alpha, g.num_nodes());
        let r = counting_lemma_report(&g, &x, alpha, &beta);
        println!("alpha {alpha}: L = {:.3}, {} tuples checked, {} violations",
            fluid_lyapunov(&g, &x, alpha), r.checked, r.violations.len());
        if let Some(v) = r.violations.first() {
            println!("  {v:?}");
        }
    }
}
