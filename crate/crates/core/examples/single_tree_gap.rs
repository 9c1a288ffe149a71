//! One star tree against greedy loading over four trees on K5.
//!
//! cargo run --release --example single_tree_gap

use fmuxnet::harness::{sweep, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let single = sweep(&ExperimentConfig::load(format!("{dir}/k5_single_tree_sweep.json"))?, None)?;
    let greedy = sweep(&ExperimentConfig::load(format!("{dir}/k5_greedy_sweep.json"))?, None)?;
    for s in [&single, &greedy] {
        println!("{}:", s.policy);
        for l in &s.lambdas {
            println!("  lambda {:<4} {:?}", l.lambda, l.verdict);
        }
    }
    let (a, b) = (single.lambda_hat.unwrap_or(0.0), greedy.lambda_hat.unwrap_or(0.0));
    println!("lambda_hat {a} vs {b}, ratio {:.2}", b / a);
    Ok(())
}
