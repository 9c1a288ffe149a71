//! Runs every verification suite and prints one line per check.
//!
//! cargo run --release --example verify_suites

use fmuxnet::harness::{verify, Suite};

fn main() {
    let report = verify(Suite::All);
    for c in &report.checks {
        println!("{} {:?}/{}: {}", if c.passed { "PASS" } else { "FAIL" }, c.suite, c.name, c.detail);
    }
}
