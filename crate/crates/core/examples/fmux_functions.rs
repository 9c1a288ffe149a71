//! Lift, combine and finalize for the three built-in functions.
//!
//! cargo run --example fmux_functions

use fmuxnet::fmux::FmuxFunction;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let readings = [3, 9, 1, 9, 4];
    for f in [FmuxFunction::Parity, FmuxFunction::max(16), FmuxFunction::kth(2, 16)] {
        let xs: Vec<u32> = readings.iter().map(|x| x % f.alphabet_size()).collect();
        // merge in two halves, as two branches of a tree would
        let left = f.lift_and_combine(&xs[..2])?;
        let right = f.lift_and_combine(&xs[2..])?;
        let merged = f.combine(&left, &right);
        println!("{:>6} of {xs:?}: {:?} (offline {:?}), {} payload bytes",
            f.name(), f.finalize(&merged), f.offline_evaluate(&xs), f.encode(&merged).len());
    }
    Ok(())
}
