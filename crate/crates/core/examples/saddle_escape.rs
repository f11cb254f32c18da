// Start next to random saddle points and watch every trial reach the
// stable set after a slow start.

use std::error::Error;

use triofm::experiments::{saddle_escape, SaddleConfig};
use triofm::linalg::{SparseSymMatrix, Spectrum};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let d = [-5.0, -3.0, -2.0, -1.0, 1.0, 2.0];
    let a = SparseSymMatrix::from_diagonal(&d)?;
    let s = Spectrum::for_diagonal(&d);

    let mut cfg = SaddleConfig::new(3, 8);
    cfg.seed = 11;
    let summary = saddle_escape(&a, &s, &cfg)?;
    for t in &summary.trials {
        println!(
            "trial {} from {:<14} {:>7} iterations, escape at t = {:?}, slow start: {}",
            t.index, t.saddle, t.iterations, t.plateau.escape_t, t.plateau.holds
        );
    }
    println!("escaped {}/{}", summary.successes, summary.total);
    assert!(summary.all_escaped());
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
