// The per-column energy with a frozen converged prefix: its stationary
// points, neighborhood radii, and a descent run checked step by step.

use std::error::Error;

use triofm::engine::{auto_stepsize, DomainBounds};
use triofm::linalg::{SparseSymMatrix, Spectrum};
use triofm::theory::monitors::run_frozen_descent;
use triofm::theory::{EnergyContext, EpsilonThresholds};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let d = [-4.0, -2.0, -1.0, 3.0];
    let a = SparseSymMatrix::from_diagonal(&d)?;
    let s = Spectrum::for_diagonal(&d);
    let i = 1;

    let ctx = EnergyContext::new(&a, &s, i)?;
    for p in ctx.stationary_set() {
        println!("stationary {:<4} F = {:.3}", p.label.to_string(), p.energy);
    }
    let eps = EpsilonThresholds::new(&s, i)?;
    println!(
        "epsilon thresholds: proximity {:.3e}, no-return {:.3e}, same-return {:.3e}",
        eps.proximity, eps.no_return, eps.same_return
    );

    let bounds = DomainBounds::for_matrix(&a, 3)?;
    let alpha = auto_stepsize(&bounds);
    let x0 = [0.3, -0.4, 0.2, 0.1];
    let report = run_frozen_descent(&a, &s, i, alpha, &x0, 1e-3, 100_000, 1e-5)?;
    println!("{:?}: {} checks, worst margin {:?}", report.status, report.checks, report.worst_margin);
    for n in &report.notes {
        println!("  {n}");
    }
    assert!(report.passed());
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
