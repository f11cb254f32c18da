// Attach every monitor to one solve and print the per-inequality summary.

use std::error::Error;

use triofm::engine::{init_random, DomainBounds, SolverConfig, StopRule};
use triofm::experiments::run_monitored;
use triofm::linalg::{SparseSymMatrix, Spectrum};
use triofm::theory::monitors::MonitorOptions;
use triofm::theory::MonitorKind;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let d = [-4.0, -2.0, -1.0, 0.5, 3.0];
    let a = SparseSymMatrix::from_diagonal(&d)?;
    let s = Spectrum::for_diagonal(&d);
    let cfg = SolverConfig {
        stop: StopRule::EigenvectorError,
        tol: 1e-9,
        monitors: MonitorKind::ALL.to_vec(),
        ..SolverConfig::new(2)
    };
    let x0 = init_random(a.n(), &DomainBounds::for_matrix(&a, 2)?, 4)?;
    let run = run_monitored(&a, &cfg, x0, &s, &MonitorOptions::default())?;

    println!("{:?} after {} iterations", run.solution.outcome, run.solution.iterations());
    for r in &run.reports {
        println!("{:<14} {:?}", r.monitor, r.status);
        for (name, l) in &r.lemmas {
            println!("  {name:<28} {:>7} checks, worst margin {:.3e}", l.checks, l.worst_margin);
        }
        assert!(r.passed(), "{} failed", r.monitor);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
