// Record a trace as CSV, read it back and re-run the trace-based checks.

use std::error::Error;

use triofm::engine::{init_random, DomainBounds, SolverConfig};
use triofm::experiments::{run_monitored, verify_replay, Suite, VerifyConfig};
use triofm::io::{read_trace_csv, write_trace_csv};
use triofm::linalg::{SparseSymMatrix, Spectrum};
use triofm::theory::monitors::MonitorOptions;
use triofm::theory::MonitorKind;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let d = [-3.0, -2.5, -1.0, 2.0];
    let a = SparseSymMatrix::from_diagonal(&d)?;
    let s = Spectrum::for_diagonal(&d);
    let cfg = SolverConfig {
        trace_every: 1,
        monitors: vec![MonitorKind::Bounds, MonitorKind::Tangent, MonitorKind::NormFloor],
        ..SolverConfig::new(2)
    };
    let x0 = init_random(a.n(), &DomainBounds::for_matrix(&a, 2)?, 0)?;
    let run = run_monitored(&a, &cfg, x0, &s, &MonitorOptions::default())?;

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("trace.csv");
    write_trace_csv(&run.solution.trace, cfg.p, &path)?;
    let trace = read_trace_csv(&path)?;
    println!("{} rows in {}", trace.len(), path.display());

    let vcfg = VerifyConfig::new(cfg.p);
    for (live, suite) in run.reports.iter().zip([Suite::Bounds, Suite::Tangent, Suite::NormFloor]) {
        let replayed = verify_replay(&a, &s, "gen:diag", suite, &vcfg, &trace)?;
        let status = replayed.suites[0].status;
        println!("{:<12} live {:?}, replayed {:?}", live.monitor, live.status, status);
        assert_eq!(live.status, status);
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
