use crate::engine::{
    auto_stepsize, solve_observed, DomainBounds, EngineError, Solution, SolverConfig, StepObserver,
    Stepsize,
};
use crate::linalg::{IterateBlock, SparseSymMatrix, Spectrum};
use crate::theory::monitors::{MonitorOptions, MonitorSet, MonitorSetup};
use crate::theory::MonitorReport;

#[derive(Debug, Clone)]
pub struct MonitoredRun {
    pub solution: Solution,
    /// One report per entry of `cfg.monitors`, in order.
    pub reports: Vec<MonitorReport>,
}

/// Solves with the oracle attached and `cfg.monitors` observing every step.
pub fn run_monitored(
    a: &SparseSymMatrix,
    cfg: &SolverConfig,
    init: IterateBlock,
    spectrum: &Spectrum,
    opts: &MonitorOptions,
) -> Result<MonitoredRun, EngineError> {
    run_monitored_with(a, cfg, init, spectrum, opts, None)
}

/// [`run_monitored`] with one more observer riding along.
pub fn run_monitored_with(
    a: &SparseSymMatrix,
    cfg: &SolverConfig,
    init: IterateBlock,
    spectrum: &Spectrum,
    opts: &MonitorOptions,
    extra: Option<&mut dyn StepObserver>,
) -> Result<MonitoredRun, EngineError> {
    cfg.validate()?;
    let bounds = DomainBounds::for_matrix(a, cfg.p)?;
    let alpha = match cfg.alpha {
        Stepsize::Auto => auto_stepsize(&bounds),
        Stepsize::Fixed(v) => v,
    };
    let setup = MonitorSetup {
        a,
        spectrum,
        alpha,
        bounds: &bounds,
    };
    let mut set = MonitorSet::new(&cfg.monitors, setup, opts);
    let solution = match extra {
        Some(e) => solve_observed(a, cfg, init, Some(spectrum), &mut [&mut set, e])?,
        None => solve_observed(a, cfg, init, Some(spectrum), &mut [&mut set])?,
    };
    Ok(MonitoredRun {
        solution,
        reports: set.reports(),
    })
}
