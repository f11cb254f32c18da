use serde::{Deserialize, Serialize};

use super::trace::Tracer;
use super::{
    apply_update, auto_stepsize, direction_into, DomainBounds, EngineError, SolverConfig,
    SolverState, StopRule, Stepsize, TraceRecord, Workspace,
};
use crate::linalg::{check_dims, IterateBlock, SparseSymMatrix, Spectrum};
use crate::theory::MonitorKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Converged,
    MaxIter,
    Diverged,
}

impl Outcome {
    /// Process exit code for the outcome.
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Converged => 0,
            Outcome::MaxIter => 2,
            Outcome::Diverged => 3,
        }
    }
}

/// Receives every iterate of a solve: `observe(0, X⁰)` before the first
/// update, then `observe(t, Xᵗ)` after each one, then `finish` once with the
/// final iterate.
pub trait StepObserver {
    fn observe(&mut self, t: usize, x: &IterateBlock);

    fn finish(&mut self, _t: usize, _x: &IterateBlock) {}
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub state: SolverState,
    pub trace: Vec<TraceRecord>,
    pub outcome: Outcome,
    pub alpha: f64,
    /// Present when the stepsize came from the bounds or bounds were needed
    /// by a monitor.
    pub bounds: Option<DomainBounds>,
    /// Last value of the stopping quantity.
    pub stop_value: f64,
    pub diverged_at: Option<usize>,
}

impl Solution {
    pub fn iterations(&self) -> usize {
        self.state.t
    }

    /// Eigenvalue estimates `−‖x_i‖²`.
    pub fn eigenvalue_estimates(&self) -> Vec<f64> {
        self.state.x.col_norms().iter().map(|r| -r * r).collect()
    }

    pub fn ensure_converged(self) -> Result<Self, EngineError> {
        match self.outcome {
            Outcome::Converged => Ok(self),
            Outcome::Diverged => Err(EngineError::Diverged {
                iteration: self.diverged_at.unwrap_or(self.state.t),
            }),
            outcome => Err(EngineError::NotConverged {
                outcome,
                iterations: self.state.t,
            }),
        }
    }
}

/// Runs the iteration without an oracle or observers.
pub fn solve(
    a: &SparseSymMatrix,
    cfg: &SolverConfig,
    init: IterateBlock,
) -> Result<Solution, EngineError> {
    solve_observed(a, cfg, init, None, &mut [])
}

/// Runs `X ← X − α g(X)` until the stopping rule fires, `max_iter` updates
/// have been taken, or an entry stops being finite.
///
/// The stopping quantity is evaluated on `Xᵗ` before the update, so a block
/// that is already a fixed point stops at `t = 0`. Trace rows are emitted at
/// every positive multiple of `trace_every` and at the final iteration.
pub fn solve_observed(
    a: &SparseSymMatrix,
    cfg: &SolverConfig,
    init: IterateBlock,
    oracle: Option<&Spectrum>,
    observers: &mut [&mut dyn StepObserver],
) -> Result<Solution, EngineError> {
    cfg.validate()?;
    check_dims(a, &init)?;
    if init.p() != cfg.p {
        return Err(EngineError::InvalidConfig(format!(
            "initial block has {} columns, config asks for p = {}",
            init.p(),
            cfg.p
        )));
    }
    if let Some(s) = oracle {
        if s.n() != a.n() {
            return Err(crate::linalg::LinalgError::DimensionMismatch {
                expected: a.n(),
                found: s.n(),
            }
            .into());
        }
    }
    let needs_bounds = cfg.alpha == Stepsize::Auto || cfg.monitors.contains(&MonitorKind::Bounds);
    let bounds = if needs_bounds {
        Some(DomainBounds::for_matrix(a, cfg.p)?)
    } else {
        None
    };
    let alpha = match cfg.alpha {
        Stepsize::Fixed(v) => v,
        Stepsize::Auto => {
            let b = bounds.as_ref().expect("computed for auto");
            if let Some((column, norm)) = b.first_violation(&init) {
                return Err(EngineError::InitOutsideDomain {
                    column,
                    norm,
                    radius: b.radii[column],
                });
            }
            auto_stepsize(b)
        }
    };
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(EngineError::InvalidConfig(format!("stepsize {alpha} is not usable")));
    }

    let wants = |k| cfg.monitors.contains(&k);
    let tracer = Tracer::new(
        a,
        cfg.p,
        oracle,
        wants(MonitorKind::Energy) || wants(MonitorKind::Neighborhoods),
        wants(MonitorKind::Offspace) || wants(MonitorKind::Energy),
    );
    if cfg.stop == StopRule::EigenvectorError {
        let s = oracle.ok_or(EngineError::OracleRequired(StopRule::EigenvectorError))?;
        crate::theory::check_boundary_gap(s, cfg.p)?;
    }

    let mut state = SolverState::new(init);
    let mut ws = Workspace::default();
    let mut trace = Vec::new();
    for o in observers.iter_mut() {
        o.observe(0, &state.x);
    }
    let (outcome, stop_value, diverged_at) = loop {
        direction_into(a, &state.x, &mut ws);
        let g_norm = ws.g_norm();
        let scale = state.x.frobenius_norm().max(1.0);
        let stop_value = match cfg.stop {
            StopRule::RelativeResidual => g_norm / scale,
            StopRule::RelativeStep => alpha * g_norm / scale,
            StopRule::EigenvectorError => {
                let s = oracle.expect("checked above");
                tracer.evec().expect("boundary gap checked").eval(&state.x, s)
            }
        };
        state.converged_columns = ws
            .g_col_norm_sq
            .iter()
            .zip(state.x.col_norms())
            .take_while(|(g, r)| g.sqrt() / r.max(1.0) < cfg.tol)
            .count();
        let done = if stop_value < cfg.tol {
            Some(Outcome::Converged)
        } else if state.t >= cfg.max_iter {
            Some(Outcome::MaxIter)
        } else {
            None
        };
        if done.is_some() || (state.t > 0 && state.t % cfg.trace_every == 0) {
            trace.push(tracer.record(state.t, &state.x, g_norm));
        }
        if let Some(outcome) = done {
            break (outcome, stop_value, None);
        }
        state.last_step_norm = alpha * g_norm;
        let finite = apply_update(&mut state.x, alpha, &ws);
        state.t += 1;
        if !finite {
            trace.push(TraceRecord::diverged(state.t, cfg.p));
            break (Outcome::Diverged, f64::NAN, Some(state.t));
        }
        for o in observers.iter_mut() {
            o.observe(state.t, &state.x);
        }
    };
    for o in observers.iter_mut() {
        o.finish(state.t, &state.x);
    }
    Ok(Solution {
        state,
        trace,
        outcome,
        alpha,
        bounds,
        stop_value,
        diverged_at,
    })
}
