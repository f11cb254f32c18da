use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::monitored::run_monitored_with;
use crate::engine::{
    init_near_saddle, solve_observed, EngineError, Outcome, SolverConfig, StepObserver, Stepsize,
    StopRule, TraceRecord,
};
use crate::linalg::{IterateBlock, SparseSymMatrix, Spectrum};
use crate::theory::monitors::MonitorOptions;
use crate::theory::{
    construct_fixed_point, sample_unstable_spec, EvecEvaluator, MonitorKind, MonitorReport,
    TheoryError,
};

#[derive(Debug, Clone)]
pub struct SaddleConfig {
    pub p: usize,
    pub trials: usize,
    /// Perturbation bound `‖X⁰ − X_saddle‖_F < delta`.
    pub delta: f64,
    pub seed: u64,
    /// A trial escapes when `e_vec < tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub alpha: Stepsize,
    pub trace_every: usize,
    /// Attach the neighborhood monitor to every trial.
    pub neighborhoods: bool,
    pub monitor_opts: MonitorOptions,
}

impl SaddleConfig {
    pub fn new(p: usize, trials: usize) -> Self {
        Self {
            p,
            trials,
            delta: 1e-6,
            seed: 0,
            tol: 1e-6,
            max_iter: crate::engine::DEFAULT_MAX_ITER,
            alpha: Stepsize::Auto,
            trace_every: 1000,
            neighborhoods: false,
            monitor_opts: MonitorOptions::default(),
        }
    }
}

/// Slow start near the saddle: the `e_vec` decrease over the first 10
/// steps is smaller than over the 10 steps after escape, where escape is
/// the first `t` with `e_vec ≤ e_vec(0)/2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlateauCheck {
    pub early_decrease: f64,
    pub escape_t: Option<usize>,
    pub post_decrease: Option<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SaddleTrial {
    pub index: usize,
    pub seed: u64,
    /// Saddle spec in one-based notation, e.g. `(+2, 0)`.
    pub saddle: String,
    pub outcome: Outcome,
    pub iterations: usize,
    pub final_e_vec: f64,
    pub escaped: bool,
    pub plateau: PlateauCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub neighborhoods: Option<MonitorReport>,
    #[serde(skip)]
    pub trace: Vec<TraceRecord>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SaddleSummary {
    pub successes: usize,
    pub total: usize,
    pub trials: Vec<SaddleTrial>,
}

impl SaddleSummary {
    pub fn all_escaped(&self) -> bool {
        self.successes == self.total
    }
}

struct PlateauObserver<'a> {
    evec: &'a EvecEvaluator,
    spectrum: &'a Spectrum,
    early: Vec<f64>,
    escape: Option<(usize, f64)>,
    post: Option<f64>,
}

impl StepObserver for PlateauObserver<'_> {
    fn observe(&mut self, t: usize, x: &IterateBlock) {
        let wanted = t <= 10
            || self.escape.is_none()
            || self.escape.is_some_and(|(s, _)| t == s + 10);
        if !wanted {
            return;
        }
        let e = self.evec.eval(x, self.spectrum);
        if t <= 10 {
            self.early.push(e);
        }
        match self.escape {
            None if e <= 0.5 * self.early[0] => self.escape = Some((t, e)),
            Some((s, e0)) if t == s + 10 => self.post = Some(e0 - e),
            _ => {}
        }
    }
}

impl PlateauObserver<'_> {
    fn check(&self) -> PlateauCheck {
        let early_decrease = match self.early.len() {
            11 => self.early[0] - self.early[10],
            _ => f64::NAN,
        };
        PlateauCheck {
            early_decrease,
            escape_t: self.escape.map(|e| e.0),
            post_decrease: self.post,
            holds: self.post.is_some_and(|post| early_decrease < post),
        }
    }
}

/// One trial: sample an unstable fixed point, perturb it, solve to
/// `e_vec < tol`.
pub fn run_saddle_trial(
    a: &SparseSymMatrix,
    spectrum: &Spectrum,
    cfg: &SaddleConfig,
    index: usize,
) -> Result<SaddleTrial, EngineError> {
    let seed = cfg.seed.wrapping_add(index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = sample_unstable_spec(cfg.p, spectrum.q(), &mut rng).ok_or_else(|| {
        TheoryError::Unsupported(format!(
            "no unstable fixed point to start from (p = {}, q = {})",
            cfg.p,
            spectrum.q()
        ))
    })?;
    let saddle = construct_fixed_point(&spec, spectrum)?;
    let x0 = init_near_saddle(&saddle, cfg.delta, rng.gen())?;

    let solver = SolverConfig {
        p: cfg.p,
        alpha: cfg.alpha,
        max_iter: cfg.max_iter,
        tol: cfg.tol,
        seed,
        trace_every: cfg.trace_every,
        stop: StopRule::EigenvectorError,
        monitors: if cfg.neighborhoods {
            vec![MonitorKind::Neighborhoods]
        } else {
            Vec::new()
        },
    };
    let evec = EvecEvaluator::new(spectrum, cfg.p)?;
    let mut plateau = PlateauObserver {
        evec: &evec,
        spectrum,
        early: Vec::with_capacity(11),
        escape: None,
        post: None,
    };
    let (solution, neighborhoods) = if cfg.neighborhoods {
        let run = run_monitored_with(a, &solver, x0, spectrum, &cfg.monitor_opts, Some(&mut plateau))?;
        (run.solution, run.reports.into_iter().next())
    } else {
        let sol = solve_observed(a, &solver, x0, Some(spectrum), &mut [&mut plateau])?;
        (sol, None)
    };
    let final_e_vec = evec.eval(&solution.state.x, spectrum);
    Ok(SaddleTrial {
        index,
        seed,
        saddle: spec.to_string(),
        outcome: solution.outcome,
        iterations: solution.iterations(),
        final_e_vec,
        escaped: solution.outcome == Outcome::Converged && final_e_vec < cfg.tol,
        plateau: plateau.check(),
        neighborhoods,
        trace: solution.trace,
    })
}

/// Runs `cfg.trials` independent trials (in parallel), trial `k` seeded
/// with `seed + k`. Results are ordered by trial index.
pub fn saddle_escape(
    a: &SparseSymMatrix,
    spectrum: &Spectrum,
    cfg: &SaddleConfig,
) -> Result<SaddleSummary, EngineError> {
    // Warm the cached spectral norm before the workers share the matrix.
    a.spectral_norm_estimate()?;
    let trials: Vec<SaddleTrial> = (0..cfg.trials)
        .into_par_iter()
        .map(|k| run_saddle_trial(a, spectrum, cfg, k))
        .collect::<Result<_, _>>()?;
    Ok(SaddleSummary {
        successes: trials.iter().filter(|t| t.escaped).count(),
        total: trials.len(),
        trials,
    })
}
