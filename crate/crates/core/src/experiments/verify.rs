use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{run_monitored, saddle_escape, SaddleConfig};
use crate::engine::{
    auto_stepsize, direction, init_random, DomainBounds, EngineError, Outcome, SolverConfig,
    Stepsize, StopRule, TraceRecord,
};
use crate::linalg::{SparseSymMatrix, Spectrum};
use crate::theory::monitors::{replay, run_frozen_descent, MonitorOptions, MonitorSetup};
use crate::theory::{
    check_boundary_gap, check_leading_gaps, classify_fixed_point, construct_fixed_point,
    enumerate_specs, spec_count, FixedPointClass, FixedPointSpec, JacobianBlock, MonitorKind,
    MonitorReport, MonitorStatus, Tally,
};

/// A group of checks run by `verify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    FixedPoints,
    Bounds,
    Tangent,
    NormFloor,
    Energy,
    Offspace,
    Neighborhoods,
    All,
}

impl Suite {
    pub const EACH: [Suite; 7] = [
        Suite::FixedPoints,
        Suite::Bounds,
        Suite::Tangent,
        Suite::NormFloor,
        Suite::Energy,
        Suite::Offspace,
        Suite::Neighborhoods,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::FixedPoints => "fixed-points",
            Suite::All => "all",
            s => s.monitor().expect("monitor suite").name(),
        }
    }

    fn monitor(self) -> Option<MonitorKind> {
        match self {
            Suite::Bounds => Some(MonitorKind::Bounds),
            Suite::Tangent => Some(MonitorKind::Tangent),
            Suite::NormFloor => Some(MonitorKind::NormFloor),
            Suite::Energy => Some(MonitorKind::Energy),
            Suite::Offspace => Some(MonitorKind::Offspace),
            Suite::Neighborhoods => Some(MonitorKind::Neighborhoods),
            Suite::FixedPoints | Suite::All => None,
        }
    }

    fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => Suite::EACH.to_vec(),
            s => vec![s],
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub p: usize,
    /// One fresh random-start solve per seed.
    pub seeds: Vec<u64>,
    pub alpha: Stepsize,
    /// `e_vec` target of the fresh solves.
    pub tol: f64,
    pub max_iter: usize,
    pub monitor_opts: MonitorOptions,
    /// `ε` for the frozen-prefix energy runs.
    pub energy_epsilon: f64,
    /// Saddle-escape trials watched by the neighborhood suite.
    pub saddle_trials: usize,
    pub delta: f64,
    /// Fixed-point sweeps enumerate every spec up to this many, and sample
    /// this many otherwise.
    pub max_specs: usize,
}

impl VerifyConfig {
    pub fn new(p: usize) -> Self {
        Self {
            p,
            seeds: vec![0, 1, 2],
            alpha: Stepsize::Auto,
            tol: 1e-8,
            max_iter: crate::engine::DEFAULT_MAX_ITER,
            monitor_opts: MonitorOptions::default(),
            energy_epsilon: 1e-3,
            saddle_trials: 3,
            delta: 1e-6,
            max_specs: 10_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub suite: Suite,
    pub status: MonitorStatus,
    pub reports: Vec<MonitorReport>,
}

impl SuiteResult {
    fn from_reports(suite: Suite, reports: Vec<MonitorReport>) -> Self {
        let has = |s| reports.iter().any(|r| r.status == s);
        let status = if has(MonitorStatus::Fail) {
            MonitorStatus::Fail
        } else if has(MonitorStatus::Refused) {
            MonitorStatus::Refused
        } else if has(MonitorStatus::Pass) {
            MonitorStatus::Pass
        } else {
            MonitorStatus::Vacuous
        };
        Self {
            suite,
            status,
            reports,
        }
    }

    /// Smallest worst margin over the suite's reports.
    pub fn worst_margin(&self) -> Option<f64> {
        self.reports
            .iter()
            .filter_map(|r| r.worst_margin)
            .reduce(f64::min)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub matrix_source: String,
    pub p: usize,
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    /// 1 if any suite failed, else 4 if any refused, else 0.
    pub fn exit_code(&self) -> i32 {
        let has = |s| self.suites.iter().any(|r| r.status == s);
        if has(MonitorStatus::Fail) {
            1
        } else if has(MonitorStatus::Refused) {
            4
        } else {
            0
        }
    }
}

/// Runs the requested suites over fresh solves of `a`.
pub fn verify(
    a: &SparseSymMatrix,
    spectrum: &Spectrum,
    source: &str,
    suite: Suite,
    cfg: &VerifyConfig,
) -> Result<VerifyReport, EngineError> {
    let mut suites = Vec::new();
    for s in suite.expand() {
        let reports = match s {
            Suite::FixedPoints => vec![fixed_point_sweep(a, spectrum, cfg.p, cfg.max_specs)?],
            Suite::Energy => {
                let mut r = monitor_suite(a, spectrum, MonitorKind::Energy, cfg)?;
                if r.iter().all(|r| r.status != MonitorStatus::Refused) {
                    r.push(frozen_energy_suite(a, spectrum, cfg)?);
                }
                r
            }
            Suite::Neighborhoods => {
                let mut r = monitor_suite(a, spectrum, MonitorKind::Neighborhoods, cfg)?;
                if r.iter().all(|r| r.status != MonitorStatus::Refused) && cfg.saddle_trials > 0 {
                    r.push(saddle_neighborhoods(a, spectrum, cfg)?);
                }
                r
            }
            s => monitor_suite(a, spectrum, s.monitor().expect("monitor suite"), cfg)?,
        };
        suites.push(SuiteResult::from_reports(s, reports));
    }
    Ok(VerifyReport {
        matrix_source: source.to_string(),
        p: cfg.p,
        suites,
    })
}

/// Re-checks a recorded trace. Bounds, tangent and norm-floor use the
/// trace; the fixed-point sweep needs no trace and runs as usual; the
/// remaining suites need full iterates and report `Vacuous`.
pub fn verify_replay(
    a: &SparseSymMatrix,
    spectrum: &Spectrum,
    source: &str,
    suite: Suite,
    cfg: &VerifyConfig,
    trace: &[TraceRecord],
) -> Result<VerifyReport, EngineError> {
    let p = trace.first().map_or(cfg.p, TraceRecord::p);
    let bounds = DomainBounds::for_matrix(a, p)?;
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
    let mut suites = Vec::new();
    for s in suite.expand() {
        let reports = match s.monitor() {
            None => vec![fixed_point_sweep(a, spectrum, p, cfg.max_specs)?],
            Some(kind) => vec![replay(kind, trace, setup)],
        };
        suites.push(SuiteResult::from_reports(s, reports));
    }
    Ok(VerifyReport {
        matrix_source: source.to_string(),
        p,
        suites,
    })
}

fn solver_config(cfg: &VerifyConfig, spectrum: &Spectrum, kind: MonitorKind) -> SolverConfig {
    SolverConfig {
        p: cfg.p,
        alpha: cfg.alpha,
        max_iter: cfg.max_iter,
        tol: cfg.tol,
        seed: 0,
        trace_every: 1000,
        stop: if check_boundary_gap(spectrum, cfg.p).is_ok() {
            StopRule::EigenvectorError
        } else {
            StopRule::RelativeResidual
        },
        monitors: vec![kind],
    }
}

fn monitor_suite(
    a: &SparseSymMatrix,
    spectrum: &Spectrum,
    kind: MonitorKind,
    cfg: &VerifyConfig,
) -> Result<Vec<MonitorReport>, EngineError> {
    if kind != MonitorKind::Bounds {
        if let Err(e) = check_leading_gaps(spectrum, cfg.p) {
            return Ok(vec![MonitorReport::refused(kind.name(), e.to_string())]);
        }
    }
    let bounds = DomainBounds::for_matrix(a, cfg.p)?;
    let mut reports = Vec::new();
    for &seed in &cfg.seeds {
        let mut solver = solver_config(cfg, spectrum, kind);
        solver.seed = seed;
        let x0 = init_random(a.n(), &bounds, seed)?;
        let run = run_monitored(a, &solver, x0, spectrum, &cfg.monitor_opts)?;
        let mut r = run.reports.into_iter().next().expect("one monitor");
        if run.solution.outcome != Outcome::Converged {
            r.notes.push(format!(
                "seed {seed}: solve ended {:?} after {} iterations",
                run.solution.outcome,
                run.solution.iterations()
            ));
        }
        let refused = r.status == MonitorStatus::Refused;
        reports.push(r);
        if refused {
            break;
        }
    }
    Ok(vec![MonitorReport::merge(kind.name(), reports)])
}

fn frozen_energy_suite(
    a: &SparseSymMatrix,
    spectrum: &Spectrum,
    cfg: &VerifyConfig,
) -> Result<MonitorReport, EngineError> {
    let columns = cfg.p.min(spectrum.q());
    let bounds = DomainBounds::for_matrix(a, cfg.p)?;
    let alpha = match cfg.alpha {
        Stepsize::Auto => auto_stepsize(&bounds),
        Stepsize::Fixed(v) => v,
    };
    let mut reports = Vec::new();
    for i in 0..columns {
        for &seed in &cfg.seeds {
            let x0 = init_random(a.n(), &bounds, seed)?;
            reports.push(run_frozen_descent(
                a,
                spectrum,
                i,
                alpha,
                x0.col(i),
                cfg.energy_epsilon,
                cfg.max_iter,
                0.1 * cfg.energy_epsilon,
            )?);
        }
    }
    Ok(MonitorReport::merge("energy-frozen", reports))
}

fn saddle_neighborhoods(
    a: &SparseSymMatrix,
    spectrum: &Spectrum,
    cfg: &VerifyConfig,
) -> Result<MonitorReport, EngineError> {
    let mut sc = SaddleConfig::new(cfg.p, cfg.saddle_trials);
    sc.delta = cfg.delta;
    sc.tol = cfg.tol;
    sc.max_iter = cfg.max_iter;
    sc.alpha = cfg.alpha;
    sc.neighborhoods = true;
    sc.monitor_opts = cfg.monitor_opts.clone();
    let summary = saddle_escape(a, spectrum, &sc)?;
    let reports = summary.trials.into_iter().filter_map(|t| {
        t.neighborhoods.map(|mut r| {
            r.notes.insert(0, format!("trial {} from saddle {}", t.index, t.saddle));
            r
        })
    });
    Ok(MonitorReport::merge("neighborhoods-saddle", reports))
}

/// Builds every fixed point of the form `U_q √(−Λ_q) P S` (or a random
/// sample of them when there are more than `max_specs`) and checks
/// `‖g(X*)‖_F ≤ 1e-10 ρ (1 + ‖X*‖_F)`, that the classifier recovers
/// stability, and, for `n ≤ 64`, that all diagonal Jacobian blocks are
/// positive semidefinite exactly at the stable point.
pub fn fixed_point_sweep(
    a: &SparseSymMatrix,
    spectrum: &Spectrum,
    p: usize,
    max_specs: usize,
) -> Result<MonitorReport, EngineError> {
    const NAME: &str = "fixed-points";
    if let Err(e) = check_leading_gaps(spectrum, p) {
        return Ok(MonitorReport::refused(NAME, e.to_string()));
    }
    let q = spectrum.q();
    let rho = a.spectral_norm_estimate()?;
    let total = spec_count(p, q);
    let specs: Vec<FixedPointSpec> = if total <= max_specs as u128 {
        enumerate_specs(p, q)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut v: Vec<FixedPointSpec> = (0..max_specs.saturating_sub(1))
            .filter_map(|_| crate::theory::sample_unstable_spec(p, q, &mut rng))
            .collect();
        v.push(FixedPointSpec::stable(p, q));
        v.shuffle(&mut rng);
        v
    };
    let mut tally = Tally::new(NAME);
    let jacobians = a.n() <= 64;
    let jac_tol = 1e-9 * (1.0 + rho);
    for (k, spec) in specs.iter().enumerate() {
        let x = construct_fixed_point(spec, spectrum)?;
        let g = direction(a, &x)?.frobenius_norm();
        let bound = 1e-10 * rho * (1.0 + x.frobenius_norm());
        tally.upper("fixed-point-residual", k, None, g, bound, 0.0);
        let stable = spec.is_stable(q);
        let class = classify_fixed_point(&x, spectrum, 1e-8)?;
        let expect = if stable {
            FixedPointClass::Stable
        } else {
            FixedPointClass::Unstable
        };
        tally.upper("fixed-point-class", k, None, f64::from(u8::from(class != expect)), 0.0, 0.0);
        if jacobians {
            let mut min_eig = f64::INFINITY;
            for b in 0..p {
                min_eig = min_eig.min(JacobianBlock::new(a, &x, b)?.min_eigenvalue()?);
            }
            if stable {
                tally.lower("jacobian-stable", k, None, min_eig, -jac_tol, 0.0);
            } else {
                tally.strict_upper("jacobian-unstable", k, None, min_eig, -jac_tol, 0.0);
            }
        }
    }
    tally.note(format!(
        "{} of {total} specs checked (p = {p}, q = {q})",
        specs.len()
    ));
    Ok(tally.into_report())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag4() -> (SparseSymMatrix, Spectrum) {
        let d = [-4.0, -2.0, -1.0, 3.0];
        (SparseSymMatrix::from_diagonal(&d).unwrap(), Spectrum::for_diagonal(&d))
    }

    #[test]
    fn sweep_covers_every_spec() {
        let (a, s) = diag4();
        let r = fixed_point_sweep(&a, &s, 2, 10_000).unwrap();
        assert_eq!(r.status, MonitorStatus::Pass);
        // residual, class and Jacobian per spec
        assert_eq!(r.checks, 3 * 37);
    }

    #[test]
    fn sweep_refuses_degenerate_spectrum() {
        let d = [-3.0, -1.0, -1.0, 1.0];
        let a = SparseSymMatrix::from_diagonal(&d).unwrap();
        let r = fixed_point_sweep(&a, &Spectrum::for_diagonal(&d), 2, 100).unwrap();
        assert_eq!(r.status, MonitorStatus::Refused);
    }

    #[test]
    fn exit_codes_follow_worst_suite() {
        let result = |status| SuiteResult {
            suite: Suite::Bounds,
            status,
            reports: vec![],
        };
        let mut rep = VerifyReport {
            matrix_source: "gen:diag=1".into(),
            p: 1,
            suites: vec![result(MonitorStatus::Pass), result(MonitorStatus::Vacuous)],
        };
        assert_eq!(rep.exit_code(), 0);
        rep.suites.push(result(MonitorStatus::Refused));
        assert_eq!(rep.exit_code(), 4);
        rep.suites.push(result(MonitorStatus::Fail));
        assert_eq!(rep.exit_code(), 1);
    }

    #[test]
    fn all_suites_pass_on_small_diagonal() {
        let (a, s) = diag4();
        let mut cfg = VerifyConfig::new(2);
        cfg.seeds = vec![0];
        cfg.saddle_trials = 1;
        let rep = verify(&a, &s, "gen:diag=-4,-2,-1,3", Suite::All, &cfg).unwrap();
        assert_eq!(rep.suites.len(), 7);
        for r in &rep.suites {
            assert_eq!(r.status, MonitorStatus::Pass, "{}: {:?}", r.suite.name(), r.reports);
        }
        assert_eq!(rep.exit_code(), 0);
    }
}
