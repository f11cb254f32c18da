//! The TriOFM iteration `X ← X − α g(X)` with `g(X) = AX + X·triu(XᵀX)`.

mod init;
mod solve;
mod trace;

pub use init::{init_near_saddle, init_random};
pub use solve::{solve, solve_observed, Outcome, Solution, StepObserver};
pub use trace::TraceRecord;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{dot, IterateBlock, LinalgError, SparseSymMatrix};
use crate::theory::{MonitorKind, TheoryError};

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("column {column} of the initial block has norm {norm} > R = {radius}")]
    InitOutsideDomain {
        column: usize,
        norm: f64,
        radius: f64,
    },
    #[error("non-finite iterate at iteration {iteration}")]
    Diverged { iteration: usize },
    #[error("stopping rule {0:?} needs an oracle spectrum")]
    OracleRequired(StopRule),
    #[error("solve did not converge: {outcome:?} after {iterations} iterations")]
    NotConverged { outcome: Outcome, iterations: usize },
}

/// Stepsize choice. Serialized as the string `"auto"` or a positive number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepsizeRepr", into = "StepsizeRepr")]
pub enum Stepsize {
    /// `1 / (10 R_p²)` from the estimated spectral norm.
    Auto,
    Fixed(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum StepsizeRepr {
    Word(String),
    Value(f64),
}

impl TryFrom<StepsizeRepr> for Stepsize {
    type Error = String;

    fn try_from(r: StepsizeRepr) -> Result<Self, String> {
        match r {
            StepsizeRepr::Word(w) if w.eq_ignore_ascii_case("auto") => Ok(Stepsize::Auto),
            StepsizeRepr::Word(w) => Err(format!("unknown stepsize {w:?}")),
            StepsizeRepr::Value(v) => Ok(Stepsize::Fixed(v)),
        }
    }
}

impl From<Stepsize> for StepsizeRepr {
    fn from(s: Stepsize) -> Self {
        match s {
            Stepsize::Auto => StepsizeRepr::Word("auto".into()),
            Stepsize::Fixed(v) => StepsizeRepr::Value(v),
        }
    }
}

/// Quantity compared against `tol`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopRule {
    /// `‖g(X)‖_F / max(1, ‖X‖_F)`.
    RelativeResidual,
    /// `‖α g(X)‖_F / max(1, ‖X‖_F)`.
    RelativeStep,
    /// `e_vec` against an oracle spectrum.
    EigenvectorError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub p: usize,
    pub alpha: Stepsize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub trace_every: usize,
    pub stop: StopRule,
    pub monitors: Vec<MonitorKind>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            p: 1,
            alpha: Stepsize::Auto,
            max_iter: DEFAULT_MAX_ITER,
            tol: DEFAULT_TOL,
            seed: 0,
            trace_every: 1000,
            stop: StopRule::RelativeResidual,
            monitors: Vec::new(),
        }
    }
}

impl SolverConfig {
    pub fn new(p: usize) -> Self {
        Self {
            p,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.p == 0 {
            return Err(EngineError::InvalidConfig("p must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(EngineError::InvalidConfig(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if let Stepsize::Fixed(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(EngineError::InvalidConfig(format!(
                    "alpha must be positive, got {a}"
                )));
            }
        }
        if self.trace_every == 0 {
            return Err(EngineError::InvalidConfig("trace_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Admissible radii `R_i = 2^(i-1) √(3ρ)` (stored zero-based).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBounds {
    pub rho: f64,
    pub radii: Vec<f64>,
}

impl DomainBounds {
    pub fn new(rho: f64, p: usize) -> Self {
        let r0 = (3.0 * rho).sqrt();
        let radii = (0..p).map(|i| r0 * (1u64 << i) as f64).collect();
        Self { rho, radii }
    }

    /// Bounds from the matrix's cached (or freshly estimated) spectral norm.
    pub fn for_matrix(a: &SparseSymMatrix, p: usize) -> Result<Self, LinalgError> {
        Ok(Self::new(a.spectral_norm_estimate()?, p))
    }

    pub fn p(&self) -> usize {
        self.radii.len()
    }

    /// `R_p`, the outermost radius.
    pub fn outer(&self) -> f64 {
        *self.radii.last().expect("p >= 1")
    }

    /// First column whose norm exceeds its radius, if any.
    pub fn first_violation(&self, x: &IterateBlock) -> Option<(usize, f64)> {
        x.col_norms()
            .iter()
            .zip(&self.radii)
            .position(|(norm, r)| norm > r)
            .map(|i| (i, x.col_norms()[i]))
    }
}

/// `1 / (10 R_p²)`.
pub fn auto_stepsize(bounds: &DomainBounds) -> f64 {
    let rp = bounds.outer();
    1.0 / (10.0 * rp * rp)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x: IterateBlock,
    pub t: usize,
    pub last_step_norm: f64,
    /// Leading columns whose own residual is below `tol`. Diagnostic only:
    /// every column keeps updating.
    pub converged_columns: usize,
}

impl SolverState {
    pub fn new(x: IterateBlock) -> Self {
        Self {
            x,
            t: 0,
            last_step_norm: 0.0,
            converged_columns: 0,
        }
    }
}

/// Reusable buffers for the direction and step kernels.
#[derive(Debug, Default)]
pub(crate) struct Workspace {
    pub g: Vec<f64>,
    gram: Vec<f64>,
    pub g_col_norm_sq: Vec<f64>,
}

impl Workspace {
    pub fn g_norm(&self) -> f64 {
        self.g_col_norm_sq.iter().sum::<f64>().sqrt()
    }
}

/// Fills `ws.g` with `g(X)`. Column `i` is `A xᵢ + Σ_{j≤i} xⱼ (xⱼᵀxᵢ)`,
/// accumulated in increasing `j`.
pub(crate) fn direction_into(a: &SparseSymMatrix, x: &IterateBlock, ws: &mut Workspace) {
    let (n, p) = (x.n(), x.p());
    ws.g.resize(n * p, 0.0);
    ws.gram.resize(p * p, 0.0);
    ws.g_col_norm_sq.resize(p, 0.0);
    for i in 0..p {
        for j in 0..=i {
            ws.gram[j + i * p] = dot(x.col(j), x.col(i));
        }
    }
    for i in 0..p {
        let out = &mut ws.g[i * n..(i + 1) * n];
        a.mul_vec_into(x.col(i), out);
        for j in 0..=i {
            let w = ws.gram[j + i * p];
            for (o, xj) in out.iter_mut().zip(x.col(j)) {
                *o += w * xj;
            }
        }
        ws.g_col_norm_sq[i] = dot(out, out);
    }
}

/// `g(X) = AX + X·triu(XᵀX)`, in the same absorbed scaling as
/// [`crate::linalg::ofm_gradient`].
pub fn direction(a: &SparseSymMatrix, x: &IterateBlock) -> Result<IterateBlock, EngineError> {
    crate::linalg::check_dims(a, x)?;
    let mut ws = Workspace::default();
    direction_into(a, x, &mut ws);
    Ok(IterateBlock::from_col_major(x.n(), x.p(), ws.g)?)
}

/// Applies `X ← X − α g` with `g` already in `ws`, refreshing norms.
/// Returns `false` if any entry became non-finite.
pub(crate) fn apply_update(x: &mut IterateBlock, alpha: f64, ws: &Workspace) -> bool {
    let n = x.n();
    let (data, norms) = x.parts_mut();
    let mut finite = true;
    for (j, (col, gcol)) in data.chunks_exact_mut(n).zip(ws.g.chunks_exact(n)).enumerate() {
        for (v, g) in col.iter_mut().zip(gcol) {
            *v -= alpha * g;
        }
        let acc = dot(col, col);
        finite &= acc.is_finite();
        norms[j] = acc.sqrt();
    }
    finite
}

/// One iteration of `X ← X − α g(X)`.
pub fn step(state: &mut SolverState, a: &SparseSymMatrix, alpha: f64) -> Result<(), EngineError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(EngineError::InvalidConfig(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    crate::linalg::check_dims(a, &state.x)?;
    let mut ws = Workspace::default();
    direction_into(a, &state.x, &mut ws);
    step_with(state, alpha, &ws)
}

pub(crate) fn step_with(
    state: &mut SolverState,
    alpha: f64,
    ws: &Workspace,
) -> Result<(), EngineError> {
    state.last_step_norm = alpha * ws.g_norm();
    let finite = apply_update(&mut state.x, alpha, ws);
    state.t += 1;
    if finite {
        Ok(())
    } else {
        Err(EngineError::Diverged { iteration: state.t })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_hand_case() {
        let a = SparseSymMatrix::from_diagonal(&[-4.0, -2.0, -1.0]).unwrap();
        let x = IterateBlock::from_columns(&[vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0]]).unwrap();
        let g = direction(&a, &x).unwrap();
        assert_eq!(g.col(0), &[-3.0, 0.0, 0.0]);
        assert_eq!(g.col(1), &[-1.0, 0.0, 0.0]);
    }

    #[test]
    fn step_hand_case() {
        let a = SparseSymMatrix::from_diagonal(&[-2.0, 1.0]).unwrap();
        let x = IterateBlock::from_columns(&[vec![1.0, 0.0]]).unwrap();
        let mut s = SolverState::new(x);
        step(&mut s, &a, 0.1).unwrap();
        assert!((s.x.col(0)[0] - 1.1).abs() < 1e-15);
        assert_eq!(s.x.col(0)[1], 0.0);
        assert_eq!(s.t, 1);
        assert!((s.last_step_norm - 0.1).abs() < 1e-15);
    }

    #[test]
    fn auto_stepsize_substitution() {
        assert!((auto_stepsize(&DomainBounds::new(3.0, 2)) - 1.0 / 360.0).abs() < 1e-18);
        let b = DomainBounds::new(1.0 / 3.0, 1);
        assert!((b.radii[0] - 1.0).abs() < 1e-15);
        assert!((auto_stepsize(&b) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn radii_double() {
        let b = DomainBounds::new(4.0, 4);
        assert_eq!(b.radii[0], 12f64.sqrt());
        for w in b.radii.windows(2) {
            assert_eq!(w[1], 2.0 * w[0]);
        }
    }

    #[test]
    fn config_json_stepsize_forms() {
        let c: SolverConfig = serde_json::from_str(r#"{"p": 2, "alpha": "auto"}"#).unwrap();
        assert_eq!(c.alpha, Stepsize::Auto);
        let c: SolverConfig = serde_json::from_str(r#"{"p": 2, "alpha": 0.01}"#).unwrap();
        assert_eq!(c.alpha, Stepsize::Fixed(0.01));
        assert!(serde_json::from_str::<SolverConfig>(r#"{"alpha": "fast"}"#).is_err());
        let round: SolverConfig =
            serde_json::from_str(&serde_json::to_string(&SolverConfig::new(3)).unwrap()).unwrap();
        assert_eq!(round, SolverConfig::new(3));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(0).validate().is_err());
        let mut c = SolverConfig::new(1);
        c.tol = 0.0;
        assert!(c.validate().is_err());
        c.tol = 1e-6;
        c.alpha = Stepsize::Fixed(-1.0);
        assert!(c.validate().is_err());
    }
}
