//! Streaming monitors for the convergence guarantees, plus replay of the
//! oracle-light ones over recorded traces.
//!
//! Every monitor is a [`StepObserver`]: attach it to
//! [`solve_observed`](crate::engine::solve_observed) and read its
//! [`MonitorReport`] afterwards.

use super::report::{default_slack, Tally};
use super::{
    check_leading_gaps, default_epsilon, residual_e_norms, tangent, EnergyContext,
    EpsilonThresholds, MonitorKind, MonitorReport, TheoryError,
};
use crate::engine::{DomainBounds, StepObserver, TraceRecord};
use crate::linalg::{norm2, IterateBlock, SparseSymMatrix, Spectrum};

pub const BOUNDED_DOMAIN: &str = "bounded-domain";
pub const TANGENT_CONTRACTION: &str = "tangent-contraction";
pub const NORM_FLOOR: &str = "norm-floor";
pub const NORM_FLOOR_HELD: &str = "norm-floor-held";
pub const OFFSPACE_DECAY: &str = "offspace-decay";
pub const OFFSPACE_FINAL: &str = "offspace-final";
pub const ENERGY_DESCENT: &str = "energy-descent";
pub const STATIONARY_PROXIMITY: &str = "stationary-proximity";
pub const NO_RETURN: &str = "neighborhood-no-return";
pub const SAME_RETURN: &str = "neighborhood-same-return";
pub const TRANSITIONS: &str = "neighborhood-transitions";

/// Tunables shared by the monitors.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorOptions {
    /// Offspace, energy and neighborhood checks run on step pairs
    /// `(t, t+1)` with `t` a multiple of `stride`.
    pub stride: usize,
    /// Overrides the per-column default `ε_i`.
    pub epsilon: Option<f64>,
    /// Final `|u_kᵀx_i|` must be below this for prefix-converged columns.
    pub offspace_final_tol: f64,
    /// A column counts as prefix-converged when the final `‖E‖_F` of the
    /// columns before it is at most this.
    pub prefix_tol: f64,
}

impl Default for MonitorOptions {
    fn default() -> Self {
        Self {
            stride: 1,
            epsilon: None,
            offspace_final_tol: 1e-6,
            prefix_tol: 1e-6,
        }
    }
}

/// Everything a monitor needs besides the iterates.
#[derive(Debug, Clone, Copy)]
pub struct MonitorSetup<'a> {
    pub a: &'a SparseSymMatrix,
    pub spectrum: &'a Spectrum,
    pub alpha: f64,
    pub bounds: &'a DomainBounds,
}

impl MonitorSetup<'_> {
    pub fn p(&self) -> usize {
        self.bounds.p()
    }
}

pub trait Monitor: StepObserver {
    fn kind(&self) -> MonitorKind;
    fn report(&self) -> MonitorReport;
}

/// Builds the monitor for `kind`. Monitors whose premises cannot hold for
/// this spectrum report `Refused` and ignore the iterates.
pub fn build_monitor<'a>(
    kind: MonitorKind,
    setup: MonitorSetup<'a>,
    opts: &MonitorOptions,
) -> Box<dyn Monitor + 'a> {
    let built: Result<Box<dyn Monitor + 'a>, String> = match kind {
        MonitorKind::Bounds => Ok(Box::new(BoundsMonitor::new(setup.bounds))),
        MonitorKind::Tangent => TangentMonitor::new(setup).map(|m| Box::new(m) as _),
        MonitorKind::NormFloor => NormFloorMonitor::new(setup, opts).map(|m| Box::new(m) as _),
        MonitorKind::Offspace => OffspaceMonitor::new(setup, opts).map(|m| Box::new(m) as _),
        MonitorKind::Energy => EnergyMonitor::new(setup, opts).map(|m| Box::new(m) as _),
        MonitorKind::Neighborhoods => {
            NeighborhoodMonitor::new(setup, opts).map(|m| Box::new(m) as _)
        }
    };
    built.unwrap_or_else(|reason| Box::new(RefusedMonitor { kind, reason }))
}

fn leading_gaps(setup: &MonitorSetup<'_>) -> Result<(), String> {
    check_leading_gaps(setup.spectrum, setup.p()).map_err(|e| e.to_string())
}

/// A set of monitors driven as one observer.
pub struct MonitorSet<'a> {
    monitors: Vec<Box<dyn Monitor + 'a>>,
}

impl<'a> MonitorSet<'a> {
    pub fn new(kinds: &[MonitorKind], setup: MonitorSetup<'a>, opts: &MonitorOptions) -> Self {
        Self {
            monitors: kinds.iter().map(|&k| build_monitor(k, setup, opts)).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.monitors.is_empty()
    }

    pub fn reports(&self) -> Vec<MonitorReport> {
        self.monitors.iter().map(|m| m.report()).collect()
    }
}

impl StepObserver for MonitorSet<'_> {
    fn observe(&mut self, t: usize, x: &IterateBlock) {
        for m in &mut self.monitors {
            m.observe(t, x);
        }
    }

    fn finish(&mut self, t: usize, x: &IterateBlock) {
        for m in &mut self.monitors {
            m.finish(t, x);
        }
    }
}

struct RefusedMonitor {
    kind: MonitorKind,
    reason: String,
}

impl StepObserver for RefusedMonitor {
    fn observe(&mut self, _t: usize, _x: &IterateBlock) {}
}

impl Monitor for RefusedMonitor {
    fn kind(&self) -> MonitorKind {
        self.kind
    }

    fn report(&self) -> MonitorReport {
        MonitorReport::refused(self.kind.name(), self.reason.clone())
    }
}

/// `‖x_i‖ ≤ R_i` at every iterate, with no slack.
pub struct BoundsMonitor {
    radii: Vec<f64>,
    tally: Tally,
}

impl BoundsMonitor {
    pub fn new(bounds: &DomainBounds) -> Self {
        Self {
            radii: bounds.radii.clone(),
            tally: Tally::new(MonitorKind::Bounds.name()),
        }
    }

    fn push(&mut self, t: usize, norms: &[f64]) {
        for (i, (&r, &norm)) in self.radii.iter().zip(norms).enumerate() {
            self.tally.upper(BOUNDED_DOMAIN, t, Some(i), norm, r, 0.0);
        }
    }
}

impl StepObserver for BoundsMonitor {
    fn observe(&mut self, t: usize, x: &IterateBlock) {
        self.push(t, x.col_norms());
    }
}

impl Monitor for BoundsMonitor {
    fn kind(&self) -> MonitorKind {
        MonitorKind::Bounds
    }

    fn report(&self) -> MonitorReport {
        self.tally.clone().into_report()
    }
}

/// Contraction of the first column's tangent to `u_1`:
/// `tan θ(t+Δ) ≤ f^Δ tan θ(t) + 1e-12 (1 + tan θ(t))`,
/// `f = (1 − αλ_2) / (1 − αλ_1)`.
#[derive(Debug, Clone)]
struct TangentCore {
    factor: f64,
    prev: Option<(usize, f64)>,
    worst_ratio: f64,
    tally: Tally,
}

impl TangentCore {
    fn new(spectrum: &Spectrum, alpha: f64) -> Result<Self, String> {
        if spectrum.n() < 2 {
            return Err("tangent contraction needs n >= 2".into());
        }
        let (l1, l2) = (spectrum.eigenvalue(0), spectrum.eigenvalue(1));
        if l2 - l1 < super::DEGENERACY_GAP {
            return Err(TheoryError::Degenerate { index: 1, gap: l2 - l1 }.to_string());
        }
        Ok(Self {
            factor: contraction_factor(alpha, l1, l2),
            prev: None,
            worst_ratio: 0.0,
            tally: Tally::new(MonitorKind::Tangent.name()),
        })
    }

    fn push(&mut self, t: usize, tan: f64) {
        if let Some((t0, prev)) = self.prev {
            if tan.is_finite() && prev.is_finite() {
                let steps = i32::try_from(t - t0).unwrap_or(i32::MAX);
                let bound = self.factor.powi(steps) * prev;
                self.tally.upper(TANGENT_CONTRACTION, t, Some(0), tan, bound, 1e-12 * (1.0 + prev));
                if prev > 0.0 && steps == 1 {
                    self.worst_ratio = self.worst_ratio.max(tan / prev);
                }
            }
        }
        self.prev = Some((t, tan));
    }

    fn report(&self) -> MonitorReport {
        let mut t = self.tally.clone();
        t.note(format!("bound factor {:.12}", self.factor));
        if self.worst_ratio > 0.0 {
            t.note(format!("worst one-step ratio {:.12}", self.worst_ratio));
        }
        t.into_report()
    }
}

/// `(1 − αλ_2) / (1 − αλ_1)`.
pub fn contraction_factor(alpha: f64, lambda1: f64, lambda2: f64) -> f64 {
    (1.0 - alpha * lambda2) / (1.0 - alpha * lambda1)
}

pub struct TangentMonitor<'a> {
    spectrum: &'a Spectrum,
    core: TangentCore,
}

impl<'a> TangentMonitor<'a> {
    pub fn new(setup: MonitorSetup<'a>) -> Result<Self, String> {
        leading_gaps(&setup)?;
        Ok(Self {
            spectrum: setup.spectrum,
            core: TangentCore::new(setup.spectrum, setup.alpha)?,
        })
    }
}

impl StepObserver for TangentMonitor<'_> {
    fn observe(&mut self, t: usize, x: &IterateBlock) {
        let tan = tangent(x.col(0), self.spectrum.eigenvector(0)).unwrap_or(f64::NAN);
        self.core.push(t, tan);
    }
}

impl Monitor for TangentMonitor<'_> {
    fn kind(&self) -> MonitorKind {
        MonitorKind::Tangent
    }

    fn report(&self) -> MonitorReport {
        self.core.report()
    }
}

/// Eventual lower bound `‖x_i‖ ≥ √(−2λ_q)/4` for columns that do not
/// vanish.
#[derive(Debug, Clone)]
struct NormFloorCore {
    floor: f64,
    last_below: Vec<Option<usize>>,
    last: Option<(usize, Vec<f64>)>,
}

impl NormFloorCore {
    fn new(spectrum: &Spectrum, p: usize) -> Result<Self, String> {
        let q = spectrum.q();
        if q == 0 {
            return Err("no negative eigenvalue, the norm floor is undefined".into());
        }
        Ok(Self {
            floor: norm_floor(spectrum.eigenvalue(q - 1)),
            last_below: vec![None; p],
            last: None,
        })
    }

    fn push(&mut self, t: usize, norms: &[f64]) {
        for (lb, &r) in self.last_below.iter_mut().zip(norms) {
            if !(r >= self.floor) {
                *lb = Some(t);
            }
        }
        self.last = Some((t, norms.to_vec()));
    }

    fn finish_into(&self, tally: &mut Tally) {
        let Some((t, norms)) = &self.last else {
            return;
        };
        tally.note(format!("floor {:.12}", self.floor));
        for (i, (&r, lb)) in norms.iter().zip(&self.last_below).enumerate() {
            if r < 0.5 * self.floor {
                tally.note(format!("column {}: vanishing (final norm {r:.3e})", i + 1));
                continue;
            }
            tally.lower(NORM_FLOOR, *t, Some(i), r, self.floor, 0.0);
            if r >= self.floor {
                let n = lb.map_or(0, |s| s + 1);
                tally.note(format!("column {}: N = {n}", i + 1));
            }
        }
    }
}

/// `√(−2λ_q)/4`.
pub fn norm_floor(lambda_q: f64) -> f64 {
    (-2.0 * lambda_q).sqrt() / 4.0
}

pub struct NormFloorMonitor<'a> {
    spectrum: &'a Spectrum,
    core: NormFloorCore,
    stride: usize,
    /// Step at which the first column reached `‖y_in‖ ≥ 2·floor` with
    /// `‖y_out‖ ≤ floor`; from then on its norm may not drop below floor.
    armed_at: Option<usize>,
    tally: Tally,
    coords: Vec<f64>,
}

impl<'a> NormFloorMonitor<'a> {
    pub fn new(setup: MonitorSetup<'a>, opts: &MonitorOptions) -> Result<Self, String> {
        leading_gaps(&setup)?;
        Ok(Self {
            spectrum: setup.spectrum,
            core: NormFloorCore::new(setup.spectrum, setup.p())?,
            stride: opts.stride.max(1),
            armed_at: None,
            tally: Tally::new(MonitorKind::NormFloor.name()),
            coords: vec![0.0; setup.spectrum.n()],
        })
    }
}

impl StepObserver for NormFloorMonitor<'_> {
    fn observe(&mut self, t: usize, x: &IterateBlock) {
        self.core.push(t, x.col_norms());
        let floor = self.core.floor;
        if self.armed_at.is_some() {
            self.tally.lower(NORM_FLOOR_HELD, t, Some(0), x.col_norms()[0], floor, 0.0);
        } else if t % self.stride == 0 {
            let q = self.spectrum.q();
            self.spectrum.rotate_into(x.col(0), &mut self.coords);
            let y_in = norm2(&self.coords[..q]);
            let y_out = norm2(&self.coords[q..]);
            if y_in >= 2.0 * floor && y_out <= floor {
                self.armed_at = Some(t);
            }
        }
    }
}

impl Monitor for NormFloorMonitor<'_> {
    fn kind(&self) -> MonitorKind {
        MonitorKind::NormFloor
    }

    fn report(&self) -> MonitorReport {
        let mut t = self.tally.clone();
        self.core.finish_into(&mut t);
        if let Some(s) = self.armed_at {
            t.note(format!("column 1: floor guaranteed from t = {s}"));
        }
        t.into_report()
    }
}

/// Coordinates and prefix residuals at one sampled step.
#[derive(Debug, Clone)]
struct Snapshot {
    t: usize,
    /// Per monitored column, `Uᵀx_i`.
    coords: Vec<Vec<f64>>,
    norms: Vec<f64>,
    /// `‖E‖_F` of the prefix before each column.
    residuals: Vec<f64>,
}

fn snapshot(t: usize, x: &IterateBlock, spectrum: &Spectrum, columns: usize) -> Snapshot {
    let mut residuals = residual_e_norms(x, spectrum);
    residuals.pop();
    Snapshot {
        t,
        coords: (0..columns).map(|i| spectrum.rotate(x.col(i))).collect(),
        norms: x.col_norms().to_vec(),
        residuals,
    }
}

/// Pairs up sampled steps `(t, t+1)` with `t % stride == 0`.
#[derive(Debug, Clone)]
struct PairSampler {
    stride: usize,
}

impl PairSampler {
    /// Whether step `t` starts or ends a pair, given the pending start.
    fn wanted(&self, t: usize, pending: Option<usize>) -> bool {
        t % self.stride == 0 || pending.is_some_and(|s| s + 1 == t)
    }

    fn starts(&self, t: usize) -> bool {
        t % self.stride == 0
    }
}

/// Decay of `u_kᵀx_i` for `k ∈ [0, i) ∪ [q, n)`:
/// `|c'| ≤ (1 − αλ̃_k − αc²)|c| + α‖E‖_F‖x_i‖` per step, and
/// `|c'| ≤ (1 − αε²/2)|c|` whenever `|c| > ε = (2R_i‖E‖_F)^{1/3}` and
/// `ε < √(2/α)`. `λ̃_k` is 0 on the prefix and `λ_k` above `q`.
pub struct OffspaceMonitor<'a> {
    spectrum: &'a Spectrum,
    alpha: f64,
    radii: Vec<f64>,
    columns: usize,
    sampler: PairSampler,
    pending: Option<Snapshot>,
    final_tol: f64,
    prefix_tol: f64,
    finals: Option<Snapshot>,
    tally: Tally,
}

impl<'a> OffspaceMonitor<'a> {
    pub fn new(setup: MonitorSetup<'a>, opts: &MonitorOptions) -> Result<Self, String> {
        leading_gaps(&setup)?;
        let q = setup.spectrum.q();
        let columns = setup.p().min(q);
        if columns == 0 {
            return Err("no negative eigenvalue".into());
        }
        Ok(Self {
            spectrum: setup.spectrum,
            alpha: setup.alpha,
            radii: setup.bounds.radii.clone(),
            columns,
            sampler: PairSampler {
                stride: opts.stride.max(1),
            },
            pending: None,
            final_tol: opts.offspace_final_tol,
            prefix_tol: opts.prefix_tol,
            finals: None,
            tally: Tally::new(MonitorKind::Offspace.name()),
        })
    }

    fn offspace(&self, i: usize) -> impl Iterator<Item = usize> {
        (0..i).chain(self.spectrum.q()..self.spectrum.n())
    }

    fn check_pair(&mut self, a: &Snapshot, b: &Snapshot) {
        let alpha = self.alpha;
        let limit = (2.0 / alpha).sqrt();
        for i in 0..self.columns {
            let e = a.residuals[i];
            let eps = (2.0 * self.radii[i] * e).cbrt() * (1.0 + 1e-9);
            let ks: Vec<usize> = self.offspace(i).collect();
            for k in ks {
                let c = a.coords[i][k].abs();
                let c1 = b.coords[i][k].abs();
                let lt = if k < i { 0.0 } else { self.spectrum.eigenvalue(k) };
                let bound = (1.0 - alpha * lt - alpha * c * c) * c + alpha * e * a.norms[i];
                self.tally.upper(OFFSPACE_DECAY, b.t, Some(i), c1, bound, default_slack(bound));
                if c > eps && eps < limit {
                    let bound = (1.0 - 0.5 * alpha * eps * eps) * c;
                    self.tally.upper(OFFSPACE_DECAY, b.t, Some(i), c1, bound, default_slack(bound));
                }
            }
        }
    }
}

impl StepObserver for OffspaceMonitor<'_> {
    fn observe(&mut self, t: usize, x: &IterateBlock) {
        if !self.sampler.wanted(t, self.pending.as_ref().map(|s| s.t)) {
            return;
        }
        let now = snapshot(t, x, self.spectrum, self.columns);
        if let Some(prev) = self.pending.take() {
            if prev.t + 1 == t {
                self.check_pair(&prev, &now);
            }
        }
        if self.sampler.starts(t) {
            self.pending = Some(now);
        }
    }

    fn finish(&mut self, t: usize, x: &IterateBlock) {
        self.finals = Some(snapshot(t, x, self.spectrum, self.columns));
    }
}

impl Monitor for OffspaceMonitor<'_> {
    fn kind(&self) -> MonitorKind {
        MonitorKind::Offspace
    }

    fn report(&self) -> MonitorReport {
        let mut tally = self.tally.clone();
        if let Some(f) = &self.finals {
            for i in 0..self.columns {
                let e = f.residuals[i];
                if e > self.prefix_tol {
                    tally.note(format!(
                        "column {}: prefix residual {e:.3e} above {:.1e}, final decay not checked",
                        i + 1,
                        self.prefix_tol
                    ));
                    continue;
                }
                let worst = self
                    .offspace(i)
                    .map(|k| f.coords[i][k].abs())
                    .fold(0.0, f64::max);
                tally.strict_upper(OFFSPACE_FINAL, f.t, Some(i), worst, self.final_tol, 0.0);
            }
        }
        tally.into_report()
    }
}

/// Per-column `ε_i`: the override if given, else the default from the
/// spectrum. Columns without nonzero stationary points get `None`.
fn column_epsilons(
    spectrum: &Spectrum,
    columns: usize,
    opts: &MonitorOptions,
) -> Result<Vec<Option<f64>>, String> {
    (0..columns)
        .map(|i| match (opts.epsilon, default_epsilon(spectrum, i)) {
            (_, Err(TheoryError::Unsupported(_))) => Ok(None),
            (_, Err(e)) => Err(e.to_string()),
            (Some(eps), Ok(_)) => Ok(Some(eps)),
            (None, Ok(eps)) => Ok(Some(eps)),
        })
        .collect()
}

/// The live-prefix premise `‖E‖_F < min{√ρ, ε_i / (8√3 R_i²)}`; the first
/// column has no prefix and always qualifies.
pub fn prefix_premise(i: usize, residual: f64, epsilon: f64, rho: f64, radius: f64) -> bool {
    i == 0 || residual < rho.sqrt().min(epsilon / (8.0 * 3f64.sqrt() * radius * radius))
}

/// Energy descent on live iterates: when the prefix premise holds and
/// `‖∇F(x_i)‖ > ε_i`, `F(x) − F(x') > ½‖x − x'‖ε_i` and `> ¼αε_i²`.
pub struct EnergyMonitor<'a> {
    contexts: Vec<EnergyContext<'a>>,
    epsilons: Vec<Option<f64>>,
    spectrum: &'a Spectrum,
    alpha: f64,
    rho: f64,
    radii: Vec<f64>,
    sampler: PairSampler,
    pending: Option<(usize, IterateBlock, Vec<f64>)>,
    skipped: u64,
    tally: Tally,
}

impl<'a> EnergyMonitor<'a> {
    pub fn new(setup: MonitorSetup<'a>, opts: &MonitorOptions) -> Result<Self, String> {
        leading_gaps(&setup)?;
        let columns = setup.p().min(setup.spectrum.n());
        let epsilons = column_epsilons(setup.spectrum, columns, opts)?;
        let contexts = (0..columns)
            .map(|i| EnergyContext::new(setup.a, setup.spectrum, i).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            contexts,
            epsilons,
            spectrum: setup.spectrum,
            alpha: setup.alpha,
            rho: setup.bounds.rho,
            radii: setup.bounds.radii.clone(),
            sampler: PairSampler {
                stride: opts.stride.max(1),
            },
            pending: None,
            skipped: 0,
            tally: Tally::new(MonitorKind::Energy.name()),
        })
    }

    fn check_pair(&mut self, x: &IterateBlock, residuals: &[f64], y: &IterateBlock, t: usize) {
        for (i, ctx) in self.contexts.iter().enumerate() {
            let Some(eps) = self.epsilons[i] else {
                continue;
            };
            if !prefix_premise(i, residuals[i], eps, self.rho, self.radii[i]) {
                self.skipped += 1;
                continue;
            }
            let (xi, yi) = (x.col(i), y.col(i));
            if ctx.grad_norm(xi) <= eps {
                continue;
            }
            check_descent(&mut self.tally, ctx, xi, yi, eps, self.alpha, t, i);
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn check_descent(
    tally: &mut Tally,
    ctx: &EnergyContext<'_>,
    x: &[f64],
    y: &[f64],
    eps: f64,
    alpha: f64,
    t: usize,
    column: usize,
) {
    let dec = ctx.decrement(x, y);
    let step: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let b1 = 0.5 * step * eps;
    let b2 = 0.25 * alpha * eps * eps;
    tally.strict_lower(ENERGY_DESCENT, t, Some(column), dec, b1, default_slack(b1));
    tally.strict_lower(ENERGY_DESCENT, t, Some(column), dec, b2, default_slack(b2));
}

impl StepObserver for EnergyMonitor<'_> {
    fn observe(&mut self, t: usize, x: &IterateBlock) {
        if !self.sampler.wanted(t, self.pending.as_ref().map(|s| s.0)) {
            return;
        }
        if let Some((t0, x0, res)) = self.pending.take() {
            if t0 + 1 == t {
                self.check_pair(&x0, &res, x, t);
            }
        }
        if self.sampler.starts(t) {
            let mut res = residual_e_norms(x, self.spectrum);
            res.pop();
            self.pending = Some((t, x.clone(), res));
        }
    }
}

impl Monitor for EnergyMonitor<'_> {
    fn kind(&self) -> MonitorKind {
        MonitorKind::Energy
    }

    fn report(&self) -> MonitorReport {
        let mut t = self.tally.clone();
        for (i, e) in self.epsilons.iter().enumerate() {
            match e {
                Some(e) => t.note(format!("column {}: epsilon {e:.3e}", i + 1)),
                None => t.note(format!("column {}: no nonzero stationary point, skipped", i + 1)),
            }
        }
        if self.skipped > 0 {
            t.note(format!("{} column-steps skipped: prefix premise not met", self.skipped));
        }
        t.into_report()
    }
}

/// Energy descent for column `i` with the prefix frozen at its converged
/// value: iterates `x ← x − α∇F(x)` from `x0` for at most `max_steps`
/// steps, stopping early once `‖∇F‖ < stop_tol`, and checks every step
/// with `‖∇F‖ > epsilon`.
pub fn run_frozen_descent(
    a: &SparseSymMatrix,
    spectrum: &Spectrum,
    i: usize,
    alpha: f64,
    x0: &[f64],
    epsilon: f64,
    max_steps: usize,
    stop_tol: f64,
) -> Result<MonitorReport, TheoryError> {
    let ctx = EnergyContext::new(a, spectrum, i)?;
    let mut tally = Tally::new(MonitorKind::Energy.name());
    let mut x = x0.to_vec();
    let mut steps = 0;
    while steps < max_steps {
        let g = ctx.grad_norm(&x);
        if g < stop_tol {
            break;
        }
        let y = ctx.descent_step(&x, alpha);
        if g > epsilon {
            check_descent(&mut tally, &ctx, &x, &y, epsilon, alpha, steps + 1, i);
        }
        x = y;
        steps += 1;
    }
    let (idx, dist) = ctx.nearest(&x);
    tally.note(format!(
        "column {}: {steps} frozen steps, ends {dist:.3e} from {}",
        i + 1,
        ctx.stationary_set()[idx].label
    ));
    Ok(tally.into_report())
}

#[derive(Debug, Clone, Default)]
struct ColumnVisits {
    /// Stationary indices visited so far, with the largest distance to each
    /// since the iterate last left its neighborhood.
    visited: Vec<(usize, f64)>,
    current: Option<usize>,
    last: Option<usize>,
    transitions: u64,
    path: Vec<usize>,
}

/// Visits to stationary neighborhoods `N_s = {‖∇F‖ < ε, ‖x − s‖ < √n ε^{1/3}}`
/// of each column's energy.
///
/// Checks proximity (`‖∇F‖ < ε ⇒ dist ≤ √n ε^{1/3}`), that no neighborhood
/// with energy at least that of an earlier one is entered, that between two
/// visits to `s` the iterate stays within `6√n ε^{1/3}` of `s`, and that the
/// number of neighborhood changes is at most `|S|`.
pub struct NeighborhoodMonitor<'a> {
    contexts: Vec<EnergyContext<'a>>,
    epsilons: Vec<f64>,
    spectrum: &'a Spectrum,
    rho: f64,
    radii: Vec<f64>,
    stride: usize,
    visits: Vec<ColumnVisits>,
    skipped: u64,
    last_t: usize,
    tally: Tally,
}

impl<'a> NeighborhoodMonitor<'a> {
    pub fn new(setup: MonitorSetup<'a>, opts: &MonitorOptions) -> Result<Self, String> {
        leading_gaps(&setup)?;
        let columns = setup.p().min(setup.spectrum.q());
        if columns == 0 {
            return Err("no negative eigenvalue".into());
        }
        let epsilons: Vec<f64> = column_epsilons(setup.spectrum, columns, opts)?
            .into_iter()
            .map(|e| e.expect("columns below q"))
            .collect();
        for (i, &eps) in epsilons.iter().enumerate() {
            let th = EpsilonThresholds::new(setup.spectrum, i).map_err(|e| e.to_string())?;
            if !(eps > 0.0 && eps < th.min()) {
                return Err(format!(
                    "epsilon {eps:e} for column {} is not below the neighborhood threshold {:e}",
                    i + 1,
                    th.min()
                ));
            }
        }
        let contexts = (0..columns)
            .map(|i| EnergyContext::new(setup.a, setup.spectrum, i).map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        Ok(Self {
            contexts,
            epsilons,
            spectrum: setup.spectrum,
            rho: setup.bounds.rho,
            radii: setup.bounds.radii.clone(),
            stride: opts.stride.max(1),
            visits: vec![ColumnVisits::default(); columns],
            skipped: 0,
            last_t: 0,
            tally: Tally::new(MonitorKind::Neighborhoods.name()),
        })
    }
}

fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

impl StepObserver for NeighborhoodMonitor<'_> {
    fn observe(&mut self, t: usize, x: &IterateBlock) {
        self.last_t = t;
        if t % self.stride != 0 {
            return;
        }
        let residuals = if self.contexts.len() > 1 {
            residual_e_norms(x, self.spectrum)
        } else {
            vec![0.0]
        };
        for (i, ctx) in self.contexts.iter().enumerate() {
            let eps = self.epsilons[i];
            if !prefix_premise(i, residuals[i], eps, self.rho, self.radii[i]) {
                self.skipped += 1;
                continue;
            }
            let xi = x.col(i);
            let n = ctx.n() as f64;
            let radius = n.sqrt() * eps.cbrt();
            let g = ctx.grad_norm(xi);
            let (idx, d) = ctx.nearest(xi);
            if g < eps {
                self.tally.upper(STATIONARY_PROXIMITY, t, Some(i), d, radius, default_slack(radius));
            }
            let set = ctx.stationary_set();
            let v = &mut self.visits[i];
            let inside = g < eps && d < radius;
            for (s, far) in v.visited.iter_mut() {
                if !(inside && *s == idx) {
                    *far = far.max(distance(xi, &set[*s].point));
                }
            }
            if !inside {
                v.current = None;
                continue;
            }
            if v.current == Some(idx) {
                continue;
            }
            let f_new = set[idx].energy;
            for &(s, far) in &v.visited {
                if s == idx {
                    let bound = 6.0 * radius;
                    self.tally.strict_upper(SAME_RETURN, t, Some(i), far, bound, default_slack(bound));
                } else {
                    self.tally.strict_upper(NO_RETURN, t, Some(i), f_new, set[s].energy, 0.0);
                }
            }
            if v.last != Some(idx) {
                v.transitions += 1;
                v.path.push(idx);
            }
            match v.visited.iter_mut().find(|(s, _)| *s == idx) {
                Some(entry) => entry.1 = 0.0,
                None => v.visited.push((idx, 0.0)),
            }
            v.current = Some(idx);
            v.last = Some(idx);
        }
    }
}

impl Monitor for NeighborhoodMonitor<'_> {
    fn kind(&self) -> MonitorKind {
        MonitorKind::Neighborhoods
    }

    fn report(&self) -> MonitorReport {
        let mut t = self.tally.clone();
        for (i, (ctx, v)) in self.contexts.iter().zip(&self.visits).enumerate() {
            let size = ctx.stationary_set().len() as f64;
            t.upper(TRANSITIONS, self.last_t, Some(i), v.transitions as f64, size, 0.0);
            let path: Vec<String> = v
                .path
                .iter()
                .map(|&s| ctx.stationary_set()[s].label.to_string())
                .collect();
            t.note(format!(
                "column {}: epsilon {:.3e}, visits [{}]",
                i + 1,
                self.epsilons[i],
                path.join(" -> ")
            ));
        }
        if self.skipped > 0 {
            t.note(format!("{} column-steps skipped: prefix premise not met", self.skipped));
        }
        t.into_report()
    }
}

/// Re-runs a monitor over recorded trace rows. Bounds, tangent and
/// norm-floor checks only need what the trace stores; the others need full
/// iterates and come back `Vacuous` with a note.
pub fn replay(kind: MonitorKind, trace: &[TraceRecord], setup: MonitorSetup<'_>) -> MonitorReport {
    match kind {
        MonitorKind::Bounds => {
            let mut m = BoundsMonitor::new(setup.bounds);
            for r in trace {
                m.push(r.t, &r.col_norms);
            }
            m.report()
        }
        MonitorKind::Tangent => {
            if let Err(reason) = leading_gaps(&setup) {
                return MonitorReport::refused(kind.name(), reason);
            }
            let mut core = match TangentCore::new(setup.spectrum, setup.alpha) {
                Ok(c) => c,
                Err(reason) => return MonitorReport::refused(kind.name(), reason),
            };
            for r in trace {
                let tan = r.tangents.as_ref().and_then(|v| v.first().copied());
                core.push(r.t, tan.unwrap_or(f64::NAN));
            }
            core.report()
        }
        MonitorKind::NormFloor => {
            if let Err(reason) = leading_gaps(&setup) {
                return MonitorReport::refused(kind.name(), reason);
            }
            let mut core = match NormFloorCore::new(setup.spectrum, setup.p()) {
                Ok(c) => c,
                Err(reason) => return MonitorReport::refused(kind.name(), reason),
            };
            for r in trace {
                core.push(r.t, &r.col_norms);
            }
            let mut t = Tally::new(kind.name());
            core.finish_into(&mut t);
            t.into_report()
        }
        _ => {
            let mut t = Tally::new(kind.name());
            t.note("needs full iterates; not replayable from a trace");
            t.into_report()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{init_random, solve_observed, SolverConfig, Stepsize};

    fn diag4() -> (SparseSymMatrix, Spectrum) {
        let d = [-4.0, -2.0, -1.0, 3.0];
        (SparseSymMatrix::from_diagonal(&d).unwrap(), Spectrum::for_diagonal(&d))
    }

    #[test]
    fn contraction_factor_by_hand() {
        assert!((contraction_factor(0.05, -2.0, -1.0) - 1.05 / 1.1).abs() < 1e-15);
        assert!((norm_floor(-1.0) - 2f64.sqrt() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn all_monitors_pass_on_admissible_run() {
        let (a, s) = diag4();
        let bounds = DomainBounds::for_matrix(&a, 2).unwrap();
        let mut cfg = SolverConfig::new(2);
        cfg.alpha = Stepsize::Auto;
        cfg.tol = 1e-10;
        let x0 = init_random(4, &bounds, 3).unwrap();
        let alpha = crate::engine::auto_stepsize(&bounds);
        let setup = MonitorSetup {
            a: &a,
            spectrum: &s,
            alpha,
            bounds: &bounds,
        };
        let mut set = MonitorSet::new(&MonitorKind::ALL, setup, &MonitorOptions::default());
        let sol = solve_observed(&a, &cfg, x0, Some(&s), &mut [&mut set]).unwrap();
        assert_eq!(sol.outcome, crate::engine::Outcome::Converged);
        for r in set.reports() {
            assert!(r.passed(), "{}: {:?}", r.monitor, r.violations.first());
            assert!(r.checks > 0, "{} vacuous", r.monitor);
        }
    }

    #[test]
    fn degenerate_pair_refuses() {
        let d = [-3.0, -1.0, -1.0, 1.0];
        let a = SparseSymMatrix::from_diagonal(&d).unwrap();
        let s = Spectrum::for_diagonal(&d);
        let bounds = DomainBounds::for_matrix(&a, 2).unwrap();
        let setup = MonitorSetup {
            a: &a,
            spectrum: &s,
            alpha: 1e-3,
            bounds: &bounds,
        };
        for k in MonitorKind::ALL.into_iter().filter(|&k| k != MonitorKind::Bounds) {
            let m = build_monitor(k, setup, &MonitorOptions::default());
            assert_eq!(m.report().status, super::super::MonitorStatus::Refused, "{k:?}");
        }
    }

    #[test]
    fn same_return_tracks_excursion() {
        let (a, s) = diag4();
        let bounds = DomainBounds::for_matrix(&a, 1).unwrap();
        let setup = MonitorSetup {
            a: &a,
            spectrum: &s,
            alpha: crate::engine::auto_stepsize(&bounds),
            bounds: &bounds,
        };
        let eps = column_epsilons(&s, 1, &MonitorOptions::default()).unwrap()[0].unwrap();
        let bound = 6.0 * 2.0 * eps.cbrt();
        assert!(bound < 3.0);
        let at = |v: [f64; 4]| IterateBlock::from_columns(&[v.to_vec()]).unwrap();
        let min = [2.0, 0.0, 0.0, 0.0];
        // Leaves by gradient only, staying close, then comes back.
        let near = [2.0, 2.0 * eps, 0.0, 0.0];
        // Wanders to distance 3 along the positive direction.
        let far = [2.0, 0.0, 0.0, 3.0];
        let run = |path: &[[f64; 4]]| {
            let mut m = NeighborhoodMonitor::new(setup, &MonitorOptions::default()).unwrap();
            for (t, &x) in path.iter().enumerate() {
                m.observe(t, &at(x));
            }
            m.report().lemmas[SAME_RETURN].clone()
        };
        let ok = run(&[min, near, min]);
        assert_eq!((ok.checks, ok.violations), (1, 0));
        let bad = run(&[min, far, min]);
        assert_eq!((bad.checks, bad.violations), (1, 1));
    }

    #[test]
    fn frozen_descent_second_column() {
        let (a, s) = diag4();
        let bounds = DomainBounds::for_matrix(&a, 2).unwrap();
        let alpha = crate::engine::auto_stepsize(&bounds);
        let r = run_frozen_descent(&a, &s, 1, alpha, &[0.5, 0.5, 0.5, 0.5], 1e-3, 200_000, 1e-9)
            .unwrap();
        assert!(r.passed());
        assert!(r.checks > 0);
    }
}
