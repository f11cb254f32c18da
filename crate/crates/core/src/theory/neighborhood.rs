use serde::Serialize;

use super::{EnergyContext, StationaryLabel, TheoryError};
use crate::linalg::Spectrum;

/// Upper limits on `ε_i` under which the stationary-proximity and
/// neighborhood arguments hold for zero-based column `i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonThresholds {
    /// `(min{min_gap/2, −λ_q/n})^{3/2}`, gaps over the pairs `i..q`.
    pub proximity: f64,
    /// `(√(−λ_q) / (9√n))³`.
    pub no_return: f64,
    /// `(√(−λ_q) / (6√n))³`.
    pub same_return: f64,
}

impl EpsilonThresholds {
    pub fn new(spectrum: &Spectrum, i: usize) -> Result<Self, TheoryError> {
        let q = spectrum.q();
        if i >= q {
            return Err(TheoryError::Unsupported(format!(
                "column {} has no nonzero stationary point (q = {q})",
                i + 1
            )));
        }
        let n = spectrum.n() as f64;
        let lq = -spectrum.eigenvalue(q - 1);
        let gap = (i..q - 1)
            .map(|j| spectrum.eigenvalue(j + 1) - spectrum.eigenvalue(j))
            .fold(f64::INFINITY, f64::min);
        if gap < super::DEGENERACY_GAP {
            let index = (i..q - 1)
                .find(|&j| spectrum.eigenvalue(j + 1) - spectrum.eigenvalue(j) == gap)
                .map_or(i, |j| j + 1);
            return Err(TheoryError::Degenerate { index, gap });
        }
        Ok(Self {
            proximity: (0.5 * gap).min(lq / n).powf(1.5),
            no_return: (lq.sqrt() / (9.0 * n.sqrt())).powi(3),
            same_return: (lq.sqrt() / (6.0 * n.sqrt())).powi(3),
        })
    }

    pub fn min(&self) -> f64 {
        self.proximity.min(self.no_return).min(self.same_return)
    }
}

pub fn proximity_threshold(spectrum: &Spectrum, i: usize) -> Result<f64, TheoryError> {
    Ok(EpsilonThresholds::new(spectrum, i)?.proximity)
}

/// One tenth of the smallest threshold.
pub fn default_epsilon(spectrum: &Spectrum, i: usize) -> Result<f64, TheoryError> {
    Ok(0.1 * EpsilonThresholds::new(spectrum, i)?.min())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Proximity {
    pub label: StationaryLabel,
    pub distance: f64,
    pub grad_norm: f64,
    /// `√n ε^{1/3}`.
    pub bound: f64,
    /// False only when `‖∇F‖ < ε` and `distance > bound`.
    pub holds: bool,
}

/// Nearest stationary point of the column energy and whether the proximity
/// guarantee holds at `x`. Refuses when `epsilon` is not below the
/// guarantee's threshold.
pub fn stationary_proximity(
    ctx: &EnergyContext<'_>,
    spectrum: &Spectrum,
    x: &[f64],
    epsilon: f64,
) -> Result<Proximity, TheoryError> {
    let limit = proximity_threshold(spectrum, ctx.column())?;
    if !(epsilon > 0.0 && epsilon < limit) {
        return Err(TheoryError::PremiseViolated {
            lemma: "stationary-proximity".into(),
            detail: format!("epsilon {epsilon:e} not in (0, {limit:e})"),
        });
    }
    let (idx, distance) = ctx.nearest(x);
    let grad_norm = ctx.grad_norm(x);
    let bound = (ctx.n() as f64).sqrt() * epsilon.cbrt();
    Ok(Proximity {
        label: ctx.stationary_set()[idx].label,
        distance,
        grad_norm,
        bound,
        holds: grad_norm >= epsilon || distance <= bound,
    })
}
