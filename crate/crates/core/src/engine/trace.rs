use serde::{Deserialize, Serialize};

use crate::linalg::{objective, IterateBlock, SparseSymMatrix, Spectrum};
use crate::theory::{optimal_objective, residual_e_norms, tangent, EnergyContext, EvecEvaluator};

/// Diagnostics for one sampled iteration.
///
/// Oracle-dependent fields are `None` when no spectrum is attached or the
/// corresponding monitor is off. A tangent is `NaN` for a zero column and
/// infinite for a column orthogonal to its target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: usize,
    pub e_obj: Option<f64>,
    pub e_vec: Option<f64>,
    /// `‖g(X)‖_F`.
    pub dir_norm: f64,
    pub col_norms: Vec<f64>,
    pub tangents: Option<Vec<f64>>,
    /// Column energies `F_i(x_i)`.
    pub energy: Option<Vec<f64>>,
    /// `‖E‖_F` of the prefix before each column.
    pub residual_e: Option<Vec<f64>>,
}

impl TraceRecord {
    /// Record for an iterate that stopped being finite.
    pub fn diverged(t: usize, p: usize) -> Self {
        Self {
            t,
            e_obj: None,
            e_vec: None,
            dir_norm: f64::NAN,
            col_norms: vec![f64::NAN; p],
            tangents: None,
            energy: None,
            residual_e: None,
        }
    }

    pub fn p(&self) -> usize {
        self.col_norms.len()
    }
}

/// Builds [`TraceRecord`]s for one solve.
pub(crate) struct Tracer<'a> {
    a: &'a SparseSymMatrix,
    oracle: Option<&'a Spectrum>,
    evec: Option<EvecEvaluator>,
    f_star: f64,
    energies: Vec<EnergyContext<'a>>,
    residuals: bool,
}

impl<'a> Tracer<'a> {
    pub fn new(
        a: &'a SparseSymMatrix,
        p: usize,
        oracle: Option<&'a Spectrum>,
        energies: bool,
        residuals: bool,
    ) -> Self {
        let evec = oracle.and_then(|s| EvecEvaluator::new(s, p).ok());
        let f_star = oracle.map_or(0.0, |s| optimal_objective(s, p));
        let energies = match oracle {
            Some(s) if energies => (0..p)
                .map(|i| EnergyContext::new(a, s, i).expect("dimensions checked by solve"))
                .collect(),
            _ => Vec::new(),
        };
        Self {
            a,
            oracle,
            evec,
            f_star,
            energies,
            residuals: residuals && oracle.is_some(),
        }
    }

    pub fn evec(&self) -> Option<&EvecEvaluator> {
        self.evec.as_ref()
    }

    pub fn record(&self, t: usize, x: &IterateBlock, dir_norm: f64) -> TraceRecord {
        let mut r = TraceRecord {
            t,
            e_obj: None,
            e_vec: None,
            dir_norm,
            col_norms: x.col_norms().to_vec(),
            tangents: None,
            energy: None,
            residual_e: None,
        };
        let Some(s) = self.oracle else {
            return r;
        };
        r.e_obj = objective(self.a, x).ok().map(|f| f - self.f_star);
        r.e_vec = self.evec.as_ref().map(|e| e.eval(x, s));
        r.tangents = Some(
            x.columns()
                .enumerate()
                .map(|(i, col)| tangent(col, s.eigenvector(i)).unwrap_or(f64::NAN))
                .collect(),
        );
        if !self.energies.is_empty() {
            r.energy = Some(
                self.energies
                    .iter()
                    .zip(x.columns())
                    .map(|(ctx, col)| ctx.energy(col))
                    .collect(),
            );
        }
        if self.residuals {
            let mut e = residual_e_norms(x, s);
            e.pop();
            r.residual_e = Some(e);
        }
        r
    }
}
