use std::fmt;

use serde::Serialize;

use super::TheoryError;
use crate::linalg::{dot, norm2, IterateBlock, SparseSymMatrix, Spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum StationaryLabel {
    Zero,
    /// `sign · √(−λ_index) u_index`, zero-based index.
    Eigen { index: usize, sign: i8 },
}

impl fmt::Display for StationaryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StationaryLabel::Zero => write!(f, "0"),
            StationaryLabel::Eigen { index, sign } => {
                write!(f, "{}u{}", if *sign < 0 { '-' } else { '+' }, index + 1)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct StationaryPoint {
    pub label: StationaryLabel,
    pub point: Vec<f64>,
    /// `F` at the point.
    pub energy: f64,
}

/// Per-column energy `F(x) = ‖Ã + xxᵀ‖_F²` with `Ã = A + Y Yᵀ`, where `Y`
/// holds the converged prefix columns `√(−λ_k) u_k`, `k < i`.
///
/// The gradient is reported in the same absorbed scaling as the solver
/// direction: `∇F = Ãx + x(xᵀx)`, one quarter of the true gradient.
#[derive(Debug, Clone)]
pub struct EnergyContext<'a> {
    a: &'a SparseSymMatrix,
    column: usize,
    prefix: Vec<Vec<f64>>,
    a_tilde_fro_sq: f64,
    stationary: Vec<StationaryPoint>,
}

impl<'a> EnergyContext<'a> {
    /// Context for zero-based column `i`.
    pub fn new(a: &'a SparseSymMatrix, spectrum: &Spectrum, i: usize) -> Result<Self, TheoryError> {
        if a.n() != spectrum.n() {
            return Err(crate::linalg::LinalgError::DimensionMismatch {
                expected: spectrum.n(),
                found: a.n(),
            }
            .into());
        }
        if i >= a.n() {
            return Err(TheoryError::InvalidSpec(format!("column {i} outside 0..{}", a.n())));
        }
        let q = spectrum.q();
        let mut prefix = Vec::with_capacity(i);
        let mut removed = 0.0;
        for k in 0..i {
            let l = spectrum.eigenvalue(k);
            if l < 0.0 {
                let s = (-l).sqrt();
                prefix.push(spectrum.eigenvector(k).iter().map(|u| s * u).collect());
                removed += l * l;
            }
        }
        // Ã has eigenvalue 0 on the deflated prefix and λ_k elsewhere.
        let a_tilde_fro_sq = (a.frobenius_norm_sq() - removed).max(0.0);
        let mut stationary = vec![StationaryPoint {
            label: StationaryLabel::Zero,
            point: vec![0.0; a.n()],
            energy: a_tilde_fro_sq,
        }];
        for j in i..q {
            let l = spectrum.eigenvalue(j);
            let s = (-l).sqrt();
            for sign in [1i8, -1] {
                let scale = f64::from(sign) * s;
                stationary.push(StationaryPoint {
                    label: StationaryLabel::Eigen { index: j, sign },
                    point: spectrum.eigenvector(j).iter().map(|u| scale * u).collect(),
                    energy: a_tilde_fro_sq - l * l,
                });
            }
        }
        Ok(Self {
            a,
            column: i,
            prefix,
            a_tilde_fro_sq,
            stationary,
        })
    }

    pub fn column(&self) -> usize {
        self.column
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    /// Rank of the prefix correction.
    pub fn correction_rank(&self) -> usize {
        self.prefix.len()
    }

    pub fn stationary_set(&self) -> &[StationaryPoint] {
        &self.stationary
    }

    pub fn a_tilde_fro_sq(&self) -> f64 {
        self.a_tilde_fro_sq
    }

    /// Converged prefix `Y` as a block, or `None` for the first column.
    pub fn prefix_block(&self) -> Option<IterateBlock> {
        (!self.prefix.is_empty()).then(|| IterateBlock::from_columns(&self.prefix).expect("n >= i"))
    }

    /// `Ãv`.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = self.a.mul_vec(v);
        for y in &self.prefix {
            let w = dot(y, v);
            for (o, yi) in out.iter_mut().zip(y) {
                *o += w * yi;
            }
        }
        out
    }

    pub fn energy(&self, x: &[f64]) -> f64 {
        let r2 = dot(x, x);
        self.a_tilde_fro_sq + 2.0 * dot(x, &self.apply(x)) + r2 * r2
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let r2 = dot(x, x);
        let mut g = self.apply(x);
        for (gi, xi) in g.iter_mut().zip(x) {
            *gi += r2 * xi;
        }
        g
    }

    /// `F(x) − F(y)` in factored form,
    /// `2(x−y)ᵀÃ(x+y) + ((x−y)ᵀ(x+y))(‖x‖² + ‖y‖²)`, which stays accurate
    /// when the two energies nearly coincide.
    pub fn decrement(&self, x: &[f64], y: &[f64]) -> f64 {
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        let s: Vec<f64> = x.iter().zip(y).map(|(a, b)| a + b).collect();
        let ds = dot(&d, &s);
        2.0 * dot(&d, &self.apply(&s)) + ds * (dot(x, x) + dot(y, y))
    }

    /// `x − α ∇F(x)`: the solver's column update with the prefix frozen at
    /// its converged value.
    pub fn descent_step(&self, x: &[f64], alpha: f64) -> Vec<f64> {
        let g = self.grad(x);
        x.iter().zip(&g).map(|(xi, gi)| xi - alpha * gi).collect()
    }

    /// Upper bound `4 R_i²` on the Hessian norm inside the admissible ball.
    pub fn hessian_bound(radius: f64) -> f64 {
        4.0 * radius * radius
    }

    /// Nearest stationary point and its distance.
    pub fn nearest(&self, x: &[f64]) -> (usize, f64) {
        self.stationary
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let d: f64 = x
                    .iter()
                    .zip(&s.point)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                (k, d)
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("stationary set contains zero")
    }

    pub fn grad_norm(&self, x: &[f64]) -> f64 {
        norm2(&self.grad(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stationary_points_have_zero_gradient() {
        let d = [-4.0, -2.0, -1.0, 3.0];
        let a = SparseSymMatrix::from_diagonal(&d).unwrap();
        let s = Spectrum::for_diagonal(&d);
        let ctx = EnergyContext::new(&a, &s, 1).unwrap();
        assert_eq!(ctx.correction_rank(), 1);
        assert_eq!(ctx.stationary_set().len(), 1 + 2 * 2);
        for p in ctx.stationary_set() {
            assert!(ctx.grad_norm(&p.point) < 1e-14);
            assert!((ctx.energy(&p.point) - p.energy).abs() < 1e-12);
        }
        let zero = [0.0; 4];
        assert_eq!(ctx.energy(&zero), 4.0 + 1.0 + 9.0);
    }

    #[test]
    fn decrement_matches_difference() {
        let d = [-4.0, -2.0, -1.0, 3.0];
        let a = SparseSymMatrix::from_diagonal(&d).unwrap();
        let s = Spectrum::for_diagonal(&d);
        let ctx = EnergyContext::new(&a, &s, 1).unwrap();
        let x = [0.3, -0.2, 0.9, 0.1];
        let y = ctx.descent_step(&x, 0.01);
        let direct = ctx.energy(&x) - ctx.energy(&y);
        assert!((ctx.decrement(&x, &y) - direct).abs() < 1e-12);
    }

    #[test]
    fn labels_are_one_based() {
        assert_eq!(StationaryLabel::Eigen { index: 2, sign: -1 }.to_string(), "-u3");
        assert_eq!(StationaryLabel::Zero.to_string(), "0");
    }
}
