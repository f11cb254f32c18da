use super::TheoryError;
use crate::linalg::{dot, norm2, objective, IterateBlock, SparseSymMatrix, Spectrum};

/// Eigenvalue gaps below this are treated as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

/// Rejects `λ_{p+1} − λ_p < DEGENERACY_GAP` (the boundary of the target set).
pub fn check_boundary_gap(spectrum: &Spectrum, p: usize) -> Result<(), TheoryError> {
    if p >= 1 && p < spectrum.n() {
        let gap = spectrum.eigenvalue(p) - spectrum.eigenvalue(p - 1);
        if gap < DEGENERACY_GAP {
            return Err(TheoryError::Degenerate { index: p, gap });
        }
    }
    Ok(())
}

/// Rejects any degenerate pair `(λ_i, λ_{i+1})` with `i ≤ p` (one-based).
pub fn check_leading_gaps(spectrum: &Spectrum, p: usize) -> Result<(), TheoryError> {
    for i in 1..=p.min(spectrum.n().saturating_sub(1)) {
        let gap = spectrum.eigenvalue(i) - spectrum.eigenvalue(i - 1);
        if gap < DEGENERACY_GAP {
            return Err(TheoryError::Degenerate { index: i, gap });
        }
    }
    Ok(())
}

/// `e_vec` with the per-column scales precomputed, for per-step use.
#[derive(Debug, Clone)]
pub struct EvecEvaluator {
    scales: Vec<f64>,
    denom: f64,
}

impl EvecEvaluator {
    pub fn new(spectrum: &Spectrum, p: usize) -> Result<Self, TheoryError> {
        check_boundary_gap(spectrum, p)?;
        let scales: Vec<f64> = (0..p.min(spectrum.n()))
            .map(|i| (-spectrum.eigenvalue(i)).max(0.0).sqrt())
            .collect();
        let denom = norm2(&scales);
        Ok(Self { scales, denom })
    }

    /// Target scale `√(−λ_i)` per column, zero when `λ_i ≥ 0`.
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// `‖X − U_p√(−Λ_p)D‖_F / ‖U_p√(−Λ_p)‖_F` minimized over signs `D`.
    ///
    /// Column `i` takes `s_i = sign(u_iᵀx_i)` with ties to `+1`; each distance
    /// is summed directly. If no target is nonzero the absolute distance
    /// `‖X‖_F` is returned.
    pub fn eval(&self, x: &IterateBlock, spectrum: &Spectrum) -> f64 {
        let mut acc = 0.0;
        for (i, (col, &scale)) in x.columns().zip(&self.scales).enumerate() {
            let d = if scale == 0.0 {
                norm2(col)
            } else {
                let c = spectrum.coordinate(i, col);
                let s = if c < 0.0 { -1.0 } else { 1.0 };
                spectrum.distance_to_multiple(i, s * scale, col)
            };
            acc += d * d;
        }
        if self.denom > 0.0 {
            acc.sqrt() / self.denom
        } else {
            acc.sqrt()
        }
    }
}

pub fn e_vec(x: &IterateBlock, spectrum: &Spectrum) -> Result<f64, TheoryError> {
    check_dim(x.n(), spectrum)?;
    Ok(EvecEvaluator::new(spectrum, x.p())?.eval(x, spectrum))
}

/// Global minimum of `f` over `n x p` blocks: the deflated spectrum's
/// squared Frobenius norm.
pub fn optimal_objective(spectrum: &Spectrum, p: usize) -> f64 {
    spectrum
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(i, &l)| if i < p { l.max(0.0) * l.max(0.0) } else { l * l })
        .sum()
}

/// `f(X) − f(X*)`.
pub fn e_obj(a: &SparseSymMatrix, x: &IterateBlock, spectrum: &Spectrum) -> Result<f64, TheoryError> {
    check_dim(x.n(), spectrum)?;
    Ok(objective(a, x)? - optimal_objective(spectrum, x.p()))
}

/// Tangent of the acute angle between `x` and `span(u)`, `u` a unit vector.
/// Infinite when `x ⟂ u`.
pub fn tangent(x: &[f64], u: &[f64]) -> Result<f64, TheoryError> {
    if x.iter().all(|&v| v == 0.0) {
        return Err(TheoryError::ZeroVector);
    }
    let c = dot(u, x);
    if c == 0.0 {
        return Ok(f64::INFINITY);
    }
    let perp: f64 = x
        .iter()
        .zip(u)
        .map(|(xi, ui)| (xi - c * ui) * (xi - c * ui))
        .sum::<f64>()
        .sqrt();
    Ok(perp / c.abs())
}

fn check_dim(n: usize, spectrum: &Spectrum) -> Result<(), TheoryError> {
    if n == spectrum.n() {
        Ok(())
    } else {
        Err(crate::linalg::LinalgError::DimensionMismatch {
            expected: spectrum.n(),
            found: n,
        }
        .into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag4() -> (SparseSymMatrix, Spectrum) {
        let d = [-4.0, -2.0, -1.0, 3.0];
        (SparseSymMatrix::from_diagonal(&d).unwrap(), Spectrum::for_diagonal(&d))
    }

    #[test]
    fn e_vec_sign_invariant_and_unit_at_zero() {
        let (_, s) = diag4();
        let x = IterateBlock::from_columns(&[
            vec![-2.0, 0.0, 0.0, 0.0],
            vec![0.0, 2f64.sqrt(), 0.0, 0.0],
        ])
        .unwrap();
        assert_eq!(e_vec(&x, &s).unwrap(), 0.0);
        assert_eq!(e_vec(&IterateBlock::zeros(4, 2).unwrap(), &s).unwrap(), 1.0);
    }

    #[test]
    fn e_obj_at_zero_and_minimum() {
        let (a, s) = diag4();
        assert_eq!(e_obj(&a, &IterateBlock::zeros(4, 2).unwrap(), &s).unwrap(), 20.0);
        let x = IterateBlock::from_columns(&[
            vec![2.0, 0.0, 0.0, 0.0],
            vec![0.0, 2f64.sqrt(), 0.0, 0.0],
        ])
        .unwrap();
        assert!(e_obj(&a, &x, &s).unwrap().abs() < 1e-9);
    }

    #[test]
    fn tangent_cases() {
        let u = [1.0, 0.0, 0.0];
        assert_eq!(tangent(&[3.0, 0.0, 0.0], &u).unwrap(), 0.0);
        assert_eq!(tangent(&[0.0, 1.0, 0.0], &u).unwrap(), f64::INFINITY);
        assert_eq!(tangent(&[1.0, 1.0, 0.0], &u).unwrap(), 1.0);
        assert!(matches!(tangent(&[0.0; 3], &u), Err(TheoryError::ZeroVector)));
    }

    #[test]
    fn degenerate_boundary_rejected() {
        let s = Spectrum::for_diagonal(&[-3.0, -1.0, -1.0, 1.0]);
        assert!(check_boundary_gap(&s, 1).is_ok());
        assert!(matches!(
            check_boundary_gap(&s, 2),
            Err(TheoryError::Degenerate { index: 2, .. })
        ));
        assert!(check_leading_gaps(&s, 1).is_ok());
        assert!(check_leading_gaps(&s, 2).is_err());
    }
}
