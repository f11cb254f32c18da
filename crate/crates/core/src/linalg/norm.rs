use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{norm2, LinalgError, SparseSymMatrix};

pub const DEFAULT_RHO_REL_TOL: f64 = 1e-10;
pub const RHO_INFLATION: f64 = 1.05;
const MAX_POWER_ITERS: usize = 100_000;
const START_SEED: u64 = 0x0005_eed0_f00d;

/// Inflated power-iteration estimate of `‖A‖₂`, cached on the matrix.
///
/// The estimate at each step is `‖A v‖` for unit `v`, the square root of the
/// Rayleigh quotient of `A²`. It never exceeds `‖A‖₂` and, unlike `vᵀAv`,
/// still converges when `±‖A‖₂` are both eigenvalues. Once the relative
/// change drops below `rel_tol` the value is multiplied by
/// [`RHO_INFLATION`]. A zero matrix yields 0.
///
/// If the matrix already carries a cached estimate, that value is returned
/// unchanged.
pub fn spectral_norm_estimate(a: &SparseSymMatrix, rel_tol: f64) -> Result<f64, LinalgError> {
    if let Some(rho) = a.cached_rho() {
        return Ok(rho);
    }
    if a.is_zero() {
        return Ok(a.cache_rho(0.0));
    }
    let n = a.n();
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut w = vec![0.0; n];
    let mut prev = 0.0;
    for _ in 0..MAX_POWER_ITERS {
        a.mul_vec_into(&v, &mut w);
        let est = norm2(&w);
        if est == 0.0 {
            // Start vector landed in the null space; a zero matrix was
            // excluded above, so nudge along a coordinate axis.
            v.iter_mut().for_each(|x| *x = 0.0);
            v[0] = 1.0;
            continue;
        }
        if (est - prev).abs() < rel_tol * est {
            return Ok(a.cache_rho(est * RHO_INFLATION));
        }
        prev = est;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / est;
        }
    }
    Err(LinalgError::NoConvergence {
        iterations: MAX_POWER_ITERS,
    })
}

impl SparseSymMatrix {
    /// Cached spectral-norm estimate with the default tolerance.
    pub fn spectral_norm_estimate(&self) -> Result<f64, LinalgError> {
        spectral_norm_estimate(self, DEFAULT_RHO_REL_TOL)
    }
}
