use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{DomainBounds, EngineError};
use crate::linalg::{norm2, IterateBlock};

fn gaussian(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}

/// Column `i` is an isotropic Gaussian direction scaled to `R_i / 2`.
pub fn init_random(n: usize, bounds: &DomainBounds, seed: u64) -> Result<IterateBlock, EngineError> {
    let p = bounds.p();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(n * p);
    for &radius in &bounds.radii {
        let mut col = gaussian(&mut rng, n);
        let scale = 0.5 * radius / norm2(&col);
        col.iter_mut().for_each(|v| *v *= scale);
        data.extend(col);
    }
    Ok(IterateBlock::from_col_major(n, p, data)?)
}

/// `saddle + E` with `E` an isotropic Gaussian block, `‖E‖_F = 0.99·delta`.
pub fn init_near_saddle(
    saddle: &IterateBlock,
    delta: f64,
    seed: u64,
) -> Result<IterateBlock, EngineError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(EngineError::InvalidConfig(format!(
            "perturbation size must be positive, got {delta}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = gaussian(&mut rng, saddle.data().len());
    let scale = 0.99 * delta / norm2(&e);
    let data = saddle
        .data()
        .iter()
        .zip(&e)
        .map(|(s, e)| s + scale * e)
        .collect();
    Ok(IterateBlock::from_col_major(saddle.n(), saddle.p(), data)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_init_hits_half_radius() {
        let b = DomainBounds::new(3.0, 2);
        let x = init_random(7, &b, 11).unwrap();
        assert!((x.col_norms()[0] - 1.5).abs() <= 4.0 * f64::EPSILON);
        assert!((x.col_norms()[1] - 3.0).abs() <= 8.0 * f64::EPSILON);
        assert_eq!(x, init_random(7, &b, 11).unwrap());
        assert_ne!(x, init_random(7, &b, 12).unwrap());
    }

    #[test]
    fn saddle_perturbation_size() {
        let s = IterateBlock::from_columns(&[vec![2.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]]).unwrap();
        let x = init_near_saddle(&s, 1e-6, 3).unwrap();
        let diff: Vec<f64> = x.data().iter().zip(s.data()).map(|(a, b)| a - b).collect();
        let d = norm2(&diff);
        assert!(d < 1e-6);
        assert!((d - 0.99e-6).abs() < 1e-15);
        assert!(init_near_saddle(&s, 0.0, 3).is_err());
        assert!(init_near_saddle(&s, -1.0, 3).is_err());
    }
}
