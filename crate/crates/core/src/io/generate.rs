use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::IoError;
use crate::linalg::{SparseSymMatrix, Spectrum};

/// Synthetic test operators.
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    Diag(Vec<f64>),
    Laplacian2d { nx: usize, ny: usize, shift: f64 },
    RandomSparseShifted { n: usize, density: f64, shift: f64, seed: u64 },
}

impl GeneratorSpec {
    pub fn build(&self) -> Result<SparseSymMatrix, IoError> {
        match self {
            GeneratorSpec::Diag(d) => gen_diag(d),
            GeneratorSpec::Laplacian2d { nx, ny, shift } => gen_laplacian2d(*nx, *ny, *shift),
            GeneratorSpec::RandomSparseShifted {
                n,
                density,
                shift,
                seed,
            } => gen_random_sparse_shifted(*n, *density, *shift, *seed),
        }
    }

    /// Spectrum available without a dense eigensolve, if any.
    pub fn closed_form_spectrum(&self) -> Option<Spectrum> {
        match self {
            GeneratorSpec::Diag(d) => Some(Spectrum::for_diagonal(d)),
            _ => None,
        }
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Diag(d) => {
                let parts: Vec<String> = d.iter().map(|v| super::format_f64(*v)).collect();
                write!(f, "gen:diag={}", parts.join(","))
            }
            GeneratorSpec::Laplacian2d { nx, ny, shift } => {
                write!(f, "gen:lap2d={nx},{ny},{}", super::format_f64(*shift))
            }
            GeneratorSpec::RandomSparseShifted {
                n,
                density,
                shift,
                seed,
            } => write!(
                f,
                "gen:rand={n},{},{},{seed}",
                super::format_f64(*density),
                super::format_f64(*shift)
            ),
        }
    }
}

pub fn gen_diag(eigs: &[f64]) -> Result<SparseSymMatrix, IoError> {
    if eigs.is_empty() {
        return Err(IoError::Parse("diag generator needs at least one value".into()));
    }
    Ok(SparseSymMatrix::from_diagonal(eigs)?)
}

/// 5-point Dirichlet Laplacian on an `nx × ny` grid minus `shift·I`.
/// Grid point `(i, j)` has index `i + nx·j`.
pub fn gen_laplacian2d(nx: usize, ny: usize, shift: f64) -> Result<SparseSymMatrix, IoError> {
    if nx < 2 || ny < 2 {
        return Err(IoError::Parse(format!("lap2d grid must be at least 2x2, got {nx}x{ny}")));
    }
    if !shift.is_finite() {
        return Err(IoError::Parse(format!("lap2d shift must be finite, got {shift}")));
    }
    let n = nx * ny;
    let mut trip = Vec::with_capacity(3 * n);
    for j in 0..ny {
        for i in 0..nx {
            let k = i + nx * j;
            trip.push((k, k, 4.0 - shift));
            if i + 1 < nx {
                trip.push((k + 1, k, -1.0));
            }
            if j + 1 < ny {
                trip.push((k + nx, k, -1.0));
            }
        }
    }
    Ok(SparseSymMatrix::from_triangle_triplets(n, &trip)?)
}

/// `4 − 2cos(kπ/(nx+1)) − 2cos(lπ/(ny+1)) − shift`, sorted ascending.
pub fn laplacian2d_eigenvalues(nx: usize, ny: usize, shift: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(nx * ny);
    for k in 1..=nx {
        for l in 1..=ny {
            let a = (k as f64 * PI / (nx + 1) as f64).cos();
            let b = (l as f64 * PI / (ny + 1) as f64).cos();
            out.push(4.0 - 2.0 * a - 2.0 * b - shift);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Each position `(i, j)` with `i ≥ j` is kept with probability `density`
/// and given a standard Gaussian value; then `shift` is subtracted from
/// the diagonal.
pub fn gen_random_sparse_shifted(
    n: usize,
    density: f64,
    shift: f64,
    seed: u64,
) -> Result<SparseSymMatrix, IoError> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(IoError::Parse(format!("density must be in (0, 1], got {density}")));
    }
    if density * (n as f64) < 2.0 {
        return Err(IoError::Parse(format!(
            "density * n must be at least 2, got {}",
            density * n as f64
        )));
    }
    if !shift.is_finite() {
        return Err(IoError::Parse(format!("shift must be finite, got {shift}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trip = Vec::new();
    for i in 0..n {
        let mut diag = -shift;
        for j in 0..=i {
            if rng.gen::<f64>() < density {
                let v: f64 = rng.sample(StandardNormal);
                if i == j {
                    diag += v;
                } else {
                    trip.push((i, j, v));
                }
            }
        }
        if diag != 0.0 {
            trip.push((i, i, diag));
        }
    }
    Ok(SparseSymMatrix::from_triangle_triplets(n, &trip)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_closed_forms() {
        let ev = laplacian2d_eigenvalues(2, 2, 0.0);
        for (a, b) in ev.iter().zip([2.0, 4.0, 4.0, 6.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        let ev = laplacian2d_eigenvalues(2, 2, 5.0);
        for (a, b) in ev.iter().zip([-3.0, -1.0, -1.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        let a = gen_laplacian2d(2, 2, 0.0).unwrap();
        assert_eq!(a.nnz(), 4 + 8);
        assert_eq!(a.get(0, 1), Some(-1.0));
        assert_eq!(a.get(0, 3), None);
    }

    #[test]
    fn random_is_reproducible() {
        let a = gen_random_sparse_shifted(30, 0.2, 1.0, 9).unwrap();
        assert_eq!(a, gen_random_sparse_shifted(30, 0.2, 1.0, 9).unwrap());
        assert_ne!(a, gen_random_sparse_shifted(30, 0.2, 1.0, 10).unwrap());
        assert!(gen_random_sparse_shifted(10, 0.1, 0.0, 1).is_err());
    }

    #[test]
    fn display_round_trips_through_source() {
        let g = GeneratorSpec::RandomSparseShifted {
            n: 80,
            density: 0.05,
            shift: 2.0,
            seed: 4,
        };
        assert_eq!(g.to_string(), "gen:rand=80,0.05,2,4");
    }
}
