//! Dense and sparse kernels used by the solver and its oracles.

mod block;
mod dense;
mod norm;
mod objective;
mod sparse;

pub use block::IterateBlock;
pub use dense::{dense_symmetric_eig, dense_symmetric_eig_with_cap, DenseMatrix, Spectrum, DEFAULT_EIG_CAP};
pub use norm::{spectral_norm_estimate, DEFAULT_RHO_REL_TOL, RHO_INFLATION};
pub use objective::{gram, objective, ofm_gradient, triu};
pub(crate) use objective::check_dims;
pub use sparse::SparseSymMatrix;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("index ({row}, {col}) out of range for n = {n}")]
    IndexOutOfRange { row: usize, col: usize, n: usize },
    #[error("duplicate entry at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },
    #[error("invalid CSR structure: {0}")]
    InvalidStructure(String),
    #[error("invalid block: {0}")]
    InvalidBlock(String),
    #[error("dense eigensolver cap exceeded: n = {n} > {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("power iteration did not converge in {iterations} iterations")]
    NoConvergence { iterations: usize },
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // Four independent partial sums; the single-accumulator loop is bound
    // by add latency.
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    let mut acc = [0.0; 4];
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
