//! Triangularized orthogonalization-free eigensolver (TriOFM) for the
//! lowest eigenpairs of sparse symmetric matrices.
//!
//! The iteration minimizes `‖A + XXᵀ‖_F²` with a direction whose Gram factor
//! is replaced by its upper triangle, which decouples each column from the
//! ones after it. The [`theory`] module turns the method's convergence
//! guarantees into monitors that run over realized trajectories.

pub mod cli;
pub mod engine;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod theory;
