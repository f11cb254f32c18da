use crate::linalg::{dense_symmetric_eig, dot, DenseMatrix, IterateBlock, SparseSymMatrix};

use super::TheoryError;

/// Diagonal block `J_kk = A + X_k X_kᵀ + (x_kᵀx_k) I + x_k x_kᵀ` of the
/// Jacobian of `g`, where `X_k` holds columns `0..=k` (zero-based).
#[derive(Debug, Clone, Copy)]
pub struct JacobianBlock<'a> {
    a: &'a SparseSymMatrix,
    x: &'a IterateBlock,
    k: usize,
}

impl<'a> JacobianBlock<'a> {
    pub fn new(a: &'a SparseSymMatrix, x: &'a IterateBlock, k: usize) -> Result<Self, TheoryError> {
        crate::linalg::check_dims(a, x)?;
        if k >= x.p() {
            return Err(TheoryError::InvalidSpec(format!(
                "block index {k} outside 0..{}",
                x.p()
            )));
        }
        Ok(Self { a, x, k })
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = self.a.mul_vec(v);
        let xk = self.x.col(self.k);
        let rk2 = dot(xk, xk);
        for j in 0..=self.k {
            let xj = self.x.col(j);
            let w = dot(xj, v);
            for (o, xi) in out.iter_mut().zip(xj) {
                *o += w * xi;
            }
        }
        let w = dot(xk, v);
        for ((o, vi), xi) in out.iter_mut().zip(v).zip(xk) {
            *o += rk2 * vi + w * xi;
        }
        out
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.x.n();
        let mut data = Vec::with_capacity(n * n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            data.extend(self.apply(&e));
            e[j] = 0.0;
        }
        DenseMatrix::from_col_major(n, n, data).expect("n x n")
    }

    /// Smallest eigenvalue via the dense oracle. Positive certifies the
    /// block as locally contracting, negative as unstable.
    pub fn min_eigenvalue(&self) -> Result<f64, TheoryError> {
        let s = dense_symmetric_eig(&self.to_dense())?;
        Ok(s.eigenvalue(0))
    }

    pub fn max_abs_eigenvalue(&self) -> Result<f64, TheoryError> {
        Ok(dense_symmetric_eig(&self.to_dense())?.spectral_norm())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_block_on_diagonal() {
        let a = SparseSymMatrix::from_diagonal(&[-4.0, -2.0, -1.0, 3.0]).unwrap();
        let x = IterateBlock::from_columns(&[
            vec![2.0, 0.0, 0.0, 0.0],
            vec![0.0, 2f64.sqrt(), 0.0, 0.0],
        ])
        .unwrap();
        let j = JacobianBlock::new(&a, &x, 0).unwrap();
        let d = j.to_dense();
        for (i, want) in [8.0, 2.0, 3.0, 7.0].iter().enumerate() {
            assert!((d.get(i, i) - want).abs() < 1e-14);
        }
        assert!(j.min_eigenvalue().unwrap() > 0.0);
    }

    #[test]
    fn zero_block_reduces_to_a() {
        let a = SparseSymMatrix::from_diagonal(&[-4.0, -2.0, -1.0, 3.0]).unwrap();
        let x = IterateBlock::zeros(4, 2).unwrap();
        let j = JacobianBlock::new(&a, &x, 1).unwrap();
        assert_eq!(j.to_dense(), a.to_dense_matrix());
        assert_eq!(j.min_eigenvalue().unwrap(), -4.0);
    }
}
