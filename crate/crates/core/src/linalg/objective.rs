use super::{dot, DenseMatrix, IterateBlock, LinalgError, SparseSymMatrix};

/// `XᵀX`. The upper triangle is computed and mirrored, so the result is
/// bitwise symmetric.
pub fn gram(x: &IterateBlock) -> DenseMatrix {
    let p = x.p();
    let mut g = DenseMatrix::zeros(p, p);
    for j in 0..p {
        for i in 0..=j {
            let v = dot(x.col(i), x.col(j));
            g.set(i, j, v);
            g.set(j, i, v);
        }
    }
    g
}

/// Upper triangle of a square matrix, diagonal included.
pub fn triu(m: &DenseMatrix) -> Result<DenseMatrix, LinalgError> {
    if !m.is_square() {
        return Err(LinalgError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let mut out = m.clone();
    for j in 0..m.cols() {
        for i in j + 1..m.rows() {
            out.set(i, j, 0.0);
        }
    }
    Ok(out)
}

pub(crate) fn check_dims(a: &SparseSymMatrix, x: &IterateBlock) -> Result<(), LinalgError> {
    if a.n() == x.n() {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch {
            expected: a.n(),
            found: x.n(),
        })
    }
}

/// `f(X) = ‖A + XXᵀ‖_F²`, evaluated as
/// `‖A‖_F² + 2 Σ xᵢᵀA xᵢ + ‖XᵀX‖_F²` without forming the `n x n` sum.
pub fn objective(a: &SparseSymMatrix, x: &IterateBlock) -> Result<f64, LinalgError> {
    check_dims(a, x)?;
    let cross: f64 = x.columns().map(|c| a.quadratic_form(c)).sum();
    Ok(a.frobenius_norm_sq() + 2.0 * cross + gram(x).frobenius_norm_sq())
}

/// Gradient of `f` in the absorbed convention: `AX + X(XᵀX)`.
///
/// The true gradient is four times this. Every stepsize in this crate is
/// expressed against the absorbed form, so `X - α·ofm_gradient(A, X)` is the
/// plain gradient step with stepsize `4α`.
pub fn ofm_gradient(a: &SparseSymMatrix, x: &IterateBlock) -> Result<IterateBlock, LinalgError> {
    check_dims(a, x)?;
    let g = gram(x);
    let n = x.n();
    let mut out = a.spmm(x)?.into_data();
    for j in 0..x.p() {
        let col = &mut out[j * n..(j + 1) * n];
        for k in 0..x.p() {
            let w = g.get(k, j);
            for (o, xk) in col.iter_mut().zip(x.col(k)) {
                *o += xk * w;
            }
        }
    }
    IterateBlock::from_col_major(n, x.p(), out)
}
