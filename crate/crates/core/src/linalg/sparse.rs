use std::sync::OnceLock;

use super::{IterateBlock, LinalgError};

/// Symmetric sparse matrix in CSR layout, with both triangles stored.
///
/// Construction validates exact (bitwise) symmetry. The spectral-norm
/// estimate is computed lazily and cached, see
/// [`SparseSymMatrix::spectral_norm_estimate`].
#[derive(Debug, Clone)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    rho: OnceLock<f64>,
}

impl PartialEq for SparseSymMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.row_ptr == other.row_ptr
            && self.col_idx == other.col_idx
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

impl SparseSymMatrix {
    /// Builds a matrix from raw CSR arrays, checking every structural and
    /// numerical invariant.
    pub fn from_csr(
        n: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self, LinalgError> {
        if row_ptr.len() != n + 1 || row_ptr[0] != 0 {
            return Err(LinalgError::InvalidStructure(format!(
                "row_ptr must have length {} and start at 0",
                n + 1
            )));
        }
        if col_idx.len() != values.len() || row_ptr[n] != col_idx.len() {
            return Err(LinalgError::InvalidStructure(
                "row_ptr[n], col_idx and values lengths disagree".into(),
            ));
        }
        for row in 0..n {
            let (lo, hi) = (row_ptr[row], row_ptr[row + 1]);
            if lo > hi {
                return Err(LinalgError::InvalidStructure(format!(
                    "row_ptr decreases at row {row}"
                )));
            }
            for k in lo..hi {
                let col = col_idx[k];
                if col >= n {
                    return Err(LinalgError::InvalidStructure(format!(
                        "column index {col} out of range in row {row}"
                    )));
                }
                if k > lo && col_idx[k - 1] >= col {
                    return Err(LinalgError::InvalidStructure(format!(
                        "column indices not strictly increasing in row {row}"
                    )));
                }
                if !values[k].is_finite() {
                    return Err(LinalgError::NonFinite { row, col });
                }
            }
        }
        let m = Self {
            n,
            row_ptr,
            col_idx,
            values,
            rho: OnceLock::new(),
        };
        for row in 0..n {
            for (col, v) in m.row(row) {
                match m.get(col, row) {
                    Some(w) if w.to_bits() == v.to_bits() => {}
                    _ => return Err(LinalgError::NotSymmetric { row, col }),
                }
            }
        }
        Ok(m)
    }

    /// Builds a matrix from triplets where each off-diagonal entry is listed
    /// once (either triangle); it is mirrored to full storage.
    ///
    /// Two triplets addressing the same unordered pair are rejected.
    pub fn from_triangle_triplets(
        n: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, LinalgError> {
        let mut full: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * triplets.len());
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(LinalgError::IndexOutOfRange { row: i, col: j, n });
            }
            full.push((i, j, v));
            if i != j {
                full.push((j, i, v));
            }
        }
        full.sort_by_key(|&(i, j, _)| (i, j));
        for w in full.windows(2) {
            if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
                return Err(LinalgError::DuplicateEntry {
                    row: w[0].0.max(w[0].1),
                    col: w[0].0.min(w[0].1),
                });
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for &(i, _, _) in &full {
            row_ptr[i + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx = full.iter().map(|&(_, j, _)| j).collect();
        let values = full.iter().map(|&(_, _, v)| v).collect();
        Self::from_csr(n, row_ptr, col_idx, values)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self, LinalgError> {
        let n = diag.len();
        Self::from_csr(n, (0..=n).collect(), (0..n).collect(), diag.to_vec())
    }

    /// Converts a dense symmetric matrix (column-major, `n*n`), dropping
    /// exact zeros.
    pub fn from_dense(n: usize, dense: &[f64]) -> Result<Self, LinalgError> {
        if dense.len() != n * n {
            return Err(LinalgError::DimensionMismatch {
                expected: n * n,
                found: dense.len(),
            });
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for j in 0..n {
                let v = dense[i + j * n];
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self::from_csr(n, row_ptr, col_idx, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates `(col, value)` over the stored entries of one row.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        self.col_idx[range.clone()]
            .binary_search(&col)
            .ok()
            .map(|k| self.values[range.start + k])
    }

    /// Entries of the lower triangle (including the diagonal), row-major.
    pub fn lower_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz().div_ceil(2) + self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                if j <= i {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for (j, v) in self.row(i) {
                d[i + j * n] = v;
            }
        }
        d
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// `out = A x`. Each output entry is an independent dot product over
    /// the stored row, summed in column order.
    #[inline]
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(out.len(), self.n);
        for (row, o) in out.iter_mut().enumerate() {
            let lo = self.row_ptr[row];
            let hi = self.row_ptr[row + 1];
            let mut acc = 0.0;
            for k in lo..hi {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *o = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.mul_vec_into(x, &mut out);
        out
    }

    /// Sparse times tall block, column by column.
    pub fn spmm(&self, x: &IterateBlock) -> Result<IterateBlock, LinalgError> {
        if x.n() != self.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n,
                found: x.n(),
            });
        }
        let mut data = vec![0.0; x.n() * x.p()];
        for (j, out) in data.chunks_exact_mut(self.n).enumerate() {
            self.mul_vec_into(x.col(j), out);
        }
        IterateBlock::from_col_major(self.n, x.p(), data)
    }

    /// Cached spectral-norm estimate, if one was computed already.
    pub fn cached_rho(&self) -> Option<f64> {
        self.rho.get().copied()
    }

    pub(crate) fn cache_rho(&self, value: f64) -> f64 {
        *self.rho.get_or_init(|| value)
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, xi) in x.iter().enumerate() {
            let mut row = 0.0;
            for (j, v) in self.row(i) {
                row += v * x[j];
            }
            acc += xi * row;
        }
        acc
    }

    /// `xᵀ A y`, exploiting symmetry only through the caller.
    pub fn bilinear_form(&self, x: &[f64], y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (i, xi) in x.iter().enumerate() {
            let mut row = 0.0;
            for (j, v) in self.row(i) {
                row += v * y[j];
            }
            acc += xi * row;
        }
        acc
    }
}
