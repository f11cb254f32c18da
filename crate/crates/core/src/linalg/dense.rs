use super::{dot, LinalgError, SparseSymMatrix};

pub const DEFAULT_EIG_CAP: usize = 4096;

const OFFDIAG_REL_TOL: f64 = 1e-12;
const SYMMETRY_REL_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;
/// Components below this are treated as zero when fixing eigenvector signs.
const SIGN_THRESHOLD: f64 = 1e-10;

/// Small dense matrix, column-major. Used for `p x p` Gram blocks and as
/// input to the Jacobi oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds from nested rows, convenient for literals in tests.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(LinalgError::DimensionMismatch {
                    expected: c,
                    found: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i + j * self.rows]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i + j * self.rows] = v;
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        dot(&self.data, &self.data)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

/// Eigendecomposition of a symmetric matrix with ascending eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    n: usize,
    eigenvalues: Vec<f64>,
    /// `n x n`, column-major; column `i` pairs with `eigenvalues[i]`.
    eigenvectors: Vec<f64>,
    q: usize,
    /// Set when every eigenvector is `±e_k`: `(k, sign)` per eigenpair.
    axes: Option<Vec<(usize, f64)>>,
}

impl Spectrum {
    /// Assembles a spectrum from already-sorted parts, recomputing `q`.
    pub fn from_parts(eigenvalues: Vec<f64>, eigenvectors: Vec<f64>) -> Result<Self, LinalgError> {
        let n = eigenvalues.len();
        if eigenvectors.len() != n * n {
            return Err(LinalgError::DimensionMismatch {
                expected: n * n,
                found: eigenvectors.len(),
            });
        }
        let q = eigenvalues.iter().filter(|&&l| l < 0.0).count();
        let axes = signed_axes(n, &eigenvectors);
        Ok(Self {
            n,
            eigenvalues,
            eigenvectors,
            q,
            axes,
        })
    }

    /// Exact spectrum of a diagonal matrix: a stable sort plus unit vectors.
    pub fn for_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]));
        let mut vecs = vec![0.0; n * n];
        for (slot, &k) in order.iter().enumerate() {
            vecs[k + slot * n] = 1.0;
        }
        let vals = order.iter().map(|&k| diag[k]).collect();
        Self::from_parts(vals, vecs).expect("sizes agree by construction")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Zero-based: `eigenvalue(0)` is the lowest.
    pub fn eigenvalue(&self, i: usize) -> f64 {
        self.eigenvalues[i]
    }

    pub fn eigenvector(&self, i: usize) -> &[f64] {
        &self.eigenvectors[i * self.n..(i + 1) * self.n]
    }

    pub fn eigenvectors(&self) -> &[f64] {
        &self.eigenvectors
    }

    /// `max |λ|`, the exact 2-norm.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs()))
    }

    /// Coordinates of `x` in the eigenbasis, `Uᵀx`.
    pub fn rotate(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.rotate_into(x, &mut out);
        out
    }

    pub fn rotate_into(&self, x: &[f64], out: &mut [f64]) {
        match &self.axes {
            Some(axes) => {
                for (o, &(k, s)) in out.iter_mut().zip(axes) {
                    *o = s * x[k];
                }
            }
            None => {
                for (k, o) in out.iter_mut().enumerate() {
                    *o = dot(self.eigenvector(k), x);
                }
            }
        }
    }

    /// `u_kᵀx`.
    #[inline]
    pub fn coordinate(&self, k: usize, x: &[f64]) -> f64 {
        match &self.axes {
            Some(axes) => axes[k].1 * x[axes[k].0],
            None => dot(self.eigenvector(k), x),
        }
    }

    /// `‖x − c u_k‖` without cancellation against `‖x‖`.
    pub fn distance_to_multiple(&self, k: usize, c: f64, x: &[f64]) -> f64 {
        match &self.axes {
            Some(axes) => {
                let (idx, s) = axes[k];
                let mut acc = 0.0;
                for (j, v) in x.iter().enumerate() {
                    let d = if j == idx { v - c * s } else { *v };
                    acc += d * d;
                }
                acc.sqrt()
            }
            None => {
                let u = self.eigenvector(k);
                let mut acc = 0.0;
                for (v, uj) in x.iter().zip(u) {
                    let d = v - c * uj;
                    acc += d * d;
                }
                acc.sqrt()
            }
        }
    }

    /// Whether every eigenvector is a signed coordinate axis.
    pub fn is_axis_aligned(&self) -> bool {
        self.axes.is_some()
    }

    /// Smallest gap `λ_{i+1} − λ_i` over `i < m` (zero-based pairs up to
    /// index `m`), or `None` when there is no such pair.
    pub fn min_gap_through(&self, m: usize) -> Option<f64> {
        let upto = m.min(self.n.saturating_sub(1));
        (0..upto)
            .map(|i| self.eigenvalues[i + 1] - self.eigenvalues[i])
            .reduce(f64::min)
    }
}

fn signed_axes(n: usize, vecs: &[f64]) -> Option<Vec<(usize, f64)>> {
    let mut out = Vec::with_capacity(n);
    for col in vecs.chunks_exact(n.max(1)).take(n) {
        let mut hit = None;
        for (k, &v) in col.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            if (v == 1.0 || v == -1.0) && hit.is_none() {
                hit = Some((k, v));
            } else {
                return None;
            }
        }
        out.push(hit?);
    }
    Some(out)
}

pub fn dense_symmetric_eig(a: &DenseMatrix) -> Result<Spectrum, LinalgError> {
    dense_symmetric_eig_with_cap(a, DEFAULT_EIG_CAP)
}

/// Cyclic Jacobi eigendecomposition.
///
/// Sweeps until the largest off-diagonal magnitude is at most
/// `1e-12 * ‖A‖_F`. Eigenpairs come back ascending (stable sort), and each
/// eigenvector's first significant component is made positive.
pub fn dense_symmetric_eig_with_cap(a: &DenseMatrix, cap: usize) -> Result<Spectrum, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n > cap {
        return Err(LinalgError::CapExceeded { n, cap });
    }
    let fro = a.frobenius_norm_sq().sqrt();
    for j in 0..n {
        for i in 0..n {
            let v = a.get(i, j);
            if !v.is_finite() {
                return Err(LinalgError::NonFinite { row: i, col: j });
            }
            if i < j && (v - a.get(j, i)).abs() > SYMMETRY_REL_TOL * fro {
                return Err(LinalgError::NotSymmetric { row: i, col: j });
            }
        }
    }

    // Work on the symmetrized copy so tiny input asymmetry cannot bias it.
    let mut m = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            m[i + j * n] = 0.5 * (a.get(i, j) + a.get(j, i));
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i + i * n] = 1.0;
    }
    let threshold = OFFDIAG_REL_TOL * fro;

    for _ in 0..MAX_SWEEPS {
        let mut max_off = 0.0_f64;
        for j in 0..n {
            for i in 0..j {
                max_off = max_off.max(m[i + j * n].abs());
            }
        }
        if max_off <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p + q * n];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p + p * n];
                let aqq = m[q + q * n];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // M <- Jᵀ M J on rows/cols p and q.
                for k in 0..n {
                    let mkp = m[k + p * n];
                    let mkq = m[k + q * n];
                    m[k + p * n] = c * mkp - s * mkq;
                    m[k + q * n] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p + k * n];
                    let mqk = m[q + k * n];
                    m[p + k * n] = c * mpk - s * mqk;
                    m[q + k * n] = s * mpk + c * mqk;
                }
                m[p + q * n] = 0.0;
                m[q + p * n] = 0.0;
                for k in 0..n {
                    let vkp = v[k + p * n];
                    let vkq = v[k + q * n];
                    v[k + p * n] = c * vkp - s * vkq;
                    v[k + q * n] = s * vkp + c * vkq;
                }
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| m[i + i * n]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| diag[x].total_cmp(&diag[y]));
    let mut vecs = vec![0.0; n * n];
    for (slot, &k) in order.iter().enumerate() {
        let src = &v[k * n..(k + 1) * n];
        let sign = src
            .iter()
            .find(|c| c.abs() > SIGN_THRESHOLD)
            .map_or(1.0, |c| c.signum());
        for (dst, s) in vecs[slot * n..(slot + 1) * n].iter_mut().zip(src) {
            *dst = sign * s;
        }
    }
    Spectrum::from_parts(order.iter().map(|&k| diag[k]).collect(), vecs)
}

impl SparseSymMatrix {
    pub fn to_dense_matrix(&self) -> DenseMatrix {
        DenseMatrix::from_col_major(self.n(), self.n(), self.to_dense()).expect("n x n")
    }

    /// Oracle spectrum via dense Jacobi.
    pub fn dense_spectrum(&self) -> Result<Spectrum, LinalgError> {
        dense_symmetric_eig(&self.to_dense_matrix())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input_sorted_with_q() {
        let a = DenseMatrix::from_rows(&[
            vec![3.0, 0.0, 0.0, 0.0],
            vec![0.0, -1.0, 0.0, 0.0],
            vec![0.0, 0.0, -4.0, 0.0],
            vec![0.0, 0.0, 0.0, -2.0],
        ])
        .unwrap();
        let s = dense_symmetric_eig(&a).unwrap();
        assert_eq!(s.eigenvalues(), &[-4.0, -2.0, -1.0, 3.0]);
        assert_eq!(s.q(), 3);
        assert_eq!(s.eigenvector(0), &[0.0, 0.0, 1.0, 0.0]);
        assert_eq!(s.eigenvector(3), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn swap_matrix_closed_form() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let s = dense_symmetric_eig(&a).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.eigenvalue(0) + 1.0).abs() < 1e-15);
        assert!((s.eigenvalue(1) - 1.0).abs() < 1e-15);
        for (got, want) in s.eigenvector(0).iter().zip([r, -r]) {
            assert!((got - want).abs() < 1e-15);
        }
        for (got, want) in s.eigenvector(1).iter().zip([r, r]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_asymmetric_and_oversized() {
        let a = DenseMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        assert!(matches!(
            dense_symmetric_eig(&a),
            Err(LinalgError::NotSymmetric { .. })
        ));
        let b = DenseMatrix::identity(3);
        assert!(matches!(
            dense_symmetric_eig_with_cap(&b, 2),
            Err(LinalgError::CapExceeded { n: 3, cap: 2 })
        ));
    }

    #[test]
    fn for_diagonal_matches_jacobi() {
        let d = [0.5, -3.0, 2.0, -0.25];
        let exact = Spectrum::for_diagonal(&d);
        let jac = SparseSymMatrix::from_diagonal(&d).unwrap().dense_spectrum().unwrap();
        assert_eq!(exact, jac);
    }
}
