//! Dense reference routines shared by the integration tests. Everything
//! here is written from scratch so it can serve as a second route against
//! the library.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use triofm::linalg::{IterateBlock, SparseSymMatrix};

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn gaussian_block(rng: &mut ChaCha8Rng, n: usize, p: usize, scale: f64) -> IterateBlock {
    let cols: Vec<Vec<f64>> = (0..p)
        .map(|_| gaussian_vec(rng, n).into_iter().map(|v| scale * v).collect())
        .collect();
    IterateBlock::from_columns(&cols).unwrap()
}

/// Random symmetric matrix with Gaussian entries, returned both ways.
pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> (SparseSymMatrix, Dense) {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let v: f64 = rng.sample(StandardNormal);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    (from_rows(&d), d)
}

pub fn from_rows(d: &Dense) -> SparseSymMatrix {
    let n = d.len();
    let mut cm = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            cm[i + j * n] = d[i][j];
        }
    }
    SparseSymMatrix::from_dense(n, &cm).unwrap()
}

/// Densifies by reading every entry through `get`.
pub fn densify(a: &SparseSymMatrix) -> Dense {
    let n = a.n();
    (0..n)
        .map(|i| (0..n).map(|j| a.get(i, j).unwrap_or(0.0)).collect())
        .collect()
}

pub fn block_to_rows(x: &IterateBlock) -> Dense {
    (0..x.n()).map(|i| (0..x.p()).map(|j| x.col(j)[i]).collect()).collect()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (r, k, c) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![0.0; c]; r];
    for i in 0..r {
        for j in 0..c {
            for l in 0..k {
                out[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    out
}

pub fn transpose(a: &Dense) -> Dense {
    (0..a[0].len()).map(|j| a.iter().map(|row| row[j]).collect()).collect()
}

pub fn fro_sq(a: &Dense) -> f64 {
    a.iter().flatten().map(|v| v * v).sum()
}

/// `‖A + XXᵀ‖_F²` by forming the sum.
pub fn brute_objective(a: &Dense, x: &IterateBlock) -> f64 {
    let xr = block_to_rows(x);
    let xxt = matmul(&xr, &transpose(&xr));
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = a[i][j] + xxt[i][j];
            s += v * v;
        }
    }
    s
}

/// Cyclic Jacobi. Returns ascending eigenvalues and the matching
/// eigenvectors as columns of `v` (`v[i][k]` is entry `i` of vector `k`).
pub fn jacobi_eig(a: &Dense) -> (Vec<f64>, Dense) {
    let n = a.len();
    let mut m = a.clone();
    let mut v: Dense = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum();
        if off < 1e-30 * (1.0 + fro_sq(&m)) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q] == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[k][p], v[k][q]);
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[i][i].total_cmp(&m[j][j]));
    let vals = order.iter().map(|&k| m[k][k]).collect();
    let vecs = (0..n).map(|i| order.iter().map(|&k| v[i][k]).collect()).collect();
    (vals, vecs)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
