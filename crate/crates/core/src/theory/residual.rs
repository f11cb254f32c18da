use crate::linalg::{dot, IterateBlock, Spectrum};

/// `‖E‖_F` for `E = Σ_{k<m} (x_k x_kᵀ + λ_k u_k u_kᵀ)`, the deviation of the
/// first `m = prefix.p()` columns from their converged outer-product sum.
///
/// With `Y` the signed stable prefix nearest `X` and `Δ = X − Y`,
/// `E = ΔYᵀ + YΔᵀ + ΔΔᵀ = W M Wᵀ` for `W = [Δ Y]`, `M = [[I, I], [I, 0]]`,
/// so `‖E‖_F² = tr(M G M G)` with `G = WᵀW`. Every term is already small,
/// which keeps the result accurate near convergence. Falls back to
/// [`residual_e_norm_expansion`] if a prefix eigenvalue is not negative.
pub fn residual_e_norm(prefix: &IterateBlock, spectrum: &Spectrum) -> f64 {
    residual_e_norms(prefix, spectrum)[prefix.p()]
}

/// `‖E‖_F` for every prefix length: entry `m` is [`residual_e_norm`] of the
/// first `m` columns, so entry 0 is 0. One Gram matrix serves all lengths.
pub fn residual_e_norms(x: &IterateBlock, spectrum: &Spectrum) -> Vec<f64> {
    let p = x.p();
    let mut out = vec![0.0; p + 1];
    let negative = (0..p).take_while(|&k| spectrum.eigenvalue(k) < 0.0).count();
    let mut w: Vec<Vec<f64>> = Vec::with_capacity(2 * negative);
    let mut ys: Vec<Vec<f64>> = Vec::with_capacity(negative);
    for (k, col) in x.columns().enumerate().take(negative) {
        let scale = (-spectrum.eigenvalue(k)).sqrt();
        let c = spectrum.coordinate(k, col);
        let s = if c < 0.0 { -scale } else { scale };
        let y: Vec<f64> = spectrum.eigenvector(k).iter().map(|u| s * u).collect();
        w.push(col.iter().zip(&y).map(|(x, y)| x - y).collect());
        ys.push(y);
    }
    w.extend(ys);
    let d = 2 * negative;
    let mut g = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let v = dot(&w[i], &w[j]);
            g[i + j * d] = v;
            g[j + i * d] = v;
        }
    }
    // Restricted to the first m columns, W = [Δ_m Y_m] and B = M G has top
    // block rows G_ΔΔ + G_YΔ (resp. G_ΔY + G_YY) and bottom rows G_Δ·.
    let gi = |i: usize, j: usize| g[i + j * d];
    for m in 1..=negative {
        let idx: Vec<usize> = (0..m).chain(negative..negative + m).collect();
        let dm = 2 * m;
        let mut b = vec![0.0; dm * dm];
        for (jj, &j) in idx.iter().enumerate() {
            for ii in 0..m {
                b[ii + jj * dm] = gi(idx[ii], j) + gi(idx[ii + m], j);
                b[ii + m + jj * dm] = gi(idx[ii], j);
            }
        }
        let mut tr = 0.0;
        for i in 0..dm {
            for j in 0..dm {
                tr += b[i + j * dm] * b[j + i * dm];
            }
        }
        out[m] = tr.max(0.0).sqrt();
    }
    for m in negative + 1..=p {
        out[m] = residual_e_norm_expansion(&x.prefix(m).expect("m <= p"), spectrum);
    }
    out
}

/// `‖XᵀX‖_F² + Σλ_k² + 2 Σ_{k,l} λ_l (u_lᵀx_k)²`, the direct expansion.
/// Loses relative accuracy as `E → 0`.
pub fn residual_e_norm_expansion(prefix: &IterateBlock, spectrum: &Spectrum) -> f64 {
    let m = prefix.p();
    let mut gram = 0.0;
    for i in 0..m {
        for j in 0..m {
            let v = dot(prefix.col(i), prefix.col(j));
            gram += v * v;
        }
    }
    let lam: f64 = (0..m).map(|k| spectrum.eigenvalue(k).powi(2)).sum();
    let mut cross = 0.0;
    for col in prefix.columns() {
        for l in 0..m {
            let c = spectrum.coordinate(l, col);
            cross += spectrum.eigenvalue(l) * c * c;
        }
    }
    (gram + lam + 2.0 * cross).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_prefix_cancels() {
        let s = Spectrum::for_diagonal(&[-4.0, -2.0, -1.0, 3.0]);
        let x = IterateBlock::from_columns(&[
            vec![-2.0, 0.0, 0.0, 0.0],
            vec![0.0, 2f64.sqrt(), 0.0, 0.0],
        ])
        .unwrap();
        assert!(residual_e_norm(&x, &s) < 1e-12);
    }

    #[test]
    fn zero_prefix_is_eigenvalue_norm() {
        let s = Spectrum::for_diagonal(&[-4.0, -2.0, -1.0, 3.0]);
        let z = IterateBlock::zeros(4, 2).unwrap();
        assert!((residual_e_norm(&z, &s) - 20f64.sqrt()).abs() < 1e-14);
        assert!((residual_e_norm_expansion(&z, &s) - 20f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn all_prefixes_match_single_calls() {
        let s = Spectrum::for_diagonal(&[-4.0, -2.0, -1.0, 3.0]);
        let x = IterateBlock::from_columns(&[
            vec![1.9, 0.1, -0.2, 0.05],
            vec![0.3, -1.2, 0.4, 0.0],
            vec![0.0, 0.2, 0.9, -0.1],
            vec![0.1, 0.0, 0.0, 0.3],
        ])
        .unwrap();
        let all = residual_e_norms(&x, &s);
        assert_eq!(all[0], 0.0);
        for m in 1..=4 {
            let pre = x.prefix(m).unwrap();
            let e = residual_e_norm_expansion(&pre, &s);
            assert!((all[m] - e).abs() <= 1e-12 * (1.0 + e), "m = {m}");
        }
    }
}
