use std::fmt;

use rand::seq::index::sample;
use rand::Rng;

use super::{check_leading_gaps, TheoryError};
use crate::linalg::{IterateBlock, Spectrum};

/// A fixed point `U_q √(−Λ_q) P S`: slot `k` takes eigenvector
/// `selection[k]` (zero-based) scaled by `signs[k]`, or is a zero column
/// when the selection is `None`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FixedPointSpec {
    pub selection: Vec<Option<usize>>,
    /// `+1` or `-1`; ignored for zero columns (kept at `+1`).
    pub signs: Vec<i8>,
}

impl FixedPointSpec {
    pub fn stable(p: usize, q: usize) -> Self {
        Self {
            selection: (0..p).map(|i| (i < q).then_some(i)).collect(),
            signs: vec![1; p],
        }
    }

    pub fn p(&self) -> usize {
        self.selection.len()
    }

    pub fn validate(&self, q: usize) -> Result<(), TheoryError> {
        if self.selection.is_empty() || self.selection.len() != self.signs.len() {
            return Err(TheoryError::InvalidSpec(
                "selection and signs must be nonempty and equally long".into(),
            ));
        }
        let mut seen = vec![false; q];
        for (k, (&sel, &sign)) in self.selection.iter().zip(&self.signs).enumerate() {
            if sign != 1 && sign != -1 {
                return Err(TheoryError::InvalidSpec(format!("slot {k}: sign {sign}")));
            }
            if let Some(j) = sel {
                if j >= q {
                    return Err(TheoryError::InvalidSpec(format!(
                        "slot {k}: eigenindex {j} is not among the {q} negative ones"
                    )));
                }
                if std::mem::replace(&mut seen[j], true) {
                    return Err(TheoryError::InvalidSpec(format!(
                        "eigenindex {j} selected twice"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Identity selection on the first `min(p, q)` slots, zero beyond `q`.
    pub fn is_stable(&self, q: usize) -> bool {
        self.selection
            .iter()
            .enumerate()
            .all(|(i, &s)| s == (i < q).then_some(i))
    }
}

impl fmt::Display for FixedPointSpec {
    /// One-based eigenindices with signs, `0` for zero columns: `(+1, -3, 0)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, (sel, sign)) in self.selection.iter().zip(&self.signs).enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            match sel {
                Some(j) => write!(f, "{}{}", if *sign < 0 { '-' } else { '+' }, j + 1)?,
                None => write!(f, "0")?,
            }
        }
        write!(f, ")")
    }
}

/// Builds the fixed point described by `spec`.
pub fn construct_fixed_point(
    spec: &FixedPointSpec,
    spectrum: &Spectrum,
) -> Result<IterateBlock, TheoryError> {
    let n = spectrum.n();
    for &j in spec.selection.iter().flatten() {
        if j < n && spectrum.eigenvalue(j) >= 0.0 {
            return Err(TheoryError::NonNegativeEigenvalue {
                index: j,
                value: spectrum.eigenvalue(j),
            });
        }
    }
    spec.validate(spectrum.q())?;
    let mut data = vec![0.0; n * spec.p()];
    for (k, (sel, &sign)) in spec.selection.iter().zip(&spec.signs).enumerate() {
        if let Some(j) = *sel {
            let scale = f64::from(sign) * (-spectrum.eigenvalue(j)).sqrt();
            for (d, u) in data[k * n..(k + 1) * n].iter_mut().zip(spectrum.eigenvector(j)) {
                *d = scale * u;
            }
        }
    }
    Ok(IterateBlock::from_col_major(n, spec.p(), data)?)
}

/// Every valid spec for `p` slots and `q` negative eigenvalues, in a fixed
/// order. Zero columns carry sign `+1` only.
pub fn enumerate_specs(p: usize, q: usize) -> Vec<FixedPointSpec> {
    fn rec(
        slot: usize,
        q: usize,
        used: &mut Vec<bool>,
        cur: &mut FixedPointSpec,
        out: &mut Vec<FixedPointSpec>,
    ) {
        if slot == cur.selection.len() {
            out.push(cur.clone());
            return;
        }
        cur.selection[slot] = None;
        cur.signs[slot] = 1;
        rec(slot + 1, q, used, cur, out);
        for j in 0..q {
            if used[j] {
                continue;
            }
            used[j] = true;
            cur.selection[slot] = Some(j);
            for sign in [1, -1] {
                cur.signs[slot] = sign;
                rec(slot + 1, q, used, cur, out);
            }
            used[j] = false;
        }
        cur.selection[slot] = None;
        cur.signs[slot] = 1;
    }
    let mut out = Vec::with_capacity(spec_count(p, q) as usize);
    let mut cur = FixedPointSpec {
        selection: vec![None; p],
        signs: vec![1; p],
    };
    rec(0, q, &mut vec![false; q], &mut cur, &mut out);
    out
}

/// `Σ_m C(p,m) · q!/(q−m)! · 2^m`, the number of valid specs.
pub fn spec_count(p: usize, q: usize) -> u128 {
    (0..=p.min(q)).map(|m| count_with_nonzero(p, q, m)).sum()
}

fn count_with_nonzero(p: usize, q: usize, m: usize) -> u128 {
    let binom = (0..m).fold(1u128, |acc, k| acc * (p - k) as u128 / (k + 1) as u128);
    let falling = (0..m).fold(1u128, |acc, k| acc * (q - k) as u128);
    binom * falling << m
}

/// Uniform sample among the unstable specs (rejection of the stable ones).
pub fn sample_unstable_spec<R: Rng>(p: usize, q: usize, rng: &mut R) -> Option<FixedPointSpec> {
    // With q = 0 the all-zero block is the only spec, and it is stable.
    if q == 0 || p == 0 {
        return None;
    }
    let weights: Vec<f64> = (0..=p.min(q))
        .map(|m| count_with_nonzero(p, q, m) as f64)
        .collect();
    let total: f64 = weights.iter().sum();
    loop {
        let mut r = rng.gen::<f64>() * total;
        let mut m = weights.len() - 1;
        for (k, w) in weights.iter().enumerate() {
            if r < *w {
                m = k;
                break;
            }
            r -= w;
        }
        let slots = sample(rng, p, m).into_vec();
        let eig = sample(rng, q, m).into_vec();
        let mut spec = FixedPointSpec {
            selection: vec![None; p],
            signs: vec![1; p],
        };
        let mut slots_sorted = slots;
        slots_sorted.sort_unstable();
        for (slot, j) in slots_sorted.into_iter().zip(eig) {
            spec.selection[slot] = Some(j);
            spec.signs[slot] = if rng.gen::<bool>() { 1 } else { -1 };
        }
        if !spec.is_stable(q) {
            return Some(spec);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FixedPointClass {
    Stable,
    Unstable,
    NotFixed,
}

/// Matches each column against `0` and `±√(−λ_j)u_j` (`j < q`) within the
/// absolute distance `tol`, then classifies the matched spec.
///
/// Refuses degenerate spectra (a gap below the threshold among the first
/// `p + 1` eigenvalues).
pub fn classify_fixed_point(
    x: &IterateBlock,
    spectrum: &Spectrum,
    tol: f64,
) -> Result<FixedPointClass, TheoryError> {
    check_leading_gaps(spectrum, x.p())?;
    let q = spectrum.q();
    let mut spec = FixedPointSpec {
        selection: vec![None; x.p()],
        signs: vec![1; x.p()],
    };
    for (k, col) in x.columns().enumerate() {
        if x.col_norms()[k] <= tol {
            continue;
        }
        let mut best: Option<(usize, i8, f64)> = None;
        for j in 0..q {
            let scale = (-spectrum.eigenvalue(j)).sqrt();
            let c = spectrum.coordinate(j, col);
            let sign: i8 = if c < 0.0 { -1 } else { 1 };
            let d = spectrum.distance_to_multiple(j, f64::from(sign) * scale, col);
            if best.map_or(true, |(_, _, bd)| d < bd) {
                best = Some((j, sign, d));
            }
        }
        match best {
            Some((j, sign, d)) if d <= tol => {
                spec.selection[k] = Some(j);
                spec.signs[k] = sign;
            }
            _ => return Ok(FixedPointClass::NotFixed),
        }
    }
    if spec.validate(q).is_err() {
        return Ok(FixedPointClass::NotFixed);
    }
    Ok(if spec.is_stable(q) {
        FixedPointClass::Stable
    } else {
        FixedPointClass::Unstable
    })
}
