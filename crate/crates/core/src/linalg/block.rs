use super::{norm2, LinalgError};

/// Tall `n x p` block of iterate columns, column-major, with cached
/// column norms.
///
/// All mutation goes through methods that refresh the cached norms, so
/// `col_norms()[j]` always matches the stored column.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateBlock {
    n: usize,
    p: usize,
    data: Vec<f64>,
    col_norms: Vec<f64>,
}

impl IterateBlock {
    pub fn zeros(n: usize, p: usize) -> Result<Self, LinalgError> {
        Self::from_col_major(n, p, vec![0.0; n * p])
    }

    pub fn from_col_major(n: usize, p: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if p == 0 {
            return Err(LinalgError::InvalidBlock("p must be at least 1".into()));
        }
        if n < p {
            return Err(LinalgError::InvalidBlock(format!("n = {n} < p = {p}")));
        }
        if data.len() != n * p {
            return Err(LinalgError::DimensionMismatch {
                expected: n * p,
                found: data.len(),
            });
        }
        let mut b = Self {
            n,
            p,
            data,
            col_norms: vec![0.0; p],
        };
        b.refresh_norms();
        Ok(b)
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * columns.len());
        for c in columns {
            if c.len() != n {
                return Err(LinalgError::DimensionMismatch {
                    expected: n,
                    found: c.len(),
                });
            }
            data.extend_from_slice(c);
        }
        Self::from_col_major(n, columns.len(), data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n)
    }

    pub fn col_norms(&self) -> &[f64] {
        &self.col_norms
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    /// First `k` columns as a new block.
    pub fn prefix(&self, k: usize) -> Result<Self, LinalgError> {
        if k == 0 || k > self.p {
            return Err(LinalgError::InvalidBlock(format!(
                "prefix length {k} outside 1..={}",
                self.p
            )));
        }
        Self::from_col_major(self.n, k, self.data[..k * self.n].to_vec())
    }

    pub fn set_col(&mut self, j: usize, values: &[f64]) -> Result<(), LinalgError> {
        if values.len() != self.n {
            return Err(LinalgError::DimensionMismatch {
                expected: self.n,
                found: values.len(),
            });
        }
        self.data[j * self.n..(j + 1) * self.n].copy_from_slice(values);
        self.col_norms[j] = norm2(values);
        Ok(())
    }

    /// Applies `f` to the raw column-major storage, then refreshes the norms.
    pub fn modify<F: FnOnce(&mut [f64])>(&mut self, f: F) {
        f(&mut self.data);
        self.refresh_norms();
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Storage and norm cache for kernels that refresh norms themselves.
    pub(crate) fn parts_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.data, &mut self.col_norms)
    }

    fn refresh_norms(&mut self) {
        for (j, c) in self.data.chunks_exact(self.n).enumerate() {
            self.col_norms[j] = norm2(c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_wide_blocks() {
        assert!(IterateBlock::zeros(3, 0).is_err());
        assert!(IterateBlock::zeros(2, 3).is_err());
    }

    #[test]
    fn norms_follow_mutation() {
        let mut b = IterateBlock::from_columns(&[vec![3.0, 4.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(b.col_norms(), &[5.0, 1.0]);
        b.set_col(1, &[0.0, 2.0]).unwrap();
        assert_eq!(b.col_norms()[1], 2.0);
        b.modify(|d| d.iter_mut().for_each(|v| *v *= 2.0));
        assert_eq!(b.col_norms(), &[10.0, 4.0]);
    }
}
