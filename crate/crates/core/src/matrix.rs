use crate::error::{LccError, Result};
use crate::numeric::pairwise_sum;
use crate::shift::pow2;

/// The constant `N x K` matrix `T` of `y = T x`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TargetMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(LccError::InvalidDimension(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(LccError::LengthMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(LccError::NonFiniteEntry {
                row: i / cols,
                col: i % cols,
            });
        }
        if data.iter().all(|&v| v == 0.0) {
            return Err(LccError::ZeroMatrix);
        }
        Ok(TargetMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let k = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != k) {
            return Err(LccError::LengthMismatch {
                expected: k,
                got: bad.len(),
            });
        }
        Self::new(n, k, rows.concat())
    }

    pub fn identity(k: usize) -> Result<Self> {
        let mut data = vec![0.0; k * k];
        for i in 0..k {
            data[i * k + i] = 1.0;
        }
        Self::new(k, k, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, n: usize, k: usize) -> f64 {
        self.data[n * self.cols + k]
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.data[n * self.cols..(n + 1) * self.cols]
    }

    pub fn col(&self, k: usize) -> Vec<f64> {
        (0..self.rows).map(|n| self.get(n, k)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row_norms_sq(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|n| self.row(n).iter().map(|v| v * v).sum())
            .collect()
    }

    /// `||T||_F^2`, accumulated pairwise over row norms.
    pub fn frobenius_sq(&self) -> f64 {
        pairwise_sum(&self.row_norms_sq())
    }

    /// Every entry multiplied by `2^m` (exact).
    pub fn scaled_pow2(&self, m: i32) -> Result<Self> {
        let s = pow2(m);
        Self::new(self.rows, self.cols, self.data.iter().map(|v| v * s).collect())
    }

    /// Columns `start..start + width` as their own matrix, or `None` when
    /// that block is identically zero.
    pub fn column_block(&self, start: usize, width: usize) -> Option<Self> {
        let end = (start + width).min(self.cols);
        let w = end - start;
        let mut data = Vec::with_capacity(self.rows * w);
        for n in 0..self.rows {
            data.extend_from_slice(&self.row(n)[start..end]);
        }
        Self::new(self.rows, w, data).ok()
    }

    /// Direct `T x`.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(LccError::LengthMismatch {
                expected: self.cols,
                got: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|n| self.row(n).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_input() {
        assert!(matches!(
            TargetMatrix::new(0, 3, vec![]),
            Err(LccError::InvalidDimension(_))
        ));
        assert_eq!(
            TargetMatrix::new(1, 2, vec![0.0, 0.0]),
            Err(LccError::ZeroMatrix)
        );
        assert_eq!(
            TargetMatrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(LccError::NonFiniteEntry { row: 0, col: 1 })
        );
        assert!(TargetMatrix::from_rows(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn accessors() {
        let t = TargetMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(t.row(1), &[3.0, 4.0]);
        assert_eq!(t.col(0), vec![1.0, 3.0]);
        assert_eq!(t.frobenius_sq(), 30.0);
        assert_eq!(t.mul_vec(&[1.0, 1.0]).unwrap(), vec![3.0, 7.0]);
    }

    #[test]
    fn column_blocks() {
        let t = TargetMatrix::from_rows(&[vec![1.0, 0.0, 2.0], vec![3.0, 0.0, 4.0]]).unwrap();
        assert_eq!(t.column_block(0, 1).unwrap().col(0), vec![1.0, 3.0]);
        assert!(t.column_block(1, 1).is_none());
        let last = t.column_block(2, 2).unwrap();
        assert_eq!(last.cols(), 1);
    }
}
