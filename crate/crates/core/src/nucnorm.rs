//! Nuclear norm of token-embedding matrices.
//!
//! The singular values come from the eigenvalues of the smaller Gram matrix
//! (`EᵀE` when the matrix is tall, `EEᵀ` when it is wide), which a cyclic
//! Jacobi sweep diagonalizes. The nuclear norm `tr(√(EᵀE))` is their sum.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[cfg(feature = "oracle")]
pub mod oracle;

/// Off-diagonal Frobenius mass, relative to the whole matrix, at which a
/// Jacobi sweep stops.
pub const JACOBI_TOLERANCE: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Token-by-hidden representation of one sample, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    sample_id: String,
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl EmbeddingMatrix {
    pub fn new(
        sample_id: impl Into<String>,
        rows: usize,
        cols: usize,
        values: Vec<f64>,
    ) -> Result<Self> {
        let sample_id = sample_id.into();
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix {
                sample_id,
                rows,
                cols,
            });
        }
        if values.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                sample_id,
                expected: rows * cols,
                actual: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                sample_id,
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self {
            sample_id,
            rows,
            cols,
            values,
        })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(sample_id: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let sample_id = sample_id.into();
        let cols = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::ShapeMismatch {
                    sample_id,
                    expected: rows.len() * cols,
                    actual: rows.iter().map(Vec::len).sum(),
                });
            }
            values.extend_from_slice(row);
        }
        Self::new(sample_id, rows.len(), cols, values)
    }

    pub fn sample_id(&self) -> &str {
        &self.sample_id
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    /// Rounds every entry through `f32`, the precision embedding dumps are
    /// stored at. Scoring a quantized matrix gives the same result as scoring
    /// it after a write/read cycle.
    pub fn quantized_f32(&self) -> Self {
        Self {
            sample_id: self.sample_id.clone(),
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|&v| v as f32 as f64).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut values = vec![0.0; self.values.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                values[c * self.rows + r] = self.values[r * self.cols + c];
            }
        }
        Self {
            sample_id: self.sample_id.clone(),
            rows: self.cols,
            cols: self.rows,
            values,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.values.iter().map(|v| v * v).sum())
    }
}

/// Singular values in non-increasing order, `min(rows, cols)` of them.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum(Vec<f64>);

impl SingularSpectrum {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Largest singular value, i.e. the spectral norm.
    pub fn largest(&self) -> f64 {
        self.0.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values above `tol · largest`.
    pub fn rank(&self, tol: f64) -> usize {
        let cutoff = tol * self.largest();
        self.0.iter().filter(|&&s| s > cutoff).count()
    }
}

pub fn singular_values(matrix: &EmbeddingMatrix) -> SingularSpectrum {
    let mut gram = gram_of_smaller_side(matrix);
    let n = if matrix.cols <= matrix.rows {
        matrix.cols
    } else {
        matrix.rows
    };
    jacobi_diagonalize(&mut gram, n);

    let mut values: Vec<f64> = (0..n)
        .map(|i| libm::sqrt(gram[i * n + i].max(0.0)))
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    SingularSpectrum(values)
}

/// Sum of singular values, `tr(√(EᵀE))`.
pub fn nuclear_norm(matrix: &EmbeddingMatrix) -> f64 {
    singular_values(matrix).sum()
}

pub fn spectral_norm(matrix: &EmbeddingMatrix) -> f64 {
    singular_values(matrix).largest()
}

fn gram_of_smaller_side(m: &EmbeddingMatrix) -> Vec<f64> {
    let (rows, cols) = (m.rows, m.cols);
    let a = &m.values;
    if cols <= rows {
        let mut g = vec![0.0; cols * cols];
        for r in 0..rows {
            let row = &a[r * cols..(r + 1) * cols];
            for i in 0..cols {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                for j in i..cols {
                    g[i * cols + j] += ri * row[j];
                }
            }
        }
        mirror_upper(&mut g, cols);
        g
    } else {
        let mut g = vec![0.0; rows * rows];
        for i in 0..rows {
            let ri = &a[i * cols..(i + 1) * cols];
            for j in i..rows {
                let rj = &a[j * cols..(j + 1) * cols];
                g[i * rows + j] = ri.iter().zip(rj).map(|(x, y)| x * y).sum();
            }
        }
        mirror_upper(&mut g, rows);
        g
    }
}

fn mirror_upper(g: &mut [f64], n: usize) {
    for i in 0..n {
        for j in 0..i {
            g[i * n + j] = g[j * n + i];
        }
    }
}

/// Cyclic Jacobi on a dense symmetric `n×n` matrix; eigenvalues are left on
/// the diagonal.
fn jacobi_diagonalize(a: &mut [f64], n: usize) {
    let total: f64 = a.iter().map(|v| v * v).sum();
    if total == 0.0 {
        return;
    }
    let threshold = JACOBI_TOLERANCE * JACOBI_TOLERANCE * total;

    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off <= threshold {
            return;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + libm::hypot(tau, 1.0))
                } else {
                    -1.0 / (-tau + libm::hypot(tau, 1.0))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    log::warn!("jacobi eigensolver hit {JACOBI_MAX_SWEEPS} sweeps without converging");
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> EmbeddingMatrix {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        EmbeddingMatrix::from_rows("m", &rows).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn identity() {
        let e = mat(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert_eq!(singular_values(&e).values(), &[1.0, 1.0, 1.0]);
        assert!(close(nuclear_norm(&e), 3.0));
    }

    #[test]
    fn diagonal_sorted_descending() {
        let e = mat(&[&[3.0, 0.0], &[0.0, 4.0]]);
        let s = singular_values(&e);
        assert!(close(s.values()[0], 4.0) && close(s.values()[1], 3.0));
        assert!(close(nuclear_norm(&e), 7.0));
    }

    #[test]
    fn row_vector_is_euclidean_length() {
        let e = mat(&[&[3.0, -4.0, 12.0]]);
        assert_eq!(singular_values(&e).values().len(), 1);
        assert!(close(nuclear_norm(&e), 13.0));
        assert!(close(nuclear_norm(&e.transpose()), 13.0));
    }

    #[test]
    fn one_by_one() {
        assert!(close(nuclear_norm(&mat(&[&[-2.5]])), 2.5));
    }

    #[test]
    fn rank_deficient_clamps_to_zero() {
        let e = mat(&[&[0.0, 1.0], &[0.0, 1.0]]);
        let s = singular_values(&e);
        assert!(close(s.values()[0], libm::sqrt(2.0)));
        assert!(s.values()[1] >= 0.0 && s.values()[1] < 1e-7);
    }

    #[test]
    fn zero_matrix() {
        let e = EmbeddingMatrix::new("z", 3, 2, vec![0.0; 6]).unwrap();
        assert_eq!(nuclear_norm(&e), 0.0);
    }

    #[test]
    fn permutation_matrix() {
        assert!(close(nuclear_norm(&mat(&[&[0.0, 1.0], &[1.0, 0.0]])), 2.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            EmbeddingMatrix::new("a", 0, 3, vec![]),
            Err(Error::EmptyMatrix { .. })
        ));
        assert!(matches!(
            EmbeddingMatrix::new("a", 2, 2, vec![1.0; 3]),
            Err(Error::ShapeMismatch { .. })
        ));
        assert_eq!(
            EmbeddingMatrix::new("a", 2, 2, vec![1.0, 1.0, f64::NAN, 1.0]),
            Err(Error::NonFinite {
                sample_id: "a".into(),
                row: 1,
                col: 0
            })
        );
        assert!(EmbeddingMatrix::new("a", 1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn wide_and_tall_agree() {
        let e = mat(&[&[1.0, 2.0, 3.0, 4.0], &[-1.0, 0.5, 2.0, 0.0]]);
        let a = nuclear_norm(&e);
        let b = nuclear_norm(&e.transpose());
        assert!(close(a, b));
    }
}
