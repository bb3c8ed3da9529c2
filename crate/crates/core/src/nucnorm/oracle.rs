//! One-sided (Hestenes) Jacobi SVD, kept apart from the Gram-matrix route so
//! the two can check each other. Only meant for small matrices in tests.

use alloc::vec::Vec;

use super::EmbeddingMatrix;
use crate::error::{Error, Result};

pub const ORACLE_MAX_ENTRIES: usize = 10_000;
const ORTHOGONALITY_TOLERANCE: f64 = 1e-12;
const MAX_SWEEPS: usize = 200;

/// Singular values in non-increasing order.
pub fn singular_values_oracle(matrix: &EmbeddingMatrix) -> Result<Vec<f64>> {
    let (rows, cols) = (matrix.rows(), matrix.cols());
    if rows * cols > ORACLE_MAX_ENTRIES {
        return Err(Error::OracleTooLarge {
            rows,
            cols,
            limit: ORACLE_MAX_ENTRIES,
        });
    }
    // Columns are orthogonalized, so make them the shorter side.
    let m = if cols > rows {
        matrix.transpose()
    } else {
        matrix.clone()
    };
    let (len, n) = (m.rows(), m.cols());
    let mut columns: Vec<Vec<f64>> = (0..n)
        .map(|c| (0..len).map(|r| m.get(r, c)).collect())
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                let alpha: f64 = columns[i].iter().map(|x| x * x).sum();
                let beta: f64 = columns[j].iter().map(|x| x * x).sum();
                let gamma: f64 = columns[i].iter().zip(&columns[j]).map(|(x, y)| x * y).sum();
                if alpha == 0.0 || beta == 0.0 || gamma == 0.0 {
                    continue;
                }
                worst = worst.max(gamma.abs() / libm::sqrt(alpha * beta));
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                let (left, right) = columns.split_at_mut(j);
                for (x, y) in left[i].iter_mut().zip(right[0].iter_mut()) {
                    let (xi, yj) = (*x, *y);
                    *x = c * xi - s * yj;
                    *y = s * xi + c * yj;
                }
            }
        }
        if worst < ORTHOGONALITY_TOLERANCE {
            break;
        }
    }

    let mut values: Vec<f64> = columns
        .iter()
        .map(|col| libm::sqrt(col.iter().map(|x| x * x).sum()))
        .collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

pub fn nuclear_norm_oracle(matrix: &EmbeddingMatrix) -> Result<f64> {
    Ok(singular_values_oracle(matrix)?.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn identity_and_permutation() {
        let id = EmbeddingMatrix::new("i", 3, 3, vec![1., 0., 0., 0., 1., 0., 0., 0., 1.]).unwrap();
        assert!((nuclear_norm_oracle(&id).unwrap() - 3.0).abs() < 1e-14);
        let p = EmbeddingMatrix::new("p", 2, 2, vec![0., 1., 1., 0.]).unwrap();
        assert!((nuclear_norm_oracle(&p).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn size_limit() {
        let big = EmbeddingMatrix::new("b", 101, 100, vec![0.5; 10_100]).unwrap();
        assert!(matches!(
            nuclear_norm_oracle(&big),
            Err(Error::OracleTooLarge { .. })
        ));
        let edge = EmbeddingMatrix::new("e", 100, 100, vec![0.0; 10_000]).unwrap();
        assert_eq!(nuclear_norm_oracle(&edge).unwrap(), 0.0);
    }
}
