//! Dense J×J symmetric solves for the structural-parameter block.
//!
//! The fixed effects are never materialized, so the only linear algebra the
//! estimator needs is on the small J×J concentrated Hessian. Matrices are
//! stored row-major in a flat `Vec<f64>`.

use crate::error::{Error, Result};

/// Cholesky factor of a symmetric positive definite matrix.
///
/// Factorization fails with [`Error::Collinear`] when a pivot falls below
/// `rel_pivot_tol` times the largest diagonal entry of the input, which is how
/// rank-deficient centered regressors are detected.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>, // lower triangle, row-major
}

impl Cholesky {
    pub fn new(a: &[f64], n: usize, rel_pivot_tol: f64) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let max_diag = (0..n).map(|i| a[i * n + i].abs()).fold(0.0f64, f64::max);
        let threshold = rel_pivot_tol * max_diag.max(f64::MIN_POSITIVE);
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s <= threshold {
                        return Err(Error::Collinear { col: i, pivot: s });
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(Self { n, l })
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        // forward: L y = b
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.l[i * n + k] * x[k];
            }
            x[i] /= self.l[i * n + i];
        }
        // backward: L' x = y
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] -= self.l[k * n + i] * x[k];
            }
            x[i] /= self.l[i * n + i];
        }
        x
    }

    /// Full inverse `A^{-1}` (row-major).
    pub fn inverse(&self) -> Vec<f64> {
        let n = self.n;
        let mut inv = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.fill(0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        // symmetrize against round-off
        for i in 0..n {
            for j in 0..i {
                let m = 0.5 * (inv[i * n + j] + inv[j * n + i]);
                inv[i * n + j] = m;
                inv[j * n + i] = m;
            }
        }
        inv
    }
}

/// `y = A x` for a row-major `n×n` matrix.
pub fn mat_vec(a: &[f64], n: usize, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let row = &a[i * n..(i + 1) * n];
        y[i] = row.iter().zip(x).map(|(aij, xj)| aij * xj).sum();
    }
    y
}

/// Quadratic form `x' A x`.
pub fn quad_form(a: &[f64], n: usize, x: &[f64]) -> f64 {
    mat_vec(a, n, x).iter().zip(x).map(|(ax, xi)| ax * xi).sum()
}

pub fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}
