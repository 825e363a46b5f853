//! Small dense matrices and the handful of eigenvalue routines the rest of
//! the crate needs. Everything here targets desk-scale problems (a few dozen
//! rows at most), so the implementations favour determinism and clarity over
//! blocked performance tricks.

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
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

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let nr = rows.len();
        let nc = rows.first().map_or(0, Vec::len);
        if nr == 0 || nc == 0 {
            return Err(Error::Invalid("matrix must be non-empty".into()));
        }
        let mut data = Vec::with_capacity(nr * nc);
        for row in rows {
            if row.len() != nc {
                return Err(Error::Dimension {
                    context: "matrix row",
                    expected: nc,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: nr,
            cols: nc,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.row(i).iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> f64 {
        (0..self.rows).map(|i| self.get(i, j)).sum()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension {
                context: "matrix-vector product",
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn mul_mat(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension {
                context: "matrix product",
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * out.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// max |a_ij - b_ij|
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// (A + A^T) / 2
    pub fn symmetric_part(&self) -> Self {
        let mut s = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = 0.5 * (self.get(i, j) + self.get(j, i));
                s.set(i, j, v);
            }
        }
        s
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

const POWER_ITERATION_CAP: usize = 50_000;

/// Spectral radius of a nonnegative square matrix by power iteration.
///
/// Starts from the deterministic strictly-positive vector (1/sqrt(n), ...)
/// and stops once the eigen-residual ||A x - lambda x|| drops below
/// `tol * max(lambda, 1)`. Matrices whose dominant eigenvalues form a
/// complex or sign-alternating pair never settle; those surface as
/// [`Error::NoConvergence`] together with the last iterate.
pub fn spectral_radius(a: &Matrix, tol: f64) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Dimension {
            context: "spectral_radius",
            expected: a.rows,
            found: a.cols,
        });
    }
    if !(tol > 0.0) {
        return Err(Error::Invalid("spectral_radius: tol must be > 0".into()));
    }
    if a.data.iter().any(|&v| v < 0.0) {
        return Err(Error::Invalid(
            "spectral_radius: matrix must be entrywise nonnegative".into(),
        ));
    }
    let n = a.rows;
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut estimate = 0.0;
    let mut residual = f64::INFINITY;

    for it in 0..POWER_ITERATION_CAP {
        let y = a.mul_vec(&x)?;
        let ny = norm2(&y);
        if ny == 0.0 {
            // A annihilates a strictly positive vector on this cycle; the
            // dominant eigenvalue reachable from it is 0.
            return Ok(0.0);
        }
        // Rayleigh quotient with ||x|| = 1.
        let lambda: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        residual = norm2(
            &y.iter()
                .zip(&x)
                .map(|(yi, xi)| yi - lambda * xi)
                .collect::<Vec<_>>(),
        );
        estimate = lambda;
        if it > 0 && residual <= tol * lambda.abs().max(1.0) {
            return Ok(lambda.abs());
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
    }
    Err(Error::NoConvergence {
        iterations: POWER_ITERATION_CAP,
        estimate,
        residual,
    })
}

/// Dominant right eigenvector estimate for a nonnegative square matrix.
///
/// Best effort: runs the same iteration as [`spectral_radius`] but always
/// returns the last iterate, normalised to max entry 1 and floored at
/// `floor` so callers get a strictly positive vector even for reducible
/// matrices.
pub fn perron_vector_estimate(a: &Matrix, iterations: usize, floor: f64) -> Vec<f64> {
    assert!(a.is_square(), "perron_vector_estimate needs a square matrix");
    let n = a.rows;
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..iterations {
        let y = a.mul_vec(&x).expect("square matrix");
        let ny = norm2(&y);
        if ny == 0.0 {
            break;
        }
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
    }
    let max = x.iter().fold(0.0_f64, |m, v| m.max(*v)).max(floor);
    x.iter().map(|v| (v / max).max(floor)).collect()
}

const JACOBI_SWEEP_CAP: usize = 64;

/// All eigenvalues of a symmetric matrix, ascending, via cyclic Jacobi.
pub fn symmetric_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::Dimension {
            context: "symmetric_eigenvalues",
            expected: a.rows,
            found: a.cols,
        });
    }
    if a.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid(
            "symmetric_eigenvalues: matrix has non-finite entries".into(),
        ));
    }
    if !a.is_symmetric(1e-9) {
        return Err(Error::Invalid(
            "symmetric_eigenvalues: matrix is not symmetric".into(),
        ));
    }
    let n = a.rows;
    let mut m = a.symmetric_part();
    let scale = m.data.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 || n == 1 {
        let mut d: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
        d.sort_by(|x, y| x.partial_cmp(y).unwrap());
        return Ok(d);
    }
    let target = 1e-15 * scale;

    for _ in 0..JACOBI_SWEEP_CAP {
        let mut off = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(m.get(i, j).abs());
            }
        }
        if off <= target {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq.abs() <= target * 1e-2 {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m.get(k, p);
                    let akq = m.get(k, q);
                    m.set(k, p, c * akp - s * akq);
                    m.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = m.get(p, k);
                    let aqk = m.get(q, k);
                    m.set(p, k, c * apk - s * aqk);
                    m.set(q, k, s * apk + c * aqk);
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| m.get(i, i)).collect();
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(d)
}

/// (lambda_min, lambda_max) of a symmetric matrix.
pub fn symmetric_eigen_bounds(a: &Matrix) -> Result<(f64, f64)> {
    let eig = symmetric_eigenvalues(a)?;
    Ok((eig[0], *eig.last().unwrap()))
}
