//! Shared fixtures and independent numerical oracles for integration
//! tests. The eigenvalue routines here deliberately avoid the library's
//! own power-iteration/Jacobi code paths: symmetric extremal eigenvalues
//! come from inertia counting with an LDL^T factorisation plus bisection,
//! and small spectral radii come from characteristic-polynomial roots.

#![allow(dead_code)]

use netsir_core::linalg::Matrix;
use netsir_core::model::{EpidemicNetwork, EpidemicState};

/// Five-city benchmark network: symmetric irreducible infection matrix,
/// static rates, h = 1.
pub fn five_city_beta_rows() -> Vec<Vec<f64>> {
    vec![
        vec![0.08, 0.15, 0.24, 0.00, 0.06],
        vec![0.15, 0.12, 0.13, 0.00, 0.00],
        vec![0.24, 0.13, 0.25, 0.05, 0.04],
        vec![0.00, 0.00, 0.05, 0.11, 0.15],
        vec![0.06, 0.00, 0.04, 0.15, 0.09],
    ]
}

pub fn five_city_gamma() -> Vec<f64> {
    vec![0.075, 0.115, 0.085, 0.125, 0.1]
}

pub fn five_city_populations() -> Vec<u64> {
    vec![500_000, 160_000, 900_000, 350_000, 300_000]
}

pub fn five_city_network() -> EpidemicNetwork {
    EpidemicNetwork::constant(
        five_city_populations(),
        Matrix::from_rows(&five_city_beta_rows()).unwrap(),
        five_city_gamma(),
        1.0,
    )
    .unwrap()
}

pub fn five_city_initial() -> EpidemicState {
    EpidemicState::new(
        vec![0.99, 1.0, 0.98, 1.0, 1.0],
        vec![0.01, 0.0, 0.02, 0.0, 0.0],
        vec![0.0; 5],
    )
    .unwrap()
}

/// Number of eigenvalues of symmetric `a` strictly below `t`, by Sylvester
/// inertia of the LDL^T factorisation of `a - t I`.
fn eigenvalues_below(a: &Matrix, t: f64) -> usize {
    let n = a.rows();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            m[i][j] = 0.5 * (a.get(i, j) + a.get(j, i)) - if i == j { t } else { 0.0 };
        }
    }
    let mut negatives = 0;
    let tiny = 1e-300;
    for k in 0..n {
        let mut pivot = m[k][k];
        if pivot == 0.0 {
            pivot = tiny;
        }
        if pivot < 0.0 {
            negatives += 1;
        }
        for i in (k + 1)..n {
            let factor = m[i][k] / pivot;
            for j in k..n {
                m[i][j] -= factor * m[k][j];
            }
        }
    }
    negatives
}

/// Extremal eigenvalues of a symmetric matrix by inertia bisection.
pub fn oracle_symmetric_extremes(a: &Matrix) -> (f64, f64) {
    let n = a.rows();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| a.get(i, j).abs()).sum();
        lo = lo.min(a.get(i, i) - off);
        hi = hi.max(a.get(i, i) + off);
    }
    lo -= 1.0;
    hi += 1.0;

    let bisect = |target_below: usize| {
        let mut a_lo = lo;
        let mut a_hi = hi;
        for _ in 0..200 {
            let mid = 0.5 * (a_lo + a_hi);
            if eigenvalues_below(a, mid) <= target_below {
                a_lo = mid;
            } else {
                a_hi = mid;
            }
        }
        0.5 * (a_lo + a_hi)
    };
    // lambda_min: largest t with zero eigenvalues below it
    let min = bisect(0);
    // lambda_max: largest t with at most n-1 eigenvalues below it
    let max = bisect(n - 1);
    (min, max)
}

/// Spectral radius of a symmetric matrix via the inertia oracle.
pub fn oracle_symmetric_spectral_radius(a: &Matrix) -> f64 {
    let (min, max) = oracle_symmetric_extremes(a);
    min.abs().max(max.abs())
}

/// Spectral radius of an arbitrary 2x2 or 3x3 matrix from the roots of its
/// characteristic polynomial.
pub fn oracle_small_spectral_radius(a: &Matrix) -> f64 {
    match a.rows() {
        1 => a.get(0, 0).abs(),
        2 => {
            let tr = a.get(0, 0) + a.get(1, 1);
            let det = a.get(0, 0) * a.get(1, 1) - a.get(0, 1) * a.get(1, 0);
            let disc = tr * tr - 4.0 * det;
            if disc >= 0.0 {
                let s = disc.sqrt();
                (0.5 * (tr + s)).abs().max((0.5 * (tr - s)).abs())
            } else {
                det.abs().sqrt()
            }
        }
        3 => {
            // lambda^3 - c2 lambda^2 + c1 lambda - c0
            let c2 = a.get(0, 0) + a.get(1, 1) + a.get(2, 2);
            let minor = |i: usize, j: usize, k: usize, l: usize| {
                a.get(i, i) * a.get(j, j) - a.get(k, l) * a.get(l, k)
            };
            let c1 = minor(0, 1, 0, 1) + minor(0, 2, 0, 2) + minor(1, 2, 1, 2);
            let c0 = a.get(0, 0) * (a.get(1, 1) * a.get(2, 2) - a.get(1, 2) * a.get(2, 1))
                - a.get(0, 1) * (a.get(1, 0) * a.get(2, 2) - a.get(1, 2) * a.get(2, 0))
                + a.get(0, 2) * (a.get(1, 0) * a.get(2, 1) - a.get(1, 1) * a.get(2, 0));
            let poly = |x: f64| ((x - c2) * x + c1) * x - c0;
            // a real root always exists; bracket it by the coefficient bound
            let bound = 1.0 + c2.abs().max(c1.abs()).max(c0.abs());
            let (mut lo, mut hi) = (-bound, bound);
            debug_assert!(poly(lo) <= 0.0 && poly(hi) >= 0.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if poly(mid) <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let r = 0.5 * (lo + hi);
            // deflate: lambda^2 + b lambda + c with b = r - c2, c = c1 + r*b
            let b = r - c2;
            let c = c1 + r * b;
            let disc = b * b - 4.0 * c;
            let others = if disc >= 0.0 {
                let s = disc.sqrt();
                (0.5 * (-b + s)).abs().max((0.5 * (-b - s)).abs())
            } else {
                c.abs().sqrt()
            };
            r.abs().max(others)
        }
        n => panic!("oracle_small_spectral_radius supports n <= 3, got {n}"),
    }
}
