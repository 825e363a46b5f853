//! Exponential-stability certification for the healthy states.
//!
//! The certificate machinery works with two matrices per schedule piece:
//! the comparison matrix `M = I - h*diag(gamma) + h*B`, whose spectral
//! radius plays the role of a network reproduction number, and the true
//! infected-state transition matrix `M_hat = I + h*(diag(s) B - diag(gamma))`.
//! They satisfy `M_hat = M - h*(I - diag(s)) B` entrywise, so `M` dominates
//! `M_hat` on nonnegative states and a spectral certificate for `M` carries
//! over to the nonlinear dynamics.
//!
//! When every scheduled infection matrix is symmetric and
//! `sup_k rho(M(k)) < 1`, the healthy set is globally exponentially stable.
//! The certificate then carries positive diagonal Lyapunov weights `Q`
//! with `M^T Q M - Q` negative definite, the extremal eigenvalue
//! quantities sigma_1, sigma_2, sigma_3 derived from them, and the decay
//! rate bound `sqrt(1 - sigma_3 / sigma_2)`.
//!
//! The decrement quantity sigma_3 admits two aggregations over time, a
//! max and a min; only the min yields a decay bound that every step of a
//! time-varying schedule obeys. Both are computed and reported, and the
//! headline `rate_bound` uses the min, the one that actually bounds
//! trajectories. They coincide for constant schedules.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    perron_vector_estimate, spectral_radius, symmetric_eigen_bounds, Matrix,
};
use crate::model::{validate_network, EpidemicNetwork};

/// Builds `M = I - h*diag(gamma) + h*B`, entrywise nonnegative under the
/// model assumptions.
pub fn comparison_matrix(beta: &Matrix, gamma: &[f64], h: f64) -> Result<Matrix> {
    let n = gamma.len();
    if beta.rows() != n || beta.cols() != n {
        return Err(Error::Dimension {
            context: "comparison_matrix",
            expected: n,
            found: if beta.rows() != n {
                beta.rows()
            } else {
                beta.cols()
            },
        });
    }
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut v = h * beta.get(i, j);
            if i == j {
                v += 1.0 - h * gamma[i];
            }
            m.set(i, j, v);
        }
    }
    Ok(m)
}

/// Builds `M_hat = I + h*(diag(s) B - diag(gamma))`, the exact transition
/// matrix of the infected coordinates at state `s`.
pub fn infected_transition_matrix(
    beta: &Matrix,
    gamma: &[f64],
    s: &[f64],
    h: f64,
) -> Result<Matrix> {
    let n = gamma.len();
    if s.len() != n {
        return Err(Error::Dimension {
            context: "infected_transition_matrix",
            expected: n,
            found: s.len(),
        });
    }
    if beta.rows() != n || beta.cols() != n {
        return Err(Error::Dimension {
            context: "infected_transition_matrix",
            expected: n,
            found: if beta.rows() != n {
                beta.rows()
            } else {
                beta.cols()
            },
        });
    }
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut v = h * s[i] * beta.get(i, j);
            if i == j {
                v += 1.0 - h * gamma[i];
            }
            m.set(i, j, v);
        }
    }
    Ok(m)
}

/// The comparison and infected-state transition matrices at one step.
#[derive(Debug, Clone)]
pub struct TransitionMatrices {
    pub m: Matrix,
    pub m_hat: Matrix,
    pub k: usize,
}

impl TransitionMatrices {
    pub fn build(beta: &Matrix, gamma: &[f64], s: &[f64], h: f64, k: usize) -> Result<Self> {
        Ok(Self {
            m: comparison_matrix(beta, gamma, h)?,
            m_hat: infected_transition_matrix(beta, gamma, s, h)?,
            k,
        })
    }
}

/// True iff the directed graph with an edge wherever `b[i][j] > 0` is
/// strongly connected. A single node counts as irreducible only with a
/// positive self-weight, matching the matrix convention.
pub fn is_irreducible(b: &Matrix) -> bool {
    if !b.is_square() {
        return false;
    }
    let n = b.rows();
    if n == 1 {
        return b.get(0, 0) > 0.0;
    }
    let reaches_all = |transposed: bool| {
        let mut seen = vec![false; n];
        let mut queue = vec![0usize];
        seen[0] = true;
        while let Some(u) = queue.pop() {
            for v in 0..n {
                let w = if transposed { b.get(v, u) } else { b.get(u, v) };
                if w > 0.0 && !seen[v] {
                    seen[v] = true;
                    queue.push(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    reaches_all(false) && reaches_all(true)
}

/// Candidate Lyapunov weights could not be verified.
#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovNotFound {
    /// Index into the piece sequence where verification failed.
    pub piece: usize,
    /// Smallest eigenvalue of the offending decrement matrix.
    pub margin: f64,
}

impl std::fmt::Display for LyapunovNotFound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "diagonal Lyapunov verification failed at piece {} (eigenvalue margin {:e})",
            self.piece, self.margin
        )
    }
}

const LYAPUNOV_MARGIN: f64 = 1e-10;

/// Diagonal of `Q_p - M_p^T Q_next M_p` minus nothing: the full decrement
/// matrix, symmetric by construction.
fn decrement_matrix(m: &Matrix, q_from: &[f64], q_to: &[f64]) -> Matrix {
    let n = m.rows();
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut v: f64 = (0..n).map(|k| m.get(k, i) * q_to[k] * m.get(k, j)).sum();
            v = -v;
            if i == j {
                v += q_from[i];
            }
            d.set(i, j, v);
        }
    }
    d
}

/// Constructs positive diagonal Lyapunov weights, one per schedule piece,
/// such that the decrement `Q(k) - M(k)^T Q(k+1) M(k)` is positive definite
/// within every piece and across every switch.
///
/// Symmetric pieces take `Q = I`, which is exact whenever `rho(M) < 1`.
/// Nonsymmetric pieces get a best-effort candidate built from the
/// reciprocal of an approximate dominant right eigenvector; all candidates
/// are then verified numerically (smallest eigenvalue of each decrement at
/// least 1e-10) and failure is reported, never assumed away.
pub fn diagonal_lyapunov(pieces: &[Matrix]) -> std::result::Result<Vec<Vec<f64>>, LyapunovNotFound> {
    assert!(!pieces.is_empty(), "diagonal_lyapunov needs at least one piece");
    let q_seq: Vec<Vec<f64>> = pieces
        .iter()
        .map(|m| {
            if m.is_symmetric(1e-12) {
                vec![1.0; m.rows()]
            } else {
                perron_vector_estimate(m, 2_000, 1e-9)
                    .iter()
                    .map(|v| 1.0 / v)
                    .collect()
            }
        })
        .collect();

    verify_lyapunov(pieces, &q_seq)?;
    Ok(q_seq)
}

fn verify_lyapunov(
    pieces: &[Matrix],
    q_seq: &[Vec<f64>],
) -> std::result::Result<(), LyapunovNotFound> {
    for (p, m) in pieces.iter().enumerate() {
        let within = decrement_matrix(m, &q_seq[p], &q_seq[p]);
        let (min_within, _) =
            symmetric_eigen_bounds(&within).expect("decrement matrix is symmetric");
        let mut margin = min_within;
        if p + 1 < pieces.len() {
            let switch = decrement_matrix(m, &q_seq[p], &q_seq[p + 1]);
            let (min_switch, _) =
                symmetric_eigen_bounds(&switch).expect("decrement matrix is symmetric");
            margin = margin.min(min_switch);
        }
        if margin < LYAPUNOV_MARGIN {
            return Err(LyapunovNotFound { piece: p, margin });
        }
    }
    Ok(())
}

/// Extremal eigenvalue quantities of a verified Lyapunov sequence and the
/// decay rates they imply.
#[derive(Debug, Clone, Serialize)]
pub struct DecayBound {
    /// min over pieces of lambda_min(Q)
    pub sigma1: f64,
    /// max over pieces of lambda_max(Q)
    pub sigma2: f64,
    /// max over decrements of lambda_min (the optimistic aggregation)
    pub sigma3_stated: f64,
    /// min over decrements of lambda_min, what the decay proof uses
    pub sigma3_min: f64,
    /// sqrt(1 - sigma3_min / sigma2), valid along every trajectory
    pub rate: f64,
    /// sqrt(1 - sigma3_stated / sigma2), the literal reading
    pub rate_stated: f64,
    /// sqrt(sigma2 / sigma1), the norm overshoot constant
    pub alpha: f64,
}

/// Computes the sigma quantities and decay rate for verified weights.
/// Decrements are evaluated within each piece and across each switch.
pub fn decay_rate_bound(pieces: &[Matrix], q_seq: &[Vec<f64>]) -> Result<DecayBound> {
    if pieces.is_empty() || pieces.len() != q_seq.len() {
        return Err(Error::Dimension {
            context: "decay_rate_bound",
            expected: pieces.len(),
            found: q_seq.len(),
        });
    }
    let sigma1 = q_seq
        .iter()
        .flat_map(|q| q.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let sigma2 = q_seq
        .iter()
        .flat_map(|q| q.iter().copied())
        .fold(f64::NEG_INFINITY, f64::max);

    let mut decrement_mins = Vec::new();
    for (p, m) in pieces.iter().enumerate() {
        let within = decrement_matrix(m, &q_seq[p], &q_seq[p]);
        decrement_mins.push(symmetric_eigen_bounds(&within)?.0);
        if p + 1 < pieces.len() {
            let switch = decrement_matrix(m, &q_seq[p], &q_seq[p + 1]);
            decrement_mins.push(symmetric_eigen_bounds(&switch)?.0);
        }
    }
    let sigma3_stated = decrement_mins.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sigma3_min = decrement_mins.iter().copied().fold(f64::INFINITY, f64::min);
    if sigma3_min <= 0.0 {
        return Err(Error::Invalid(format!(
            "certificate invalid: Lyapunov decrement is not positive definite (sigma3 = {sigma3_min:e})"
        )));
    }
    if sigma2 < sigma3_min {
        return Err(Error::Invalid(format!(
            "certificate invalid: sigma2 = {sigma2} < sigma3 = {sigma3_min}"
        )));
    }
    Ok(DecayBound {
        sigma1,
        sigma2,
        sigma3_stated,
        sigma3_min,
        rate: (1.0 - sigma3_min / sigma2).sqrt(),
        rate_stated: (1.0 - sigma3_stated / sigma2).sqrt(),
        alpha: (sigma2 / sigma1).sqrt(),
    })
}

/// Spectral summary of one constant-parameter stretch of the schedule.
#[derive(Debug, Clone, Serialize)]
pub struct PieceSpectrum {
    pub start: usize,
    pub end: usize,
    pub rho: f64,
    pub symmetric: bool,
}

/// Verdict of the exponential-stability check, plus everything needed to
/// audit it.
#[derive(Debug, Clone, Serialize)]
pub struct GesCertificate {
    pub sup_rho: f64,
    /// sup_rho < 1 and every scheduled infection matrix symmetric.
    pub satisfied: bool,
    pub reasons: Vec<String>,
    pub pieces: Vec<PieceSpectrum>,
    pub q_diagonals: Option<Vec<Vec<f64>>>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub sigma3_stated: Option<f64>,
    pub sigma3_min: Option<f64>,
    /// sqrt(1 - sigma3_min / sigma2)
    pub rate_bound: Option<f64>,
    pub rate_bound_stated: Option<f64>,
    /// sqrt(sigma2 / sigma1)
    pub alpha: Option<f64>,
    pub lyapunov_failure: Option<String>,
}

const RHO_TOL: f64 = 1e-10;

/// Evaluates the stability condition over `[0, horizon]`.
///
/// The spectral radius is computed once per constant-parameter stretch
/// (parameters are piecewise constant, so that is the exact sup). An
/// asymmetric infection matrix makes the certificate unsatisfied with an
/// explicit reason; the symmetry hypothesis is never silently waived.
pub fn certify_ges(network: &EpidemicNetwork, horizon: usize) -> Result<GesCertificate> {
    let report = validate_network(network, horizon)?;
    if !report.ok() {
        return Err(Error::Validation(Box::new(report)));
    }

    let starts = network.parameter_breakpoints(horizon);
    let mut pieces = Vec::new();
    let mut matrices = Vec::new();
    let mut reasons = Vec::new();
    let mut all_symmetric = true;
    let mut sup_rho = 0.0_f64;

    for (idx, &start) in starts.iter().enumerate() {
        let end = starts.get(idx + 1).copied().unwrap_or(horizon + 1);
        let beta = network.beta_at(start);
        let gamma = network.gamma_at(start);
        let m = comparison_matrix(beta, gamma, network.h())?;
        let rho = spectral_radius(&m, RHO_TOL)?;
        let symmetric = beta.is_symmetric(1e-12);
        if !symmetric {
            all_symmetric = false;
            reasons.push(format!(
                "symmetry hypothesis violated: infection matrix on steps [{start}, {end}) is asymmetric"
            ));
        }
        sup_rho = sup_rho.max(rho);
        pieces.push(PieceSpectrum {
            start,
            end,
            rho,
            symmetric,
        });
        matrices.push(m);
    }

    if sup_rho >= 1.0 {
        reasons.push(format!("sup spectral radius {sup_rho} >= 1"));
    }
    let satisfied = all_symmetric && sup_rho < 1.0;

    let mut cert = GesCertificate {
        sup_rho,
        satisfied,
        reasons,
        pieces,
        q_diagonals: None,
        sigma1: None,
        sigma2: None,
        sigma3_stated: None,
        sigma3_min: None,
        rate_bound: None,
        rate_bound_stated: None,
        alpha: None,
        lyapunov_failure: None,
    };
    if !satisfied {
        return Ok(cert);
    }

    match diagonal_lyapunov(&matrices) {
        Ok(q_seq) => {
            let bound = decay_rate_bound(&matrices, &q_seq)?;
            cert.sigma1 = Some(bound.sigma1);
            cert.sigma2 = Some(bound.sigma2);
            cert.sigma3_stated = Some(bound.sigma3_stated);
            cert.sigma3_min = Some(bound.sigma3_min);
            cert.rate_bound = Some(bound.rate);
            cert.rate_bound_stated = Some(bound.rate_stated);
            cert.alpha = Some(bound.alpha);
            cert.q_diagonals = Some(q_seq);
        }
        Err(not_found) => {
            // Spectral condition holds but the numerical margin near
            // rho ~ 1 defeated the construction; report, don't guess.
            cert.lyapunov_failure = Some(not_found.to_string());
        }
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EpidemicNetwork;

    fn mat(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn comparison_matrix_diagonal_case() {
        let m = comparison_matrix(&Matrix::zeros(3, 3), &[0.2, 0.2, 0.2], 1.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 0.8 } else { 0.0 };
                assert_eq!(m.get(i, j), want);
            }
        }
    }

    #[test]
    fn comparison_matrix_two_node_hand_case() {
        let b = mat(&[&[0.0, 0.5], &[0.5, 0.0]]);
        let m = comparison_matrix(&b, &[0.2, 0.2], 0.1).unwrap();
        assert!((m.get(0, 0) - 0.98).abs() < 1e-15);
        assert!((m.get(0, 1) - 0.05).abs() < 1e-15);
        assert!((m.get(1, 0) - 0.05).abs() < 1e-15);
        assert!((m.get(1, 1) - 0.98).abs() < 1e-15);
    }

    #[test]
    fn transition_identity_holds() {
        // M_hat = M - h (I - S) B, checked entrywise
        let b = mat(&[&[0.1, 0.3], &[0.3, 0.2]]);
        let gamma = [0.4, 0.5];
        let s = [0.7, 0.9];
        let h = 0.8;
        let m = comparison_matrix(&b, &gamma, h).unwrap();
        let m_hat = infected_transition_matrix(&b, &gamma, &s, h).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let want = m.get(i, j) - h * (1.0 - s[i]) * b.get(i, j);
                assert!((m_hat.get(i, j) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn irreducibility_cases() {
        assert!(!is_irreducible(&Matrix::zeros(3, 3)));
        // block diagonal, two components
        let blocks = mat(&[
            &[0.0, 1.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        assert!(!is_irreducible(&blocks));
        let ring = mat(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]]);
        assert!(is_irreducible(&ring));
        assert!(!is_irreducible(&mat(&[&[0.0]])));
        assert!(is_irreducible(&mat(&[&[0.3]])));
    }

    #[test]
    fn lyapunov_identity_weights_for_symmetric_piece() {
        let mut m = Matrix::zeros(2, 2);
        m.set(0, 0, 0.8);
        m.set(1, 1, 0.8);
        let q = diagonal_lyapunov(&[m.clone()]).unwrap();
        assert_eq!(q, vec![vec![1.0, 1.0]]);
        let bound = decay_rate_bound(&[m], &q).unwrap();
        assert!((bound.sigma3_min - 0.36).abs() < 1e-12);
        assert!((bound.rate - 0.8).abs() < 1e-12);
    }

    #[test]
    fn lyapunov_perron_weights_for_nonsymmetric_piece() {
        // rho = 0.5 + sqrt(0.04) = 0.7
        let m = mat(&[&[0.5, 0.4], &[0.1, 0.5]]);
        let q = diagonal_lyapunov(std::slice::from_ref(&m)).expect("candidate should verify");
        assert!(q[0].iter().all(|&v| v > 0.0));
        let bound = decay_rate_bound(&[m], &q).unwrap();
        assert!(bound.sigma3_min > 0.0);
        assert!(bound.rate < 1.0);
    }

    #[test]
    fn lyapunov_rejects_unstable_piece() {
        let m = mat(&[&[1.2, 0.0], &[0.0, 0.3]]);
        let err = diagonal_lyapunov(&[m]).unwrap_err();
        assert!(err.margin < 0.0);
        assert_eq!(err.piece, 0);
    }

    #[test]
    fn rate_bound_of_zero_matrix_is_zero() {
        let m = Matrix::zeros(3, 3);
        let q = vec![vec![1.0; 3]];
        let bound = decay_rate_bound(&[m], &q).unwrap();
        assert_eq!(bound.sigma2, 1.0);
        assert_eq!(bound.sigma3_min, 1.0);
        assert_eq!(bound.rate, 0.0);
    }

    #[test]
    fn certificate_no_transmission() {
        let net = EpidemicNetwork::constant(
            vec![10, 10],
            Matrix::zeros(2, 2),
            vec![0.2, 0.2],
            1.0,
        )
        .unwrap();
        let cert = certify_ges(&net, 100).unwrap();
        assert!(cert.satisfied);
        assert!((cert.sup_rho - 0.8).abs() < 1e-9);
        assert_eq!(cert.q_diagonals.as_ref().unwrap()[0], vec![1.0, 1.0]);
        assert!((cert.rate_bound.unwrap() - 0.8).abs() < 1e-9);
    }

    #[test]
    fn certificate_fails_when_radius_exceeds_one() {
        let b = mat(&[&[0.0, 0.5], &[0.5, 0.0]]);
        let net = EpidemicNetwork::constant(vec![10, 10], b, vec![0.2, 0.2], 0.1).unwrap();
        let cert = certify_ges(&net, 10).unwrap();
        assert!(!cert.satisfied);
        assert!((cert.sup_rho - 1.03).abs() < 1e-9);
        assert!(cert.reasons.iter().any(|r| r.contains(">= 1")));
    }

    #[test]
    fn certificate_refuses_asymmetric_infection_matrix() {
        let b = mat(&[&[0.0, 0.2], &[0.1, 0.0]]);
        let net = EpidemicNetwork::constant(vec![10, 10], b, vec![0.9, 0.9], 1.0).unwrap();
        let cert = certify_ges(&net, 10).unwrap();
        assert!(!cert.satisfied);
        assert!(cert
            .reasons
            .iter()
            .any(|r| r.contains("symmetry hypothesis violated")));
        // sup_rho is still reported for diagnostics
        assert!(cert.sup_rho < 1.0);
    }
}
