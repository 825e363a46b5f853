//! Networked discrete-time SIR dynamics with time-varying parameters.
//!
//! A network of `n` subpopulations evolves per step as
//!
//! ```text
//! s_i(k+1) = s_i(k) - h * s_i(k) * sum_j beta_ij(k) x_j(k)
//! x_i(k+1) = x_i(k) + h * (s_i(k) * sum_j beta_ij(k) x_j(k) - gamma_i(k) x_i(k))
//! r_i(k+1) = r_i(k) + h * gamma_i(k) x_i(k)
//! ```
//!
//! Under the standing parameter assumptions (`h gamma_i(k)` in (0, 1] and
//! `h * sum_j beta_ij(k) <= 1`), every state coordinate stays in [0, 1],
//! each node conserves `s + x + r = 1`, and `s_i` is non-increasing. The
//! update is applied verbatim: no renormalisation and no clamping, so any
//! numerical violation of those facts surfaces in tests instead of being
//! masked.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::schedule::Schedule;

/// Epidemic network: subpopulation sizes plus piecewise-constant schedules
/// for the infection-rate matrix and the healing rates, and the Euler step
/// size `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpidemicNetwork {
    populations: Vec<u64>,
    beta: Schedule<Matrix>,
    gamma: Schedule<Vec<f64>>,
    h: f64,
}

impl EpidemicNetwork {
    pub fn new(
        populations: Vec<u64>,
        beta: Schedule<Matrix>,
        gamma: Schedule<Vec<f64>>,
        h: f64,
    ) -> Result<Self> {
        let n = populations.len();
        if n == 0 {
            return Err(Error::Invalid("network needs at least one node".into()));
        }
        if populations.iter().any(|&p| p == 0) {
            return Err(Error::Invalid("populations must be positive".into()));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Invalid(format!("step size h must be positive, got {h}")));
        }
        for (start, b) in beta.pieces() {
            if b.rows() != n || b.cols() != n {
                return Err(Error::Dimension {
                    context: "beta schedule piece",
                    expected: n,
                    found: if b.rows() != n { b.rows() } else { b.cols() },
                });
            }
            for i in 0..n {
                if b.row(i).iter().any(|v| !v.is_finite()) {
                    return Err(Error::Invalid(format!(
                        "beta piece at step {start} has a non-finite entry in row {i}"
                    )));
                }
            }
        }
        for (start, g) in gamma.pieces() {
            if g.len() != n {
                return Err(Error::Dimension {
                    context: "gamma schedule piece",
                    expected: n,
                    found: g.len(),
                });
            }
            if g.iter().any(|v| !v.is_finite()) {
                return Err(Error::Invalid(format!(
                    "gamma piece at step {start} has a non-finite entry"
                )));
            }
        }
        Ok(Self {
            populations,
            beta,
            gamma,
            h,
        })
    }

    /// Constant-parameter convenience constructor.
    pub fn constant(populations: Vec<u64>, beta: Matrix, gamma: Vec<f64>, h: f64) -> Result<Self> {
        Self::new(
            populations,
            Schedule::constant(beta),
            Schedule::constant(gamma),
            h,
        )
    }

    pub fn node_count(&self) -> usize {
        self.populations.len()
    }

    pub fn populations(&self) -> &[u64] {
        &self.populations
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn beta_at(&self, k: usize) -> &Matrix {
        self.beta.at(k)
    }

    pub fn gamma_at(&self, k: usize) -> &[f64] {
        self.gamma.at(k)
    }

    pub fn beta_schedule(&self) -> &Schedule<Matrix> {
        &self.beta
    }

    pub fn gamma_schedule(&self) -> &Schedule<Vec<f64>> {
        &self.gamma
    }

    /// Merged start steps of both schedules, ascending. On each interval
    /// between consecutive entries the parameter pair (B, gamma) is constant.
    pub fn parameter_breakpoints(&self, horizon: usize) -> Vec<usize> {
        let mut starts: Vec<usize> = self
            .beta
            .starts()
            .chain(self.gamma.starts())
            .filter(|&s| s <= horizon)
            .collect();
        starts.sort_unstable();
        starts.dedup();
        starts
    }

    /// Deterministic identifier derived from all parameters (FNV-1a).
    pub fn fingerprint(&self) -> String {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                hash ^= u64::from(b);
                hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(&(self.populations.len() as u64).to_le_bytes());
        for &p in &self.populations {
            eat(&p.to_le_bytes());
        }
        eat(&self.h.to_bits().to_le_bytes());
        for (start, b) in self.beta.pieces() {
            eat(&(*start as u64).to_le_bytes());
            for i in 0..b.rows() {
                for v in b.row(i) {
                    eat(&v.to_bits().to_le_bytes());
                }
            }
        }
        for (start, g) in self.gamma.pieces() {
            eat(&(*start as u64).to_le_bytes());
            for v in g {
                eat(&v.to_bits().to_le_bytes());
            }
        }
        format!("{hash:016x}")
    }
}

/// Tolerances for state invariants. Conservation drifts by a few ulps per
/// step; the range check only has to absorb rounding at the boundaries.
pub const RANGE_TOL: f64 = 1e-12;
pub const CONSERVATION_TOL: f64 = 1e-9;

/// Per-node (s, x, r) proportions at a single step.
#[derive(Debug, Clone, PartialEq)]
pub struct EpidemicState {
    s: Vec<f64>,
    x: Vec<f64>,
    r: Vec<f64>,
}

impl EpidemicState {
    pub fn new(s: Vec<f64>, x: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        let n = s.len();
        if n == 0 {
            return Err(Error::Invalid("state must have at least one node".into()));
        }
        if x.len() != n || r.len() != n {
            return Err(Error::Dimension {
                context: "state compartments",
                expected: n,
                found: if x.len() != n { x.len() } else { r.len() },
            });
        }
        for i in 0..n {
            for (name, v) in [("s", s[i]), ("x", x[i]), ("r", r[i])] {
                if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&v) {
                    return Err(Error::Invalid(format!(
                        "{name}[{i}] = {v} is outside [0, 1]"
                    )));
                }
            }
            let sum = s[i] + x[i] + r[i];
            if (sum - 1.0).abs() > CONSERVATION_TOL {
                return Err(Error::Invalid(format!(
                    "s+x+r at node {i} is {sum}, not 1"
                )));
            }
        }
        Ok(Self { s, x, r })
    }

    pub fn node_count(&self) -> usize {
        self.s.len()
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn mean_infected(&self) -> f64 {
        self.x.iter().sum::<f64>() / self.x.len() as f64
    }

    pub fn mean_susceptible(&self) -> f64 {
        self.s.iter().sum::<f64>() / self.s.len() as f64
    }
}

/// A simulated state sequence together with the fingerprint of the network
/// that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<EpidemicState>,
    pub network_ref: String,
}

impl Trajectory {
    /// Last step index (states run k = 0..=horizon).
    pub fn horizon(&self) -> usize {
        self.states.len() - 1
    }

    /// New-infection proportions -delta_s_i(k) = s_i(k-1) - s_i(k) per node,
    /// with the k = 0 entry fixed at 0.
    pub fn new_infections(&self) -> Vec<Vec<f64>> {
        let n = self.states[0].node_count();
        let mut out = vec![vec![0.0; self.states.len()]; n];
        for k in 1..self.states.len() {
            for i in 0..n {
                out[i][k] = self.states[k - 1].s()[i] - self.states[k].s()[i];
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ViolationKind {
    /// Assumption 1: h * gamma_i(k) must be positive.
    HealingRateNonPositive,
    /// Assumption 1: beta_ij(k) must be nonnegative.
    InfectionRateNegative,
    /// Assumption 2: h * gamma_i(k) must not exceed 1.
    HealingRateStepTooLarge,
    /// Assumption 2: h * sum_j beta_ij(k) must not exceed 1.
    InfectionRowSumTooLarge,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct AssumptionViolation {
    /// Steps `[start, end)` of the offending schedule piece (clipped to the
    /// validated horizon).
    pub step_range: (usize, usize),
    pub node: usize,
    pub kind: ViolationKind,
    pub detail: String,
}

/// Outcome of checking the model assumptions over a step range.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ValidationReport {
    pub violations: Vec<AssumptionViolation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ok() {
            return write!(f, "all parameter assumptions hold");
        }
        for v in &self.violations {
            writeln!(
                f,
                "steps [{}, {}) node {}: {}",
                v.step_range.0, v.step_range.1, v.node, v.detail
            )?;
        }
        Ok(())
    }
}

/// Check Assumptions 1 and 2 for every schedule piece overlapping
/// `[0, horizon]`. Structural problems (dimension mismatches, schedule
/// gaps) are rejected by the constructors and surface as hard errors;
/// assumption violations are collected in the report.
pub fn validate_network(network: &EpidemicNetwork, horizon: usize) -> Result<ValidationReport> {
    let h = network.h();
    let n = network.node_count();
    let mut violations = Vec::new();

    for (start, end, gamma) in network.gamma_schedule().pieces_within(horizon) {
        for (i, &g) in gamma.iter().enumerate() {
            let hg = h * g;
            if !(hg > 0.0) {
                violations.push(AssumptionViolation {
                    step_range: (start, end),
                    node: i,
                    kind: ViolationKind::HealingRateNonPositive,
                    detail: format!("h*gamma[{i}] = {hg} <= 0"),
                });
            } else if hg > 1.0 {
                violations.push(AssumptionViolation {
                    step_range: (start, end),
                    node: i,
                    kind: ViolationKind::HealingRateStepTooLarge,
                    detail: format!("h*gamma[{i}] = {hg} > 1"),
                });
            }
        }
    }

    for (start, end, beta) in network.beta_schedule().pieces_within(horizon) {
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in 0..n {
                let b = beta.get(i, j);
                if b < 0.0 {
                    violations.push(AssumptionViolation {
                        step_range: (start, end),
                        node: i,
                        kind: ViolationKind::InfectionRateNegative,
                        detail: format!("beta[{i}][{j}] = {b} < 0"),
                    });
                }
                row_sum += b;
            }
            if h * row_sum > 1.0 {
                violations.push(AssumptionViolation {
                    step_range: (start, end),
                    node: i,
                    kind: ViolationKind::InfectionRowSumTooLarge,
                    detail: format!("h*sum_j beta[{i}][j] = {} > 1", h * row_sum),
                });
            }
        }
    }

    Ok(ValidationReport { violations })
}

/// Advance one step of the SIR dynamics with the given parameters.
pub fn step(
    state: &EpidemicState,
    beta: &Matrix,
    gamma: &[f64],
    h: f64,
) -> Result<EpidemicState> {
    let n = state.node_count();
    if beta.rows() != n || beta.cols() != n {
        return Err(Error::Dimension {
            context: "step: beta",
            expected: n,
            found: if beta.rows() != n {
                beta.rows()
            } else {
                beta.cols()
            },
        });
    }
    if gamma.len() != n {
        return Err(Error::Dimension {
            context: "step: gamma",
            expected: n,
            found: gamma.len(),
        });
    }

    let mut s_next = Vec::with_capacity(n);
    let mut x_next = Vec::with_capacity(n);
    let mut r_next = Vec::with_capacity(n);
    for i in 0..n {
        let pressure: f64 = beta
            .row(i)
            .iter()
            .zip(state.x())
            .map(|(b, xj)| b * xj)
            .sum();
        let s = state.s()[i];
        let x = state.x()[i];
        let r = state.r()[i];
        let new_infections = h * s * pressure;
        s_next.push(s - new_infections);
        x_next.push(x + (new_infections - h * gamma[i] * x));
        r_next.push(r + h * gamma[i] * x);
    }
    EpidemicState::new(s_next, x_next, r_next)
}

/// Simulate `horizon` steps from `initial`. Refuses to run when the network
/// violates the parameter assumptions anywhere on `[0, horizon]`, returning
/// the validation report inside the error.
pub fn simulate(
    network: &EpidemicNetwork,
    initial: &EpidemicState,
    horizon: usize,
) -> Result<Trajectory> {
    let report = validate_network(network, horizon)?;
    if !report.ok() {
        return Err(Error::Validation(Box::new(report)));
    }
    if initial.node_count() != network.node_count() {
        return Err(Error::Dimension {
            context: "simulate: initial state",
            expected: network.node_count(),
            found: initial.node_count(),
        });
    }

    let mut states = Vec::with_capacity(horizon + 1);
    states.push(initial.clone());
    for k in 0..horizon {
        let next = step(
            states.last().unwrap(),
            network.beta_at(k),
            network.gamma_at(k),
            network.h(),
        )?;
        states.push(next);
    }
    Ok(Trajectory {
        states,
        network_ref: network.fingerprint(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node_net(h: f64) -> EpidemicNetwork {
        let beta = Matrix::from_rows(&[vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        EpidemicNetwork::constant(vec![1000, 1000], beta, vec![0.2, 0.2], h).unwrap()
    }

    #[test]
    fn healthy_state_is_fixed_point() {
        let net = two_node_net(0.1);
        let state = EpidemicState::new(vec![0.7, 1.0], vec![0.0, 0.0], vec![0.3, 0.0]).unwrap();
        let next = step(&state, net.beta_at(0), net.gamma_at(0), net.h()).unwrap();
        assert_eq!(next, state);
    }

    #[test]
    fn step_matches_hand_evaluation() {
        // worked example: h = 0.1, B = [[0, .5], [.5, 0]], gamma = (.2, .2)
        let net = two_node_net(0.1);
        let state = EpidemicState::new(vec![0.9, 1.0], vec![0.1, 0.0], vec![0.0, 0.0]).unwrap();
        let next = step(&state, net.beta_at(0), net.gamma_at(0), net.h()).unwrap();
        assert!((next.s()[0] - 0.9).abs() < 1e-15);
        assert!((next.s()[1] - 0.995).abs() < 1e-15);
        assert!((next.x()[0] - 0.098).abs() < 1e-15);
        assert!((next.x()[1] - 0.005).abs() < 1e-15);
        assert!((next.r()[0] - 0.002).abs() < 1e-15);
        assert_eq!(next.r()[1], 0.0);
    }

    #[test]
    fn step_rejects_dimension_mismatch() {
        let net = two_node_net(0.1);
        let state =
            EpidemicState::new(vec![1.0, 1.0, 1.0], vec![0.0; 3], vec![0.0; 3]).unwrap();
        assert!(matches!(
            step(&state, net.beta_at(0), net.gamma_at(0), net.h()),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn zero_horizon_yields_initial_only() {
        let net = two_node_net(0.1);
        let initial = EpidemicState::new(vec![0.9, 1.0], vec![0.1, 0.0], vec![0.0, 0.0]).unwrap();
        let traj = simulate(&net, &initial, 0).unwrap();
        assert_eq!(traj.states.len(), 1);
        assert_eq!(traj.states[0], initial);
    }

    #[test]
    fn validation_flags_large_healing_rate() {
        let beta = Matrix::zeros(2, 2);
        let net = EpidemicNetwork::constant(vec![10, 10], beta, vec![1.5, 0.2], 1.0).unwrap();
        let report = validate_network(&net, 10).unwrap();
        assert!(!report.ok());
        assert_eq!(report.violations.len(), 1);
        let v = &report.violations[0];
        assert_eq!(v.node, 0);
        assert_eq!(v.kind, ViolationKind::HealingRateStepTooLarge);
        assert!(v.detail.contains("1.5"));
    }

    #[test]
    fn validation_accepts_zero_infection_matrix() {
        let net =
            EpidemicNetwork::constant(vec![10], Matrix::zeros(1, 1), vec![0.5], 1.0).unwrap();
        assert!(validate_network(&net, 100).unwrap().ok());
    }

    #[test]
    fn simulate_refuses_invalid_network() {
        let beta = Matrix::from_rows(&[vec![2.0]]).unwrap();
        let net = EpidemicNetwork::constant(vec![10], beta, vec![0.5], 1.0).unwrap();
        let initial = EpidemicState::new(vec![1.0], vec![0.0], vec![0.0]).unwrap();
        match simulate(&net, &initial, 5) {
            Err(Error::Validation(report)) => assert!(!report.ok()),
            other => panic!("expected validation refusal, got {other:?}"),
        }
    }

    #[test]
    fn schedule_switch_replays_exactly() {
        let beta0 = Matrix::from_rows(&[vec![0.0, 0.3], vec![0.3, 0.0]]).unwrap();
        let net = EpidemicNetwork::new(
            vec![100, 100],
            Schedule::constant(beta0),
            Schedule::new(vec![(0, vec![0.2, 0.2]), (50, vec![0.4, 0.4])]).unwrap(),
            0.5,
        )
        .unwrap();
        let initial = EpidemicState::new(vec![0.95, 1.0], vec![0.05, 0.0], vec![0.0, 0.0]).unwrap();
        let traj = simulate(&net, &initial, 80).unwrap();
        // replay steps 50.. with the post-switch parameters
        let mut state = traj.states[50].clone();
        for k in 50..80 {
            state = step(&state, net.beta_at(k), net.gamma_at(k), net.h()).unwrap();
            assert_eq!(state, traj.states[k + 1], "diverged at step {k}");
        }
    }

    #[test]
    fn network_rejects_non_finite_parameters() {
        let nan_beta = Matrix::from_rows(&[vec![f64::NAN]]).unwrap();
        assert!(EpidemicNetwork::constant(vec![10], nan_beta, vec![0.5], 1.0).is_err());
        let inf_gamma = vec![f64::INFINITY];
        assert!(
            EpidemicNetwork::constant(vec![10], Matrix::zeros(1, 1), inf_gamma, 1.0).is_err()
        );
    }

    #[test]
    fn fingerprint_distinguishes_parameters() {
        let a = two_node_net(0.1);
        let b = two_node_net(0.2);
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_eq!(a.fingerprint(), two_node_net(0.1).fingerprint());
    }
}
