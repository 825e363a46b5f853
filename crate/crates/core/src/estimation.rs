//! State reconstruction from testing data.
//!
//! Daily confirmed proportions are deconvolved through the reporting
//! recursion: with testing probability `p`, the estimated new infections at
//! step k are `(c(k+1) - (1-p) c(k)) / p`. Recovered increments come from
//! the removal stream scaled by the active-case count, and the infected
//! estimate closes the balance so the three increments always sum to zero.
//! Before the testing window starts the estimate sits at its assumed
//! initial condition.
//!
//! On noiseless expectation-mode data the susceptible estimate is exact up
//! to the analytic offset `|s0_hat - s(0) - sum_{l<t1} delta_s(l)|`, which
//! is constant in k. Sampled-mode data makes the estimates noisy and they
//! may leave [0, 1]; raw values are reported as-is (with a clamped
//! companion available) so downstream consumers see the truth.

use crate::error::{Error, Result};
use crate::model::{EpidemicNetwork, Trajectory};
use crate::testing::{generate_dataset, TestingDataset, TestingParams};

/// Assumed initial conditions and inversion parameters for the estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub s0_hat: Vec<f64>,
    pub x0_hat: Vec<f64>,
    pub r0_hat: Vec<f64>,
    /// Testing probability the estimator assumes; may deliberately differ
    /// from the generator's true value for robustness experiments.
    pub p_test: Vec<f64>,
    pub t1: usize,
    pub t2: usize,
}

impl EstimatorConfig {
    /// Standard setup: assumed recovered share 0, infected share 1 - s0.
    pub fn from_s0(s0_hat: Vec<f64>, p_test: Vec<f64>, t1: usize, t2: usize) -> Self {
        let x0_hat = s0_hat.iter().map(|s| 1.0 - s).collect();
        let r0_hat = vec![0.0; s0_hat.len()];
        Self {
            s0_hat,
            x0_hat,
            r0_hat,
            p_test,
            t1,
            t2,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        for (name, v) in [
            ("s0_hat", &self.s0_hat),
            ("x0_hat", &self.x0_hat),
            ("r0_hat", &self.r0_hat),
            ("p_test", &self.p_test),
        ] {
            if v.len() != n {
                return Err(Error::Dimension {
                    context: "estimator config",
                    expected: n,
                    found: v.len(),
                });
            }
            let _ = name;
        }
        for i in 0..n {
            let sum = self.s0_hat[i] + self.x0_hat[i] + self.r0_hat[i];
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::Invalid(format!(
                    "assumed initial conditions at node {i} sum to {sum}, not 1"
                )));
            }
            for (name, v) in [
                ("s0_hat", self.s0_hat[i]),
                ("x0_hat", self.x0_hat[i]),
                ("r0_hat", self.r0_hat[i]),
            ] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Invalid(format!("{name}[{i}] = {v} outside [0, 1]")));
                }
            }
            if !(self.p_test[i] > 0.0 && self.p_test[i] <= 1.0) {
                return Err(Error::Invalid(format!(
                    "estimator p_test[{i}] = {} must be in (0, 1]",
                    self.p_test[i]
                )));
            }
        }
        if self.t1 < 1 {
            return Err(Error::Invalid(
                "estimator requires t1 >= 1 (the pre-window offset formula is defined from there)"
                    .into(),
            ));
        }
        if self.t1 > self.t2 {
            return Err(Error::Invalid(format!(
                "estimator window inverted: t1 = {} > t2 = {}",
                self.t1, self.t2
            )));
        }
        Ok(())
    }
}

/// Reconstructed per-node state sequences over k = 0..=t2.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedTrajectory {
    pub s_hat: Vec<Vec<f64>>,
    pub x_hat: Vec<Vec<f64>>,
    pub r_hat: Vec<Vec<f64>>,
    pub t1: usize,
    pub t2: usize,
}

impl EstimatedTrajectory {
    pub fn node_count(&self) -> usize {
        self.s_hat.len()
    }

    /// Companion series with every entry clamped into [0, 1]. The raw
    /// series is the source of truth; this exists for consumers that need
    /// proportions.
    pub fn clamped(&self) -> EstimatedTrajectory {
        let clamp = |series: &Vec<Vec<f64>>| {
            series
                .iter()
                .map(|node| node.iter().map(|v| v.clamp(0.0, 1.0)).collect())
                .collect()
        };
        EstimatedTrajectory {
            s_hat: clamp(&self.s_hat),
            x_hat: clamp(&self.x_hat),
            r_hat: clamp(&self.r_hat),
            t1: self.t1,
            t2: self.t2,
        }
    }
}

/// Estimated new-infection proportion `-delta_s_hat(k)` from confirmed
/// proportions: `(c(k+1) - (1-p) c(k)) / p` on the window, 0 before it.
pub fn estimate_new_infections(
    confirmed: &[f64],
    p: f64,
    k: usize,
    t1: usize,
    t2: usize,
) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Invalid(format!(
            "testing probability p = {p} must be in (0, 1]"
        )));
    }
    if k > t2 {
        return Err(Error::Invalid(format!(
            "estimate_new_infections: k = {k} is past the window end t2 = {t2}"
        )));
    }
    if k < t1 {
        return Ok(0.0);
    }
    if confirmed.len() <= k + 1 {
        return Err(Error::Dimension {
            context: "estimate_new_infections confirmed series",
            expected: k + 2,
            found: confirmed.len(),
        });
    }
    Ok((confirmed[k + 1] - (1.0 - p) * confirmed[k]) / p)
}

/// Single-node online estimator. Feed it observations in index order; it
/// keeps the running state triple and the full reconstructed series.
#[derive(Debug, Clone)]
pub struct NodeEstimator {
    p: f64,
    t1: usize,
    t2: usize,
    population: f64,
    s_hat: f64,
    x_hat: f64,
    r_hat: f64,
    next_index: usize,
    series: Vec<(f64, f64, f64)>,
}

impl NodeEstimator {
    pub fn new(
        s0_hat: f64,
        x0_hat: f64,
        r0_hat: f64,
        p: f64,
        t1: usize,
        t2: usize,
        population: u64,
    ) -> Self {
        // the estimate is pinned at the initial condition for every index
        // before t1
        let series = vec![(s0_hat, x0_hat, r0_hat); t1];
        Self {
            p,
            t1,
            t2,
            population: population as f64,
            s_hat: s0_hat,
            x_hat: x0_hat,
            r_hat: r0_hat,
            next_index: t1,
            series,
        }
    }

    pub fn latest(&self) -> (f64, f64, f64) {
        (self.s_hat, self.x_hat, self.r_hat)
    }

    pub fn latest_susceptible(&self) -> f64 {
        self.s_hat
    }

    /// Advance to index `j` (must equal the internal cursor, in
    /// `[t1, t2]`). Needs `c(j)`, `c(j+1)`, the removal proportion `d(j)`,
    /// and the active-case count at `j - 1`.
    pub fn advance(
        &mut self,
        j: usize,
        c_j: f64,
        c_j_next: f64,
        d_j: f64,
        active_prev: f64,
    ) -> Result<(f64, f64, f64)> {
        if j != self.next_index || j < self.t1 || j > self.t2 {
            return Err(Error::Invalid(format!(
                "estimator advance out of order: got index {j}, expected {}",
                self.next_index
            )));
        }
        let neg_delta_s = (c_j_next - (1.0 - self.p) * c_j) / self.p;
        // no removal estimate at the window start, and never divide by a
        // zero active count
        let delta_r = if j == self.t1 || active_prev <= 0.0 {
            0.0
        } else {
            self.population * d_j / active_prev * self.x_hat
        };
        let delta_x = neg_delta_s - delta_r;
        self.s_hat -= neg_delta_s;
        self.x_hat += delta_x;
        self.r_hat += delta_r;
        self.next_index += 1;
        self.series.push((self.s_hat, self.x_hat, self.r_hat));
        Ok((self.s_hat, self.x_hat, self.r_hat))
    }

    pub fn series(&self) -> &[(f64, f64, f64)] {
        &self.series
    }
}

/// Runs the estimator over a complete dataset.
pub fn estimate_states(
    dataset: &TestingDataset,
    config: &EstimatorConfig,
) -> Result<EstimatedTrajectory> {
    let n = dataset.node_count();
    config.validate(n)?;
    if dataset.t1 != config.t1 || dataset.t2 != config.t2 {
        return Err(Error::Invalid(format!(
            "dataset window [{}, {}] does not match estimator window [{}, {}]",
            dataset.t1, dataset.t2, config.t1, config.t2
        )));
    }

    let mut out = EstimatedTrajectory {
        s_hat: Vec::with_capacity(n),
        x_hat: Vec::with_capacity(n),
        r_hat: Vec::with_capacity(n),
        t1: config.t1,
        t2: config.t2,
    };
    for i in 0..n {
        let mut node = NodeEstimator::new(
            config.s0_hat[i],
            config.x0_hat[i],
            config.r0_hat[i],
            config.p_test[i],
            config.t1,
            config.t2,
            dataset.populations[i],
        );
        for j in config.t1..=config.t2 {
            node.advance(
                j,
                dataset.confirmed[i][j],
                dataset.confirmed[i][j + 1],
                dataset.removed[i][j],
                dataset.active[i][j.saturating_sub(1)],
            )?;
        }
        let (s, x, r): (Vec<f64>, Vec<f64>, Vec<f64>) = node
            .series()
            .iter()
            .fold((vec![], vec![], vec![]), |mut acc, &(s, x, r)| {
                acc.0.push(s);
                acc.1.push(x);
                acc.2.push(r);
                acc
            });
        out.s_hat.push(s);
        out.x_hat.push(x);
        out.r_hat.push(r);
    }
    Ok(out)
}

/// Closed-form susceptible estimation error
/// `|s0_hat - s(0) - sum_{l=1}^{t1-1} delta_s(l)|`, valid (and constant)
/// for every k >= t1 on expectation-mode data.
pub fn analytic_error(
    s0_hat: f64,
    trajectory: &Trajectory,
    t1: usize,
    node: usize,
    k: usize,
) -> Result<f64> {
    if t1 < 1 {
        return Err(Error::Invalid("estimator requires t1 >= 1".into()));
    }
    if k < t1 {
        return Err(Error::Invalid(format!(
            "analytic error is defined for k >= t1 (got k = {k}, t1 = {t1})"
        )));
    }
    if trajectory.horizon() < t1 - 1 {
        return Err(Error::Invalid(format!(
            "trajectory too short for t1 = {t1}"
        )));
    }
    if node >= trajectory.states[0].node_count() {
        return Err(Error::Dimension {
            context: "analytic_error node",
            expected: trajectory.states[0].node_count(),
            found: node,
        });
    }
    let s = |l: usize| trajectory.states[l].s()[node];
    let mut missed = 0.0;
    for l in 1..t1 {
        missed += s(l) - s(l - 1);
    }
    Ok((s0_hat - s(0) - missed).abs())
}

/// One evaluated point of the estimation-error surface.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepPoint {
    pub t1: usize,
    pub s0_hat: f64,
    pub error_empirical: f64,
    pub error_analytic: f64,
}

/// Error surface over (t1, s0_hat) plus the zero-error locus
/// `s0* = s(0) + sum_{l<t1} delta_s(l)` per t1.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ErrorSurface {
    pub points: Vec<SweepPoint>,
    pub zero_locus: Vec<(usize, f64)>,
    pub node: usize,
    pub k_eval: usize,
}

/// Full-estimation error sweep on expectation-mode data: for every (t1,
/// s0_hat) grid point, runs the estimator end to end and records the
/// empirical error at `k_eval` next to the closed-form prediction.
pub fn error_sweep(
    network: &EpidemicNetwork,
    trajectory: &Trajectory,
    node: usize,
    p_test: f64,
    t1_values: &[usize],
    s0_grid: &[f64],
    k_eval: usize,
) -> Result<ErrorSurface> {
    let n = network.node_count();
    if node >= n {
        return Err(Error::Dimension {
            context: "error_sweep node",
            expected: n,
            found: node,
        });
    }
    if t1_values.is_empty() || s0_grid.is_empty() {
        return Err(Error::Invalid("sweep grids must be non-empty".into()));
    }
    if let Some(&bad) = s0_grid
        .iter()
        .find(|v| !(0.0..=1.0).contains(*v) || !v.is_finite())
    {
        return Err(Error::Invalid(format!(
            "s0_hat grid value {bad} outside [0, 1]"
        )));
    }
    let max_t1 = *t1_values.iter().max().unwrap();
    if k_eval < max_t1 {
        return Err(Error::Invalid(format!(
            "k_eval = {k_eval} must be >= every t1 in the sweep (max {max_t1})"
        )));
    }
    let t2 = trajectory.horizon().saturating_sub(1);
    if k_eval > t2 {
        return Err(Error::Invalid(format!(
            "k_eval = {k_eval} exceeds the usable window end {t2}"
        )));
    }

    let mut surface = ErrorSurface {
        points: Vec::with_capacity(t1_values.len() * s0_grid.len()),
        zero_locus: Vec::with_capacity(t1_values.len()),
        node,
        k_eval,
    };
    for &t1 in t1_values {
        if t1 < 1 {
            return Err(Error::Invalid("estimator requires t1 >= 1".into()));
        }
        let params = TestingParams::expectation(vec![p_test; n], t1, t2);
        let dataset = generate_dataset(
            trajectory,
            network.populations(),
            network.gamma_schedule(),
            network.h(),
            &params,
        )?;
        // the guess that zeroes the error: the true susceptible level just
        // before testing starts
        surface
            .zero_locus
            .push((t1, trajectory.states[t1 - 1].s()[node]));
        for &s0 in s0_grid {
            let mut s0_hat = vec![1.0; n];
            s0_hat[node] = s0;
            let config = EstimatorConfig::from_s0(s0_hat, vec![p_test; n], t1, t2);
            let estimated = estimate_states(&dataset, &config)?;
            let empirical =
                (estimated.s_hat[node][k_eval] - trajectory.states[k_eval].s()[node]).abs();
            let analytic = analytic_error(s0, trajectory, t1, node, k_eval)?;
            surface.points.push(SweepPoint {
                t1,
                s0_hat: s0,
                error_empirical: empirical,
                error_analytic: analytic,
            });
        }
    }
    Ok(surface)
}
