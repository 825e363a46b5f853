//! Testing-data generation: daily confirmed and removed case counts
//! produced from a true trajectory under a stochastic reporting model.
//!
//! Each infected individual is tested with probability `p` per day starting
//! the day after infection, so the delay from infection to report is
//! geometric (optionally shifted by a constant per-node offset `eta`). An
//! individual is tested exactly once, tests are always accurate, and
//! recovered individuals still test positive. Data exists on the window
//! `k in [t1+1, t2+1]`; infections before `t1` are never reported, and
//! `c_i(k) = d_i(k) = 0` outside the window.
//!
//! Two generation modes share one implementation path:
//!
//! * expectation mode evaluates the exact expected proportions
//!   `c_i(k) = p * (-delta_s_i(k-1)) + (1 - p) * c_i(k-1)`, keeping real
//!   values as ground truth and rounding to integer counts only for
//!   display;
//! * sampled mode draws integer counts by day-by-day binomial thinning of
//!   an untested-infected pool, which is distribution-identical to
//!   per-individual geometric delays thanks to memorylessness.
//!
//! Removal reports follow the active known cases: each day every active
//! case recovers with probability `h * gamma(k-1)` (a binomial draw in
//! sampled mode, the exact mean in expectation mode).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::Trajectory;
use crate::schedule::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum TestingMode {
    Expectation,
    Sampled,
}

/// Reporting-model parameters for one testing campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct TestingParams {
    /// Per-node daily testing probability, in (0, 1].
    pub p_test: Vec<f64>,
    /// Per-node constant delay component (days added after the geometric draw).
    pub delay_offset: Vec<usize>,
    /// Testing window bounds: data exists for k in [t1+1, t2+1].
    pub t1: usize,
    pub t2: usize,
    pub mode: TestingMode,
    /// RNG seed, required in sampled mode.
    pub seed: Option<u64>,
}

impl TestingParams {
    pub fn expectation(p_test: Vec<f64>, t1: usize, t2: usize) -> Self {
        let n = p_test.len();
        Self {
            p_test,
            delay_offset: vec![0; n],
            t1,
            t2,
            mode: TestingMode::Expectation,
            seed: None,
        }
    }

    pub fn sampled(p_test: Vec<f64>, t1: usize, t2: usize, seed: u64) -> Self {
        let n = p_test.len();
        Self {
            p_test,
            delay_offset: vec![0; n],
            t1,
            t2,
            mode: TestingMode::Sampled,
            seed: Some(seed),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.p_test.len() != n {
            return Err(Error::Dimension {
                context: "testing p_test",
                expected: n,
                found: self.p_test.len(),
            });
        }
        if self.delay_offset.len() != n {
            return Err(Error::Dimension {
                context: "testing delay_offset",
                expected: n,
                found: self.delay_offset.len(),
            });
        }
        if self.t1 > self.t2 {
            return Err(Error::Invalid(format!(
                "testing window inverted: t1 = {} > t2 = {}",
                self.t1, self.t2
            )));
        }
        for (i, &p) in self.p_test.iter().enumerate() {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::Invalid(format!(
                    "p_test[{i}] = {p} must be in (0, 1]"
                )));
            }
        }
        if self.mode == TestingMode::Sampled && self.seed.is_none() {
            return Err(Error::Invalid(
                "sampled mode requires a seed (reproducibility contract)".into(),
            ));
        }
        Ok(())
    }
}

/// Delay model for the transfer-matrix formulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelayModel {
    /// Deterministic delay of `offset` days; `offset = 0` reports same-day.
    Constant { offset: usize },
    /// Geometric delay with daily success probability `p`, shifted by
    /// `offset` days.
    Geometric { p: f64, offset: usize },
}

/// Lower-triangular map from windowed new-infection proportions to daily
/// confirmed proportions.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    pub phi: Matrix,
    pub t1: usize,
    pub t2: usize,
}

/// Builds the `(t2 - t1 + 2) x (t2 - t1 + 2)` transfer matrix for the given
/// delay model. The geometric variant has first row zero and bands
/// `p * (1-p)^(band-1)` below the diagonal; the constant variant has ones
/// on the `offset`-th sub-diagonal (the identity when `offset = 0`).
pub fn build_transfer_matrix(t1: usize, t2: usize, delay: DelayModel) -> Result<TransferMatrix> {
    if t1 > t2 {
        return Err(Error::Invalid(format!(
            "testing window inverted: t1 = {t1} > t2 = {t2}"
        )));
    }
    let size = t2 - t1 + 2;
    let mut phi = Matrix::zeros(size, size);
    match delay {
        DelayModel::Constant { offset } => {
            for l in 0..size.saturating_sub(offset) {
                phi.set(l + offset, l, 1.0);
            }
        }
        DelayModel::Geometric { p, offset } => {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::Invalid(format!("geometric p = {p} must be in (0, 1]")));
            }
            for i in 0..size {
                for j in 0..i {
                    let lag = i - j;
                    if lag > offset {
                        phi.set(i, j, p * (1.0 - p).powi((lag - offset - 1) as i32));
                    }
                }
            }
        }
    }
    Ok(TransferMatrix { phi, t1, t2 })
}

/// One step of observed data, indexed by the trajectory step it reports on.
#[derive(Debug, Clone)]
pub struct Observation {
    pub k: usize,
    /// Daily confirmed proportion per node.
    pub confirmed: Vec<f64>,
    /// Daily removed proportion per node.
    pub removed: Vec<f64>,
    pub confirmed_counts: Vec<u64>,
    pub removed_counts: Vec<u64>,
    /// Active known cases per node after this step (count-valued; real in
    /// expectation mode).
    pub active: Vec<f64>,
}

enum StreamState {
    Expectation {
        c_prev: Vec<f64>,
        cum_c: Vec<f64>,
        cum_d: Vec<f64>,
    },
    Sampled {
        pool: Vec<u64>,
        cum_c: Vec<u64>,
        cum_d: Vec<u64>,
        rng_confirm: ChaCha8Rng,
        rng_remove: ChaCha8Rng,
    },
}

/// Causal generator of testing data. `advance` must be called with
/// consecutive steps k = 1, 2, ... and the new-infection proportions of the
/// step being observed, so it can run either over a finished trajectory or
/// online inside a feedback loop.
pub struct TestingStream {
    params: TestingParams,
    populations: Vec<u64>,
    state: StreamState,
    /// -delta_s history per node, indexed by step (entry 0 is 0).
    infection_history: Vec<Vec<f64>>,
    next_k: usize,
}

impl TestingStream {
    pub fn new(params: TestingParams, populations: &[u64]) -> Result<Self> {
        params.validate(populations.len())?;
        let n = populations.len();
        let state = match params.mode {
            TestingMode::Expectation => StreamState::Expectation {
                c_prev: vec![0.0; n],
                cum_c: vec![0.0; n],
                cum_d: vec![0.0; n],
            },
            TestingMode::Sampled => {
                let seed = params.seed.expect("validated above");
                let mut rng_confirm = ChaCha8Rng::seed_from_u64(seed);
                rng_confirm.set_stream(0);
                let mut rng_remove = ChaCha8Rng::seed_from_u64(seed);
                rng_remove.set_stream(1);
                StreamState::Sampled {
                    pool: vec![0; n],
                    cum_c: vec![0; n],
                    cum_d: vec![0; n],
                    rng_confirm,
                    rng_remove,
                }
            }
        };
        Ok(Self {
            params,
            populations: populations.to_vec(),
            state,
            infection_history: vec![vec![0.0; n]],
            next_k: 1,
        })
    }

    fn in_window(&self, k: usize) -> bool {
        k >= self.params.t1 + 1 && k <= self.params.t2 + 1
    }

    /// Observe step `k = self.next_k`. `new_infections[i]` is
    /// `-delta_s_i(k) = s_i(k-1) - s_i(k)` and `h_gamma_prev[i]` is the
    /// per-step removal probability `h * gamma_i(k-1)` actually in effect.
    pub fn advance(&mut self, new_infections: &[f64], h_gamma_prev: &[f64]) -> Result<Observation> {
        let n = self.populations.len();
        if new_infections.len() != n || h_gamma_prev.len() != n {
            return Err(Error::Dimension {
                context: "testing stream advance",
                expected: n,
                found: new_infections.len().min(h_gamma_prev.len()),
            });
        }
        for (i, &hg) in h_gamma_prev.iter().enumerate() {
            if !(0.0..=1.0).contains(&hg) {
                return Err(Error::Invalid(format!(
                    "h*gamma[{i}] = {hg} is not a valid removal probability"
                )));
            }
        }
        let k = self.next_k;
        self.next_k += 1;
        self.infection_history.push(new_infections.to_vec());

        let t1 = self.params.t1;
        let in_window = self.in_window(k);
        let mut obs = Observation {
            k,
            confirmed: vec![0.0; n],
            removed: vec![0.0; n],
            confirmed_counts: vec![0; n],
            removed_counts: vec![0; n],
            active: vec![0.0; n],
        };

        match &mut self.state {
            StreamState::Expectation { c_prev, cum_c, cum_d } => {
                for i in 0..n {
                    let p = self.params.p_test[i];
                    let eta = self.params.delay_offset[i];
                    let pop = self.populations[i] as f64;
                    if in_window {
                        // reported infections originate at step k-1-eta, and
                        // only from t1 onward
                        let source = k
                            .checked_sub(1 + eta)
                            .filter(|&nu| nu >= t1)
                            .map_or(0.0, |nu| self.infection_history[nu][i]);
                        let c = p * source + (1.0 - p) * c_prev[i];
                        let active_prev = cum_c[i] - cum_d[i];
                        let d = h_gamma_prev[i] * active_prev;
                        cum_c[i] += c;
                        cum_d[i] += d;
                        c_prev[i] = c;
                        obs.confirmed[i] = c;
                        obs.removed[i] = d;
                        obs.confirmed_counts[i] = (pop * c).round().max(0.0) as u64;
                        obs.removed_counts[i] = (pop * d).round().max(0.0) as u64;
                    }
                    obs.active[i] = (cum_c[i] - cum_d[i]) * pop;
                }
            }
            StreamState::Sampled {
                pool,
                cum_c,
                cum_d,
                rng_confirm,
                rng_remove,
            } => {
                for i in 0..n {
                    let p = self.params.p_test[i];
                    let eta = self.params.delay_offset[i];
                    let pop = self.populations[i] as f64;
                    if in_window {
                        let confirmed = draw_binomial(rng_confirm, pool[i], p);
                        pool[i] -= confirmed;
                        let active_prev = cum_c[i] - cum_d[i];
                        let removed = draw_binomial(rng_remove, active_prev, h_gamma_prev[i]);
                        cum_c[i] += confirmed;
                        cum_d[i] += removed;
                        obs.confirmed[i] = confirmed as f64 / pop;
                        obs.removed[i] = removed as f64 / pop;
                        obs.confirmed_counts[i] = confirmed;
                        obs.removed_counts[i] = removed;
                    }
                    // the cohort infected at nu = k - eta becomes testable
                    // next step; infections before t1 are never reported
                    if let Some(nu) = k.checked_sub(eta).filter(|&nu| nu >= t1) {
                        pool[i] += (pop * self.infection_history[nu][i]).round().max(0.0) as u64;
                    }
                    obs.active[i] = (cum_c[i] - cum_d[i]) as f64;
                }
            }
        }
        Ok(obs)
    }
}

fn draw_binomial(rng: &mut ChaCha8Rng, trials: u64, p: f64) -> u64 {
    if trials == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return trials;
    }
    Binomial::new(trials, p)
        .expect("p validated in (0,1)")
        .sample(rng)
}

fn check_trajectory_covers(trajectory: &Trajectory, t2: usize) -> Result<()> {
    if trajectory.horizon() < t2 + 1 {
        return Err(Error::Invalid(format!(
            "trajectory covers steps [0, {}] but the testing window needs [0, {}]",
            trajectory.horizon(),
            t2 + 1
        )));
    }
    Ok(())
}

/// Exact expected daily confirmed proportions, per node, indexed by step
/// k = 0..=t2+1 with zeros outside the testing window.
pub fn confirmed_expectation(
    trajectory: &Trajectory,
    params: &TestingParams,
) -> Result<Vec<Vec<f64>>> {
    let n = trajectory.states[0].node_count();
    params.validate(n)?;
    check_trajectory_covers(trajectory, params.t2)?;
    let nds = trajectory.new_infections();
    let mut c = vec![vec![0.0; params.t2 + 2]; n];
    for i in 0..n {
        let p = params.p_test[i];
        let eta = params.delay_offset[i];
        for k in (params.t1 + 1)..=(params.t2 + 1) {
            let source = k
                .checked_sub(1 + eta)
                .filter(|&nu| nu >= params.t1)
                .map_or(0.0, |nu| nds[i][nu]);
            c[i][k] = p * source + (1.0 - p) * c[i][k - 1];
        }
    }
    Ok(c)
}

/// Daily confirmed proportions via the transfer-matrix formulation
/// `Pi = Phi * Xi`. Algebraically identical to [`confirmed_expectation`];
/// kept as an independent cross-check of the recursion.
pub fn confirmed_via_transfer(
    trajectory: &Trajectory,
    params: &TestingParams,
) -> Result<Vec<Vec<f64>>> {
    let n = trajectory.states[0].node_count();
    params.validate(n)?;
    check_trajectory_covers(trajectory, params.t2)?;
    let nds = trajectory.new_infections();
    let mut c = vec![vec![0.0; params.t2 + 2]; n];
    for i in 0..n {
        let transfer = build_transfer_matrix(
            params.t1,
            params.t2,
            DelayModel::Geometric {
                p: params.p_test[i],
                offset: params.delay_offset[i],
            },
        )?;
        let xi: Vec<f64> = (params.t1..=params.t2 + 1).map(|k| nds[i][k]).collect();
        let pi = transfer.phi.mul_vec(&xi)?;
        for (m, value) in pi.into_iter().enumerate() {
            c[i][params.t1 + m] = value;
        }
    }
    Ok(c)
}

/// Sampled daily confirmed counts, per node, indexed by step k = 0..=t2+1.
pub fn confirmed_sampled(
    trajectory: &Trajectory,
    params: &TestingParams,
    populations: &[u64],
) -> Result<Vec<Vec<u64>>> {
    if params.mode != TestingMode::Sampled {
        return Err(Error::Invalid("confirmed_sampled requires sampled mode".into()));
    }
    let n = trajectory.states[0].node_count();
    check_trajectory_covers(trajectory, params.t2)?;
    let mut stream = TestingStream::new(params.clone(), populations)?;
    let nds = trajectory.new_infections();
    let mut counts = vec![vec![0; params.t2 + 2]; n];
    // removal probabilities are irrelevant to the confirmed stream
    let zeros = vec![0.0; n];
    for k in 1..=params.t2 + 1 {
        let step_nds: Vec<f64> = (0..n).map(|i| nds[i][k]).collect();
        let obs = stream.advance(&step_nds, &zeros)?;
        for i in 0..n {
            counts[i][k] = obs.confirmed_counts[i];
        }
    }
    Ok(counts)
}

/// Daily removed data derived from already-generated confirmed data.
#[derive(Debug, Clone)]
pub struct RemovedSeries {
    pub removed: Vec<Vec<f64>>,
    pub removed_counts: Vec<Vec<u64>>,
    /// Count-valued cumulative confirmed, cumulative removed, and active
    /// cases per node and step.
    pub cum_confirmed: Vec<Vec<f64>>,
    pub cum_removed: Vec<Vec<f64>>,
    pub active: Vec<Vec<f64>>,
}

/// Generates removal data for confirmed series `c` (proportions): each
/// known active case recovers with probability `h * gamma(k-1)` per step.
/// Expectation mode takes the exact mean; sampled mode draws binomially
/// with the active count as the number of trials, so active counts can
/// never go negative.
pub fn removed_data(
    confirmed: &[Vec<f64>],
    params: &TestingParams,
    gamma: &Schedule<Vec<f64>>,
    h: f64,
    populations: &[u64],
) -> Result<RemovedSeries> {
    let n = populations.len();
    params.validate(n)?;
    let len = params.t2 + 2;
    if confirmed.len() != n || confirmed.iter().any(|c| c.len() != len) {
        return Err(Error::Dimension {
            context: "removed_data confirmed series",
            expected: len,
            found: confirmed.first().map_or(0, Vec::len),
        });
    }

    let mut rng_remove = params.seed.map(|seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        rng
    });

    let mut out = RemovedSeries {
        removed: vec![vec![0.0; len]; n],
        removed_counts: vec![vec![0; len]; n],
        cum_confirmed: vec![vec![0.0; len]; n],
        cum_removed: vec![vec![0.0; len]; n],
        active: vec![vec![0.0; len]; n],
    };

    for k in 1..len {
        let gamma_prev = gamma.at(k - 1);
        for i in 0..n {
            let hg = h * gamma_prev[i];
            if !(0.0..=1.0).contains(&hg) {
                return Err(Error::Invalid(format!(
                    "h*gamma[{i}] = {hg} is not a valid removal probability"
                )));
            }
            let pop = populations[i] as f64;
            let in_window = k >= params.t1 + 1 && k <= params.t2 + 1;
            let cum_c_prev = out.cum_confirmed[i][k - 1];
            let cum_d_prev = out.cum_removed[i][k - 1];
            let active_prev = cum_c_prev - cum_d_prev;
            let (d_prop, d_count) = if !in_window {
                (0.0, 0)
            } else {
                match params.mode {
                    TestingMode::Expectation => {
                        let d = hg * active_prev / pop;
                        (d, (pop * d).round().max(0.0) as u64)
                    }
                    TestingMode::Sampled => {
                        let rng = rng_remove.as_mut().expect("seed validated");
                        let drawn = draw_binomial(rng, active_prev.round() as u64, hg);
                        (drawn as f64 / pop, drawn)
                    }
                }
            };
            out.removed[i][k] = d_prop;
            out.removed_counts[i][k] = d_count;
            out.cum_confirmed[i][k] = cum_c_prev + pop * confirmed[i][k];
            out.cum_removed[i][k] = cum_d_prev + pop * d_prop;
            out.active[i][k] = out.cum_confirmed[i][k] - out.cum_removed[i][k];
        }
    }
    Ok(out)
}

/// A complete testing dataset over `k = 0..=t2+1`.
#[derive(Debug, Clone)]
pub struct TestingDataset {
    pub t1: usize,
    pub t2: usize,
    pub populations: Vec<u64>,
    /// Daily proportions (exact in expectation mode, count-derived in
    /// sampled mode).
    pub confirmed: Vec<Vec<f64>>,
    pub removed: Vec<Vec<f64>>,
    /// Daily integer counts.
    pub confirmed_counts: Vec<Vec<u64>>,
    pub removed_counts: Vec<Vec<u64>>,
    /// Count-valued cumulative and active series.
    pub cum_confirmed: Vec<Vec<f64>>,
    pub cum_removed: Vec<Vec<f64>>,
    pub active: Vec<Vec<f64>>,
}

impl TestingDataset {
    pub fn node_count(&self) -> usize {
        self.populations.len()
    }

    /// Steps covered: k = 0..step_count().
    pub fn step_count(&self) -> usize {
        self.t2 + 2
    }
}

/// Generates the full dataset for a trajectory by running the causal
/// stream over it with the scheduled (nominal) healing rates.
pub fn generate_dataset(
    trajectory: &Trajectory,
    populations: &[u64],
    gamma: &Schedule<Vec<f64>>,
    h: f64,
    params: &TestingParams,
) -> Result<TestingDataset> {
    let n = populations.len();
    params.validate(n)?;
    check_trajectory_covers(trajectory, params.t2)?;
    let nds = trajectory.new_infections();
    let len = params.t2 + 2;
    let mut stream = TestingStream::new(params.clone(), populations)?;
    let mut ds = TestingDataset {
        t1: params.t1,
        t2: params.t2,
        populations: populations.to_vec(),
        confirmed: vec![vec![0.0; len]; n],
        removed: vec![vec![0.0; len]; n],
        confirmed_counts: vec![vec![0; len]; n],
        removed_counts: vec![vec![0; len]; n],
        cum_confirmed: vec![vec![0.0; len]; n],
        cum_removed: vec![vec![0.0; len]; n],
        active: vec![vec![0.0; len]; n],
    };
    for k in 1..len {
        let step_nds: Vec<f64> = (0..n).map(|i| nds[i][k]).collect();
        let h_gamma: Vec<f64> = gamma.at(k - 1).iter().map(|g| h * g).collect();
        let obs = stream.advance(&step_nds, &h_gamma)?;
        for i in 0..n {
            ds.confirmed[i][k] = obs.confirmed[i];
            ds.removed[i][k] = obs.removed[i];
            ds.confirmed_counts[i][k] = obs.confirmed_counts[i];
            ds.removed_counts[i][k] = obs.removed_counts[i];
            ds.active[i][k] = obs.active[i];
            ds.cum_confirmed[i][k] = ds.cum_confirmed[i][k - 1] + obs.confirmed_counts[i] as f64;
            ds.cum_removed[i][k] = ds.cum_removed[i][k - 1] + obs.removed_counts[i] as f64;
        }
    }
    // expectation mode carries real-valued cumulatives; recompute them from
    // the exact proportions rather than the rounded display counts
    if params.mode == TestingMode::Expectation {
        for i in 0..n {
            let pop = populations[i] as f64;
            let mut cc = 0.0;
            let mut cd = 0.0;
            for k in 0..len {
                cc += pop * ds.confirmed[i][k];
                cd += pop * ds.removed[i][k];
                ds.cum_confirmed[i][k] = cc;
                ds.cum_removed[i][k] = cd;
                ds.active[i][k] = cc - cd;
            }
        }
    }
    Ok(ds)
}
