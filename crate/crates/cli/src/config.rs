//! Scenario files: a TOML document with explicit matrix literals that
//! pins every parameter of a run. Node labels map to indices in
//! declaration order.

use std::path::Path;

use serde::Deserialize;

use netsir_core::control::{ControlConfig, ControlMode};
use netsir_core::estimation::EstimatorConfig;
use netsir_core::linalg::Matrix;
use netsir_core::model::{EpidemicNetwork, EpidemicState};
use netsir_core::schedule::Schedule;
use netsir_core::testing::{TestingMode, TestingParams};

use crate::{CliError, CliResult};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub seed: u64,
    pub horizon: usize,
    pub output_dir: Option<String>,
    pub network: NetworkSection,
    pub initial: InitialSection,
    pub testing: Option<TestingSection>,
    pub estimator: Option<EstimatorSection>,
    pub control: Option<ControlSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSection {
    pub h: f64,
    pub nodes: Vec<String>,
    pub populations: Vec<u64>,
    pub beta: Vec<BetaPiece>,
    pub gamma: Vec<GammaPiece>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaPiece {
    pub start: usize,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaPiece {
    pub start: usize,
    pub rates: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub s: Vec<f64>,
    pub x: Vec<f64>,
    pub r: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestingSection {
    pub p_test: Vec<f64>,
    pub t1: usize,
    pub t2: usize,
    pub mode: String,
    pub delay_offset: Option<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    pub s0_hat: Vec<f64>,
    pub p_test: Vec<f64>,
    pub t1: usize,
    pub t2: usize,
    pub r0_hat: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSection {
    pub epsilon: Vec<f64>,
    pub mode: String,
    pub active_window: [usize; 2],
    pub offline_estimation: Option<bool>,
}

/// Fully validated scenario, with core-typed components ready to run.
#[derive(Clone)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub horizon: usize,
    pub output_dir: Option<String>,
    pub nodes: Vec<String>,
    pub network: EpidemicNetwork,
    pub initial: EpidemicState,
    pub testing: Option<TestingParams>,
    pub estimator: Option<EstimatorConfig>,
    pub control: Option<ControlConfig>,
    pub control_mode: Option<ControlMode>,
    /// FNV-1a hash of the raw scenario file bytes.
    pub file_hash: String,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

pub fn load_scenario(path: &Path) -> CliResult<Scenario> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    let file: ScenarioFile = toml::from_str(&raw)
        .map_err(|e| invalid(format!("cannot parse {}: {e}", path.display())))?;
    build_scenario(file, &raw)
}

fn build_scenario(file: ScenarioFile, raw: &str) -> CliResult<Scenario> {
    let n = file.network.nodes.len();
    if n == 0 {
        return Err(invalid("network must declare at least one node"));
    }
    {
        let mut seen = std::collections::BTreeSet::new();
        for label in &file.network.nodes {
            if !seen.insert(label) {
                return Err(invalid(format!("duplicate node label '{label}'")));
            }
        }
    }
    let expect_len = |what: &str, len: usize| -> CliResult<()> {
        if len != n {
            Err(invalid(format!(
                "{what} has {len} entries but the network declares {n} nodes"
            )))
        } else {
            Ok(())
        }
    };
    expect_len("populations", file.network.populations.len())?;
    expect_len("initial.s", file.initial.s.len())?;
    expect_len("initial.x", file.initial.x.len())?;
    expect_len("initial.r", file.initial.r.len())?;

    if file.network.beta.is_empty() {
        return Err(invalid("network.beta must contain at least one piece"));
    }
    let mut beta_pieces = Vec::new();
    for piece in &file.network.beta {
        expect_len("a beta piece", piece.rows.len())?;
        for row in &piece.rows {
            expect_len("a beta matrix row", row.len())?;
        }
        let m = Matrix::from_rows(&piece.rows)
            .map_err(|e| invalid(format!("beta piece at start {}: {e}", piece.start)))?;
        beta_pieces.push((piece.start, m));
    }
    let mut gamma_pieces = Vec::new();
    for piece in &file.network.gamma {
        expect_len("a gamma piece", piece.rates.len())?;
        gamma_pieces.push((piece.start, piece.rates.clone()));
    }
    let beta = Schedule::new(beta_pieces).map_err(|e| invalid(format!("beta schedule: {e}")))?;
    let gamma =
        Schedule::new(gamma_pieces).map_err(|e| invalid(format!("gamma schedule: {e}")))?;
    let network = EpidemicNetwork::new(
        file.network.populations.clone(),
        beta,
        gamma,
        file.network.h,
    )
    .map_err(|e| invalid(format!("network: {e}")))?;

    let initial = EpidemicState::new(
        file.initial.s.clone(),
        file.initial.x.clone(),
        file.initial.r.clone(),
    )
    .map_err(|e| invalid(format!("initial state: {e}")))?;

    let testing = match &file.testing {
        None => None,
        Some(t) => {
            expect_len("testing.p_test", t.p_test.len())?;
            let mode = match t.mode.as_str() {
                "expectation" => TestingMode::Expectation,
                "sampled" => TestingMode::Sampled,
                other => {
                    return Err(invalid(format!(
                        "testing.mode must be 'expectation' or 'sampled', got '{other}'"
                    )))
                }
            };
            let delay_offset = t.delay_offset.clone().unwrap_or_else(|| vec![0; n]);
            expect_len("testing.delay_offset", delay_offset.len())?;
            if t.t2 + 1 > file.horizon {
                return Err(invalid(format!(
                    "testing window needs trajectory steps up to {} but horizon is {}",
                    t.t2 + 1,
                    file.horizon
                )));
            }
            let params = TestingParams {
                p_test: t.p_test.clone(),
                delay_offset,
                t1: t.t1,
                t2: t.t2,
                mode,
                seed: Some(file.seed),
            };
            params
                .validate(n)
                .map_err(|e| invalid(format!("testing: {e}")))?;
            Some(params)
        }
    };

    let estimator = match &file.estimator {
        None => None,
        Some(e) => {
            let testing = testing
                .as_ref()
                .ok_or_else(|| invalid("[estimator] requires a [testing] section"))?;
            expect_len("estimator.s0_hat", e.s0_hat.len())?;
            expect_len("estimator.p_test", e.p_test.len())?;
            if e.t1 != testing.t1 || e.t2 != testing.t2 {
                return Err(invalid(format!(
                    "estimator window [{}, {}] must match testing window [{}, {}]",
                    e.t1, e.t2, testing.t1, testing.t2
                )));
            }
            let mut cfg =
                EstimatorConfig::from_s0(e.s0_hat.clone(), e.p_test.clone(), e.t1, e.t2);
            if let Some(r0) = &e.r0_hat {
                expect_len("estimator.r0_hat", r0.len())?;
                cfg.r0_hat = r0.clone();
                cfg.x0_hat = (0..n).map(|i| 1.0 - cfg.s0_hat[i] - r0[i]).collect();
            }
            cfg.validate(n)
                .map_err(|e| invalid(format!("estimator: {e}")))?;
            Some(cfg)
        }
    };

    let (control, control_mode) = match &file.control {
        None => (None, None),
        Some(c) => {
            expect_len("control.epsilon", c.epsilon.len())?;
            let mode = match c.mode.as_str() {
                "none" => ControlMode::None,
                "true_state" => ControlMode::TrueState,
                "estimated_state" => ControlMode::EstimatedState,
                other => {
                    return Err(invalid(format!(
                        "control.mode must be 'none', 'true_state', or 'estimated_state', \
                         got '{other}'"
                    )))
                }
            };
            if mode == ControlMode::EstimatedState && estimator.is_none() {
                return Err(invalid(
                    "control.mode = 'estimated_state' requires an [estimator] section",
                ));
            }
            let cfg = ControlConfig {
                epsilon: c.epsilon.clone(),
                mode,
                active_window: (c.active_window[0], c.active_window[1]),
                estimator: estimator.clone(),
                offline_estimation: c.offline_estimation.unwrap_or(false),
            };
            cfg.validate(n)
                .map_err(|e| invalid(format!("control: {e}")))?;
            (Some(cfg), Some(mode))
        }
    };

    Ok(Scenario {
        name: file.name,
        seed: file.seed,
        horizon: file.horizon,
        output_dir: file.output_dir,
        nodes: file.network.nodes,
        network,
        initial,
        testing,
        estimator,
        control,
        control_mode,
        file_hash: fnv1a(raw.as_bytes()),
    })
}

pub fn fnv1a(bytes: &[u8]) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

impl Scenario {
    pub fn node_index(&self, label: &str) -> CliResult<usize> {
        self.nodes
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| invalid(format!("unknown node label '{label}'")))
    }

    /// Re-seeds the scenario (also rethreads the testing seed) and applies
    /// a horizon override.
    pub fn apply_overrides(&mut self, seed: Option<u64>, horizon: Option<usize>) -> CliResult<()> {
        if let Some(seed) = seed {
            self.seed = seed;
            if let Some(t) = &mut self.testing {
                t.seed = Some(seed);
            }
        }
        if let Some(h) = horizon {
            if let Some(t) = &self.testing {
                if t.t2 + 1 > h {
                    return Err(invalid(format!(
                        "horizon override {h} is too short for the testing window (needs {})",
                        t.t2 + 1
                    )));
                }
            }
            self.horizon = h;
        }
        Ok(())
    }
}
