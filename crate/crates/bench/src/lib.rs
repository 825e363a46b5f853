//! Shared fixtures for the criterion benchmarks.

use netsir_core::control::{ControlConfig, ControlMode};
use netsir_core::estimation::EstimatorConfig;
use netsir_core::linalg::Matrix;
use netsir_core::model::{EpidemicNetwork, EpidemicState};
use netsir_core::testing::TestingParams;

pub fn five_city_network() -> EpidemicNetwork {
    EpidemicNetwork::constant(
        vec![500_000, 160_000, 900_000, 350_000, 300_000],
        Matrix::from_rows(&[
            vec![0.08, 0.15, 0.24, 0.00, 0.06],
            vec![0.15, 0.12, 0.13, 0.00, 0.00],
            vec![0.24, 0.13, 0.25, 0.05, 0.04],
            vec![0.00, 0.00, 0.05, 0.11, 0.15],
            vec![0.06, 0.00, 0.04, 0.15, 0.09],
        ])
        .unwrap(),
        vec![0.075, 0.115, 0.085, 0.125, 0.1],
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

pub fn expectation_testing(horizon: usize) -> TestingParams {
    TestingParams::expectation(vec![0.2; 5], 6, horizon - 1)
}

pub fn sampled_testing(horizon: usize, seed: u64) -> TestingParams {
    TestingParams::sampled(vec![0.2; 5], 6, horizon - 1, seed)
}

pub fn estimator(horizon: usize) -> EstimatorConfig {
    EstimatorConfig::from_s0(vec![1.0; 5], vec![0.2; 5], 6, horizon - 1)
}

pub fn true_state_control(horizon: usize) -> ControlConfig {
    ControlConfig {
        epsilon: vec![0.05; 5],
        mode: ControlMode::TrueState,
        active_window: (0, horizon),
        estimator: None,
        offline_estimation: false,
    }
}

pub fn estimated_state_control(horizon: usize) -> ControlConfig {
    ControlConfig {
        epsilon: vec![0.05; 5],
        mode: ControlMode::EstimatedState,
        active_window: (0, horizon),
        estimator: Some(estimator(horizon)),
        offline_estimation: false,
    }
}
