//! Simulation, certification, estimation, and feedback eradication of
//! discrete-time SIR epidemics spreading over networks with time-varying
//! parameters.
//!
//! The crate is organised along the pipeline it supports:
//!
//! * [`model`] evolves the exact networked SIR dynamics under
//!   piecewise-constant parameter schedules and validates the standing
//!   assumptions on them;
//! * [`stability`] certifies exponential convergence to the healthy set
//!   via the spectral radius of the comparison transition matrix, with
//!   diagonal Lyapunov weights and an explicit decay-rate bound;
//! * [`testing`] generates daily confirmed/removed case data from a
//!   trajectory under a geometric reporting-delay model, exactly (in
//!   expectation) or sampled;
//! * [`estimation`] reconstructs the hidden states from that data and
//!   carries the closed-form expression for the susceptible estimation
//!   error;
//! * [`control`] closes the loop with two distributed healing-rate
//!   strategies, driven by the true or the estimated susceptible state.

pub mod control;
pub mod error;
pub mod estimation;
pub mod linalg;
pub mod model;
pub mod schedule;
pub mod stability;
pub mod testing;

pub use error::{Error, Result};
