//! Analytic and Monte Carlo models of CSMA/CA stations sharing sensed
//! TV white-space channels.
//!
//! Secondary stations sense a pool of licensed channels with an energy
//! detector and contend for the perceived-idle ones with binary exponential
//! backoff. Imperfect sensing couples the two layers: missed detections and
//! false alarms reshape how often the backoff counter freezes, which shifts
//! the collision probability and the saturation throughput of the whole
//! network. This crate models that coupling two independent ways — a
//! tri-variate Markov chain solved exactly, and a slot-level simulator —
//! and checks them against each other.
//!
//! The executable documentation lives in `examples/`:
//!
//! - `cargo run --example roc_awgn` — detector operating curves without fading
//! - `cargo run --example roc_rayleigh` — operating curves under Rayleigh fading
//! - `cargo run --example solve_point` — solve one network configuration exactly
//! - `cargo run --example simulate_point` — cross-check one configuration by simulation
//! - `cargo run --example figure_sweep` — reproduce the bundled parameter sweeps
//! - `cargo run --example validate` — run the full analytic-vs-simulation validation
//!
//! The same capabilities are scriptable through the `tvws-csma` binary
//! (`roc`, `solve`, `simulate`, `figure`, `validate` subcommands).

pub mod chain;
pub mod cli;
pub mod detection;
mod erf;
pub mod error;
pub mod metrics;
pub mod sim;
pub mod sweep;

mod stationary;

pub use error::{Error, Result};
pub use stationary::StochasticMatrix;
