//! Network-level performance measures derived from a solved chain.
//!
//! Everything downstream of the stationary distribution is closed-form:
//! the per-slot transmit probability of one station, the collision
//! probability it faces from the other `n - 1`, the per-slot event split
//! (successful transmission / idle / collision), and the normalized
//! saturation throughput.

use crate::chain::{ChainSolution, FixedPoint, MacParams, SpectrumParams, StateSpace};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// How normalized throughput is computed from the event probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ThroughputMode {
    /// Probability that a slot carries exactly one transmission — the form
    /// the result sweeps use.
    SuccessProbability,
    /// Success time weighted against all slot classes,
    /// `rho * P_tr / (rho * P_tr + P_fr + P_coll)`, with `rho` acting as a
    /// unitless weight on successful slots.
    WeightedUtilization {
        rho: f64,
    },
}

impl Default for ThroughputMode {
    fn default() -> Self {
        ThroughputMode::SuccessProbability
    }
}

/// The full set of analytic measures at one operating point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub mac: MacParams,
    pub spectrum: SpectrumParams,
    /// Per-slot transmit probability of one station.
    pub tau: f64,
    /// Conditional collision probability at the converged operating point.
    pub p_c: f64,
    /// Collision probability computed without feedback (single pass from
    /// a collision-free chain).
    pub p_c_one_shot: f64,
    /// Probability a slot carries exactly one transmission.
    pub p_tr: f64,
    /// Probability a slot carries no transmission.
    pub p_fr: f64,
    /// Probability a slot carries an intra-network collision.
    pub p_coll_slot: f64,
    /// Normalized throughput under `mode`.
    pub throughput: f64,
    pub mode: ThroughputMode,
}

/// Per-slot transmit probability: mass on a zero counter joined with at
/// least one idle-looking channel.
pub fn transmission_prob(pi: &[f64], space: &StateSpace) -> f64 {
    let mut tau = 0.0;
    for i in 0..=space.max_stage() {
        for s in 0..space.channels() {
            tau += pi[space.index(i, 0, s)];
        }
    }
    tau
}

/// The factored counterpart: marginal zero-counter mass times marginal
/// idle-view mass. Agrees with [`transmission_prob`] within `1e-9` on any
/// solved chain; computing both keeps that independence claim a tested
/// fact instead of an assumption.
pub fn transmission_prob_factored(pi: &[f64], space: &StateSpace) -> f64 {
    let mut zero_counter = 0.0;
    for i in 0..=space.max_stage() {
        for s in 0..=space.channels() {
            zero_counter += pi[space.index(i, 0, s)];
        }
    }
    let mut all_busy = 0.0;
    for i in 0..=space.max_stage() {
        for k in 0..space.stage_window(i) {
            all_busy += pi[space.index(i, k, space.channels())];
        }
    }
    zero_counter * (1.0 - all_busy)
}

/// Probability that a station transmitting into a slot collides: at least
/// one of the other `n - 1` stations transmits too.
///
/// Callers guarantee `tau` in `[0, 1]` and `n >= 1`; a single station
/// never collides.
pub fn collision_prob(tau: f64, n: u32) -> f64 {
    debug_assert!((0.0..=1.0).contains(&tau));
    debug_assert!(n >= 1);
    1.0 - (1.0 - tau).powi(n as i32 - 1)
}

/// Per-slot event split for `n` stations each transmitting with
/// probability `tau`: exactly one transmission, none at all, or a
/// collision. The three sum to one by construction.
pub fn event_probs(tau: f64, n: u32) -> (f64, f64, f64) {
    debug_assert!((0.0..=1.0).contains(&tau));
    debug_assert!(n >= 1);
    let p_tr = n as f64 * tau * (1.0 - tau).powi(n as i32 - 1);
    let p_fr = (1.0 - tau).powi(n as i32);
    let p_coll = (1.0 - p_tr - p_fr).max(0.0);
    (p_tr, p_fr, p_coll)
}

/// Normalized throughput at the given operating point.
pub fn throughput(tau: f64, n: u32, mode: ThroughputMode) -> Result<f64> {
    let (p_tr, p_fr, p_coll) = event_probs(tau, n);
    match mode {
        ThroughputMode::SuccessProbability => Ok(p_tr),
        ThroughputMode::WeightedUtilization { rho } => {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(Error::Domain(format!(
                    "weighted throughput needs a positive weight, got rho = {rho}"
                )));
            }
            let weighted = rho * p_tr;
            Ok(weighted / (weighted + p_fr + p_coll))
        }
    }
}

/// Assembles the full metric set from a solved fixed point.
pub fn compute(fp: &FixedPoint, mode: ThroughputMode) -> Result<Metrics> {
    let n = fp.solution.mac.n;
    let (p_tr, p_fr, p_coll_slot) = event_probs(fp.tau, n);
    Ok(Metrics {
        mac: fp.solution.mac,
        spectrum: fp.solution.spectrum,
        tau: fp.tau,
        p_c: fp.p_c,
        p_c_one_shot: fp.p_c_one_shot,
        p_tr,
        p_fr,
        p_coll_slot,
        throughput: throughput(fp.tau, n, mode)?,
        mode,
    })
}

/// Convenience: both transmit-probability routes evaluated on a solution,
/// returned as (joint, factored).
pub fn both_transmission_probs(solution: &ChainSolution) -> (f64, f64) {
    (
        transmission_prob(solution.stationary(), solution.state_space()),
        transmission_prob_factored(solution.stationary(), solution.state_space()),
    )
}
