//! Slot-level Monte Carlo simulator for the sensing-gated CSMA/CA network.
//!
//! The simulator shares no code with the analytic chain beyond the parameter
//! structs: stations run the actual protocol rules against sampled channel
//! occupancy and sampled detector decisions, and collisions arise from real
//! concurrent transmissions rather than a collision probability. Agreement
//! between the two routes is therefore evidence, not circularity.
//!
//! Two modelling choices differ deliberately from a literal reading of the
//! single-station chain:
//!
//! * Each station has its own channel environment (its own primary-user
//!   occupancy vector, evolving independently). Sharing one environment
//!   would correlate every station's sensing outcome within a slot, which
//!   the per-station analytic model never sees.
//! * A slot with two or more transmitters anywhere in the network is a
//!   collision, matching the single collision domain the analytic collision
//!   probability describes.

use crate::chain::{MacParams, SpectrumParams};
use crate::error::{Error, Result};
use crate::metrics::Metrics;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Slots discarded before counting starts, when the caller does not choose.
pub const DEFAULT_WARMUP: u64 = 10_000;

/// Full description of one simulation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub mac: MacParams,
    pub spectrum: SpectrumParams,
    /// Total slots stepped, including warmup.
    pub slots: u64,
    /// Leading slots excluded from every statistic.
    pub warmup_slots: u64,
    pub seed: u64,
}

impl SimConfig {
    /// A run with the default warmup, capped at a tenth of the run so short
    /// runs still measure something.
    pub fn new(mac: MacParams, spectrum: SpectrumParams, slots: u64, seed: u64) -> Self {
        SimConfig { mac, spectrum, slots, warmup_slots: DEFAULT_WARMUP.min(slots / 10), seed }
    }

    pub fn validate(&self) -> Result<()> {
        self.mac.validate()?;
        self.spectrum.validate()?;
        if self.slots == 0 {
            return Err(Error::InvalidArgument("need at least one slot".into()));
        }
        if self.warmup_slots >= self.slots {
            return Err(Error::InvalidArgument(format!(
                "warmup ({}) must leave at least one measured slot ({} total)",
                self.warmup_slots, self.slots
            )));
        }
        Ok(())
    }
}

/// Everything counted during the measured portion of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimStats {
    pub config: SimConfig,
    /// Slots that contributed to the counts below.
    pub measured_slots: u64,
    /// Station-slots with a transmission (each transmitter in a slot counts).
    pub attempts: u64,
    /// Slots carrying exactly one transmission.
    pub successes: u64,
    /// Slots carrying two or more transmissions.
    pub collision_slots: u64,
    /// Slots with no transmission at all.
    pub idle_slots: u64,
    /// Slots in which every station perceived every channel busy.
    pub busy_blocked_slots: u64,
    /// Attempts whose chosen channel was truly occupied by a primary user.
    pub pu_overlap_attempts: u64,
    pub per_station_attempts: Vec<u64>,
    /// Per channel index: station-slots in which that channel was truly
    /// occupied. Divided by `n * measured_slots` this estimates the
    /// occupancy probability.
    pub truth_busy_samples: Vec<u64>,
}

impl SimStats {
    /// Empirical per-station, per-slot transmit probability.
    pub fn estimate_tau(&self) -> f64 {
        self.attempts as f64 / (self.config.mac.n as u64 * self.measured_slots) as f64
    }

    /// Empirical probability that an attempt ends in a collision.
    pub fn estimate_pc(&self) -> Result<f64> {
        if self.attempts == 0 {
            return Err(Error::UndefinedEstimate(
                "no transmission attempts were observed".into(),
            ));
        }
        Ok((self.attempts - self.successes) as f64 / self.attempts as f64)
    }

    /// Empirical fraction of slots carrying exactly one transmission.
    pub fn estimate_throughput(&self) -> f64 {
        self.successes as f64 / self.measured_slots as f64
    }

    /// Fraction of attempts that landed on a truly occupied channel.
    pub fn pu_overlap_rate(&self) -> Option<f64> {
        if self.attempts == 0 {
            None
        } else {
            Some(self.pu_overlap_attempts as f64 / self.attempts as f64)
        }
    }

    /// Empirical per-channel primary-user occupancy.
    pub fn truth_occupancy(&self) -> Vec<f64> {
        let denom = (self.config.mac.n as u64 * self.measured_slots) as f64;
        self.truth_busy_samples.iter().map(|&b| b as f64 / denom).collect()
    }

    /// Checks the run against analytic predictions for the same
    /// configuration. Fails with a contract error if the configurations
    /// differ.
    pub fn compare(&self, analytic: &Metrics, tolerance: f64) -> Result<ComparisonReport> {
        if self.config.mac != analytic.mac || self.config.spectrum != analytic.spectrum {
            return Err(Error::Contract(format!(
                "simulation ran {:?} / {:?} but the analytic point is {:?} / {:?}",
                self.config.mac, self.config.spectrum, analytic.mac, analytic.spectrum
            )));
        }
        let slot_count = self.measured_slots as f64;
        let station_slots = self.config.mac.n as f64 * slot_count;

        let tau_hat = self.estimate_tau();
        let mut metrics = vec![MetricComparison::new(
            "tau",
            analytic.tau,
            tau_hat,
            binomial_se(tau_hat, station_slots),
            tolerance,
        )];

        if self.attempts == 0 && analytic.tau == 0.0 {
            // Nothing ever transmits in either route: the collision
            // probability is vacuous, and both routes agree on that.
            metrics.push(MetricComparison::new("p_c", analytic.p_c, analytic.p_c, 0.0, tolerance));
        } else {
            let pc_hat = self.estimate_pc()?;
            metrics.push(MetricComparison::new(
                "p_c",
                analytic.p_c,
                pc_hat,
                binomial_se(pc_hat, self.attempts as f64),
                tolerance,
            ));
        }

        let s_hat = self.estimate_throughput();
        metrics.push(MetricComparison::new(
            "success_rate",
            analytic.p_tr,
            s_hat,
            binomial_se(s_hat, slot_count),
            tolerance,
        ));

        let all_within_tolerance = metrics.iter().all(|m| m.within_tolerance);
        Ok(ComparisonReport { tolerance, metrics, all_within_tolerance })
    }
}

/// One analytic-versus-simulated figure.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricComparison {
    pub name: String,
    pub analytic: f64,
    pub simulated: f64,
    pub abs_diff: f64,
    /// Binomial standard error of the simulated estimate, for judging
    /// whether a miss is noise or structure.
    pub std_error: f64,
    pub within_tolerance: bool,
}

impl MetricComparison {
    fn new(name: &str, analytic: f64, simulated: f64, std_error: f64, tolerance: f64) -> Self {
        let abs_diff = (analytic - simulated).abs();
        MetricComparison {
            name: name.to_string(),
            analytic,
            simulated,
            abs_diff,
            std_error,
            within_tolerance: abs_diff <= tolerance,
        }
    }
}

/// Result of [`SimStats::compare`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub tolerance: f64,
    pub metrics: Vec<MetricComparison>,
    pub all_within_tolerance: bool,
}

fn binomial_se(p_hat: f64, trials: f64) -> f64 {
    if trials <= 0.0 {
        return 0.0;
    }
    (p_hat.clamp(0.0, 1.0) * (1.0 - p_hat.clamp(0.0, 1.0)) / trials).sqrt()
}

struct Station {
    stage: u32,
    counter: u64,
    /// True occupancy of each channel in this station's surroundings.
    truth: Vec<bool>,
}

/// Runs the slot simulation described by `config`.
///
/// Each slot proceeds as the protocol does: every station's environment
/// re-samples the occupancy of one uniformly chosen channel, every station
/// senses all channels with fresh detector noise, stations with a busy view
/// freeze, stations with an idle view count down or transmit, and a slot
/// with a single transmitter network-wide is a success. Backoff windows are
/// re-drawn only after the slot's outcome is known.
///
/// The same seed always produces the identical [`SimStats`].
pub fn simulate(config: &SimConfig) -> Result<SimStats> {
    config.validate()?;
    let mac = config.mac;
    let spectrum = config.spectrum;
    let n = mac.n as usize;
    let c = spectrum.c as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut stations: Vec<Station> = (0..n)
        .map(|_| Station {
            stage: 0,
            counter: rng.random_range(0..mac.window(0)),
            truth: (0..c).map(|_| rng.random::<f64>() < spectrum.alpha).collect(),
        })
        .collect();

    let measured_slots = config.slots - config.warmup_slots;
    let mut attempts = 0u64;
    let mut successes = 0u64;
    let mut collision_slots = 0u64;
    let mut idle_slots = 0u64;
    let mut busy_blocked_slots = 0u64;
    let mut pu_overlap_attempts = 0u64;
    let mut per_station_attempts = vec![0u64; n];
    let mut truth_busy_samples = vec![0u64; c];

    let mut transmitters: Vec<usize> = Vec::with_capacity(n);
    let mut overlap_flags: Vec<bool> = Vec::with_capacity(n);
    let mut idle_channels: Vec<usize> = Vec::with_capacity(c);

    for slot in 0..config.slots {
        let measuring = slot >= config.warmup_slots;

        // The primary users move first: one channel per station re-samples.
        for station in &mut stations {
            let ch = rng.random_range(0..c);
            station.truth[ch] = rng.random::<f64>() < spectrum.alpha;
        }

        // Sensing and the MAC reaction it gates.
        transmitters.clear();
        overlap_flags.clear();
        let mut blocked = 0usize;
        for (idx, station) in stations.iter_mut().enumerate() {
            idle_channels.clear();
            for (ch, &busy) in station.truth.iter().enumerate() {
                let perceived_busy = if busy {
                    rng.random::<f64>() < spectrum.p_d
                } else {
                    rng.random::<f64>() < spectrum.p_f
                };
                if !perceived_busy {
                    idle_channels.push(ch);
                }
                if measuring && busy {
                    truth_busy_samples[ch] += 1;
                }
            }
            if idle_channels.is_empty() {
                blocked += 1;
                continue;
            }
            if station.counter > 0 {
                station.counter -= 1;
            } else {
                let pick = idle_channels[rng.random_range(0..idle_channels.len())];
                transmitters.push(idx);
                overlap_flags.push(station.truth[pick]);
            }
        }

        // Outcome: exactly one transmitter in the network succeeds.
        let success = transmitters.len() == 1;
        if measuring {
            attempts += transmitters.len() as u64;
            for (&idx, &overlap) in transmitters.iter().zip(&overlap_flags) {
                per_station_attempts[idx] += 1;
                if overlap {
                    pu_overlap_attempts += 1;
                }
            }
            match transmitters.len() {
                0 => idle_slots += 1,
                1 => successes += 1,
                _ => collision_slots += 1,
            }
            if blocked == n {
                busy_blocked_slots += 1;
            }
        }

        // Only now do the transmitters learn their fate and re-draw.
        for &idx in &transmitters {
            let station = &mut stations[idx];
            station.stage = if success { 0 } else { (station.stage + 1).min(mac.m) };
            station.counter = rng.random_range(0..mac.window(station.stage));
        }
    }

    Ok(SimStats {
        config: config.clone(),
        measured_slots,
        attempts,
        successes,
        collision_slots,
        idle_slots,
        busy_blocked_slots,
        pu_overlap_attempts,
        per_station_attempts,
        truth_busy_samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::solve_fixed_point;
    use crate::metrics::{compute, ThroughputMode};

    fn base_spectrum() -> SpectrumParams {
        SpectrumParams::new(1, 0.5, 0.9, 0.016)
    }

    #[test]
    fn config_validation_rejects_nonsense() {
        let good = SimConfig::new(MacParams::new(2, 3, 32), base_spectrum(), 1000, 7);
        assert!(good.validate().is_ok());

        let mut zero_slots = good.clone();
        zero_slots.slots = 0;
        assert!(zero_slots.validate().is_err());

        let mut all_warmup = good.clone();
        all_warmup.warmup_slots = all_warmup.slots;
        assert!(all_warmup.validate().is_err());

        let mut bad_alpha = good;
        bad_alpha.spectrum.alpha = 1.5;
        assert!(bad_alpha.validate().is_err());
    }

    #[test]
    fn short_runs_scale_the_default_warmup() {
        let config = SimConfig::new(MacParams::new(2, 3, 32), base_spectrum(), 200, 7);
        assert_eq!(config.warmup_slots, 20);
        let long = SimConfig::new(MacParams::new(2, 3, 32), base_spectrum(), 10_000_000, 7);
        assert_eq!(long.warmup_slots, DEFAULT_WARMUP);
    }

    #[test]
    fn single_station_never_collides() {
        let config = SimConfig::new(MacParams::new(1, 3, 32), base_spectrum(), 200_000, 11);
        let stats = simulate(&config).unwrap();
        assert_eq!(stats.collision_slots, 0);
        assert_eq!(stats.successes, stats.attempts);
        assert_eq!(stats.estimate_pc().unwrap(), 0.0);
        assert!(stats.attempts > 0);
        assert_eq!(stats.per_station_attempts.len(), 1);
        assert_eq!(stats.per_station_attempts[0], stats.attempts);
    }

    #[test]
    fn perfectly_sensed_saturated_channel_blocks_everyone() {
        let spectrum = SpectrumParams::new(1, 1.0, 1.0, 0.0);
        let config = SimConfig::new(MacParams::new(3, 3, 16), spectrum, 50_000, 3);
        let stats = simulate(&config).unwrap();
        assert_eq!(stats.attempts, 0);
        assert_eq!(stats.busy_blocked_slots, stats.measured_slots);
        assert_eq!(stats.idle_slots, stats.measured_slots);
        assert!(stats.estimate_pc().is_err());
        assert_eq!(stats.pu_overlap_rate(), None);
    }

    #[test]
    fn identical_seeds_reproduce_identical_statistics() {
        let config =
            SimConfig::new(MacParams::new(5, 3, 32), SpectrumParams::new(3, 0.4, 0.8, 0.05), 60_000, 99);
        let a = simulate(&config).unwrap();
        let b = simulate(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_agree_within_sampling_noise() {
        let mac = MacParams::new(6, 3, 32);
        let spectrum = base_spectrum();
        let mut config = SimConfig::new(mac, spectrum, 400_000, 1);
        let a = simulate(&config).unwrap();
        config.seed = 2;
        let b = simulate(&config).unwrap();
        assert_ne!(a, b);

        let pa = a.estimate_pc().unwrap();
        let pb = b.estimate_pc().unwrap();
        let se = (binomial_se(pa, a.attempts as f64).powi(2)
            + binomial_se(pb, b.attempts as f64).powi(2))
        .sqrt();
        assert!(
            (pa - pb).abs() <= 3.0 * se.max(1e-4),
            "pc estimates {pa} and {pb} differ by more than 3 standard errors"
        );
    }

    #[test]
    fn lone_station_throughput_matches_transmit_probability() {
        let mac = MacParams::new(1, 3, 32);
        let spectrum = base_spectrum();
        let fp = solve_fixed_point(&mac, &spectrum).unwrap();
        let config = SimConfig::new(mac, spectrum, 400_000, 17);
        let stats = simulate(&config).unwrap();
        // With one station every attempt succeeds, so the success rate per
        // slot estimates tau directly.
        assert!((stats.estimate_throughput() - fp.tau).abs() < 0.01);
        assert!((stats.estimate_tau() - fp.tau).abs() < 0.01);
    }

    #[test]
    fn sampled_channel_occupancy_tracks_alpha() {
        let mac = MacParams::new(3, 2, 8);
        let spectrum = SpectrumParams::new(3, 0.3, 0.9, 0.1);
        let config = SimConfig::new(mac, spectrum, 300_000, 23);
        let stats = simulate(&config).unwrap();
        for (ch, occupancy) in stats.truth_occupancy().iter().enumerate() {
            assert!(
                (occupancy - spectrum.alpha).abs() < 0.01,
                "channel {ch}: occupancy {occupancy} vs alpha {}",
                spectrum.alpha
            );
        }
    }

    #[test]
    fn simulation_matches_analytic_collision_probability() {
        let mac = MacParams::new(10, 3, 32);
        let spectrum = base_spectrum();
        let fp = solve_fixed_point(&mac, &spectrum).unwrap();
        let analytic = compute(&fp, ThroughputMode::default()).unwrap();
        let config = SimConfig::new(mac, spectrum, 1_000_000, 42);
        let stats = simulate(&config).unwrap();
        let report = stats.compare(&analytic, 0.02).unwrap();
        assert!(
            report.all_within_tolerance,
            "analytic vs simulated disagreement: {report:?}"
        );
    }

    #[test]
    fn compare_rejects_mismatched_configurations() {
        let mac = MacParams::new(4, 3, 32);
        let spectrum = base_spectrum();
        let fp = solve_fixed_point(&mac, &spectrum).unwrap();
        let analytic = compute(&fp, ThroughputMode::default()).unwrap();
        let other = SimConfig::new(MacParams::new(5, 3, 32), spectrum, 20_000, 8);
        let stats = simulate(&other).unwrap();
        assert!(matches!(stats.compare(&analytic, 0.02), Err(Error::Contract(_))));
    }

    #[test]
    fn blocked_network_compares_cleanly_against_degenerate_analytic_point() {
        let mac = MacParams::new(3, 3, 16);
        let spectrum = SpectrumParams::new(1, 1.0, 1.0, 0.0);
        let fp = solve_fixed_point(&mac, &spectrum).unwrap();
        let analytic = compute(&fp, ThroughputMode::default()).unwrap();
        let config = SimConfig::new(mac, spectrum, 30_000, 5);
        let stats = simulate(&config).unwrap();
        let report = stats.compare(&analytic, 0.02).unwrap();
        assert!(report.all_within_tolerance);
    }
}
