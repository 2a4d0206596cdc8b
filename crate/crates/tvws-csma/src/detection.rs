//! Energy-detection sensing characteristics.
//!
//! A secondary station decides whether a channel is occupied by comparing the
//! collected signal energy against a threshold `eta`. This module evaluates
//! the resulting detection / false-alarm probabilities for AWGN and Rayleigh
//! channels, all built on the Gaussian tail function [`q_function`].
//!
//! ```
//! use tvws_csma::detection::{SensingParams, pd_awgn, pf_awgn};
//!
//! // -15 dB SNR, 2 ms sensing slots over a 6 MHz TV channel
//! let params = SensingParams::new(10f64.powf(-1.5), 2e-3, 6e6);
//! let eta = 1.02; // slightly above the noise floor
//! let pd = pd_awgn(&params, eta).unwrap();
//! let pf = pf_awgn(&params, eta).unwrap();
//! assert!(pd > pf);
//! ```

use crate::erf::erfc;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;

/// Channel model assumed between the primary transmitter and the sensing
/// station.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FadingModel {
    /// Pure additive white Gaussian noise, no fading.
    Awgn,
    /// Rayleigh-faded signal amplitude (exponentially distributed SNR).
    Rayleigh,
}

/// Physical-layer sensing configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensingParams {
    /// Received primary-user SNR, linear scale (convert from dB at the edge).
    pub snr: f64,
    /// Sensing duration per slot in seconds.
    pub tau_s: f64,
    /// Sampled bandwidth in Hz.
    pub f_s: f64,
    /// Noise power `sigma_n^2`; the energy threshold is expressed in the
    /// same unit.
    pub noise_power: f64,
    /// Channel model used by the detection-probability routines.
    pub fading: FadingModel,
    /// Per-dimension signal variance of the Rayleigh model.
    pub sigma2: f64,
    /// Chi-square scaling constant of the Rayleigh model (2 for the
    /// conventional energy detector).
    pub beta: f64,
}

impl SensingParams {
    /// AWGN parameters with unit noise power.
    pub fn new(snr: f64, tau_s: f64, f_s: f64) -> Self {
        SensingParams {
            snr,
            tau_s,
            f_s,
            noise_power: 1.0,
            fading: FadingModel::Awgn,
            sigma2: 1.0,
            beta: 2.0,
        }
    }

    /// Rayleigh parameters with an explicit sample count `n` (the
    /// time-bandwidth product is `n` by construction).
    pub fn rayleigh(avg_snr: f64, n: u32) -> Self {
        SensingParams {
            snr: avg_snr,
            tau_s: n as f64 * 1e-6,
            f_s: 1e6,
            noise_power: 1.0,
            fading: FadingModel::Rayleigh,
            sigma2: 1.0,
            beta: 2.0,
        }
    }

    /// Time-bandwidth product `tau_s * f_s`.
    pub fn time_bandwidth(&self) -> f64 {
        self.tau_s * self.f_s
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            (self.snr > 0.0, "snr must be positive (linear scale)"),
            (self.tau_s > 0.0, "tau_s must be positive"),
            (self.f_s > 0.0, "f_s must be positive"),
            (self.noise_power > 0.0, "noise_power must be positive"),
            (self.sigma2 > 0.0, "sigma2 must be positive"),
            (self.beta > 0.0, "beta must be positive"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::InvalidArgument(msg.into()));
            }
        }
        if !(self.snr.is_finite() && self.tau_s.is_finite() && self.f_s.is_finite()) {
            return Err(Error::InvalidArgument("sensing parameters must be finite".into()));
        }
        Ok(())
    }
}

/// One point of a receiver operating characteristic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionPoint {
    /// Energy threshold producing this point.
    pub eta: f64,
    /// False-alarm probability.
    pub p_f: f64,
    /// Detection probability.
    pub p_d: f64,
    /// Missed-detection probability `1 - p_d`.
    pub p_md: f64,
}

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
///
/// Evaluated as `erfc(x / sqrt(2)) / 2`, accurate to better than `1e-13`
/// relative over the representable range. `Q(-x) = 1 - Q(x)` holds exactly
/// because both values come from the same `erfc` branch.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

// Rational approximation of the standard normal quantile (Acklam's
// coefficients), refined by one Newton step below.
fn norm_quantile_approx(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p < P_LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    }
}

/// Inverse of [`q_function`] on the open interval `(0, 1)`.
///
/// A rational approximation seeds one Newton refinement against
/// [`q_function`] itself, giving round-trip agreement near machine
/// precision away from the interval ends.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("q_inverse requires 0 < p < 1, got {p}")));
    }
    // Q^{-1}(p) = -Phi^{-1}(p)
    let x = -norm_quantile_approx(p);
    let pdf = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    if pdf > 0.0 {
        Ok(x + (q_function(x) - p) / pdf)
    } else {
        Ok(x)
    }
}

/// Detection probability of the energy detector over an AWGN channel.
///
/// `Q((eta / sigma_n^2 - snr - 1) * sqrt(tb / (2 snr + 1)))` with
/// `tb = tau_s * f_s`.
pub fn pd_awgn(params: &SensingParams, eta: f64) -> Result<f64> {
    params.validate()?;
    check_threshold(eta)?;
    let tb = params.time_bandwidth();
    let g = params.snr;
    let arg = (eta / params.noise_power - g - 1.0) * (tb / (2.0 * g + 1.0)).sqrt();
    Ok(q_function(arg))
}

/// False-alarm probability of the energy detector (no signal present, so
/// fading does not enter): `Q((eta / sigma_n^2 - 1) * sqrt(tb))`.
pub fn pf_awgn(params: &SensingParams, eta: f64) -> Result<f64> {
    params.validate()?;
    check_threshold(eta)?;
    let arg = (eta / params.noise_power - 1.0) * params.time_bandwidth().sqrt();
    Ok(q_function(arg))
}

/// False-alarm probability at the threshold that achieves detection
/// probability `p_d`, with the threshold itself eliminated:
///
/// `P_f = Q(sqrt(2 snr + 1) * Q^{-1}(p_d) + sqrt(tb) * snr)`
///
/// This is the AWGN operating identity tying the two error probabilities
/// together; it agrees with composing [`pd_awgn`] and [`pf_awgn`] through
/// the shared threshold.
pub fn pf_from_pd(p_d: f64, snr: f64, time_bandwidth: f64) -> Result<f64> {
    if !(p_d > 0.0 && p_d < 1.0) {
        return Err(Error::Domain(format!("pf_from_pd requires 0 < p_d < 1, got {p_d}")));
    }
    if !(snr > 0.0) {
        return Err(Error::InvalidArgument("snr must be positive (linear scale)".into()));
    }
    if !(time_bandwidth > 0.0) {
        return Err(Error::InvalidArgument("time_bandwidth must be positive".into()));
    }
    let arg = (2.0 * snr + 1.0).sqrt() * q_inverse(p_d)? + time_bandwidth.sqrt() * snr;
    Ok(q_function(arg))
}

/// Detection probability over a Rayleigh channel, averaging the chi-square
/// detection statistic over the exponentially distributed instantaneous SNR.
///
/// Requires an even sample count `N = tau_s * f_s >= 4`; the two finite sums
/// run through `N/2 - 2`. Results that fall outside `[0, 1]` by more than
/// `1e-12` (the formula is a difference of near-equal terms at extreme
/// thresholds) are rejected as numerically unstable rather than clamped.
pub fn pd_rayleigh(params: &SensingParams, eta: f64) -> Result<f64> {
    params.validate()?;
    check_threshold(eta)?;
    let n = even_sample_count(params)?;
    let u = (n / 2) as usize;

    let x1 = eta / (2.0 * params.sigma2);
    let a = params.beta * params.snr;
    let den = 2.0 * params.sigma2 + a;
    let z2 = eta * a / (2.0 * params.sigma2 * den);

    // Partial sums sum_{i=0}^{u-2} z^i / i!, carried with the e^{-x1}
    // prefactor folded in so large thresholds do not overflow the terms.
    let prefactor = (-x1).exp();
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut t1 = prefactor;
    let mut t2 = prefactor;
    for i in 0..=(u - 2) {
        s1 += t1;
        s2 += t2;
        let next = (i + 1) as f64;
        t1 *= x1 / next;
        t2 *= z2 / next;
    }

    let factor = (den / a).powi(u as i32 - 1);
    let bracket = (-eta / den).exp() - s2;
    let total = s1 + factor * bracket;

    if !total.is_finite() {
        return Err(Error::NumericalInstability(format!(
            "Rayleigh detection probability overflowed at eta = {eta}, N = {n}"
        )));
    }
    if !(-1e-12..=1.0 + 1e-12).contains(&total) {
        return Err(Error::NumericalInstability(format!(
            "Rayleigh detection probability evaluated to {total} at eta = {eta}, N = {n}; \
             the finite-sum form has cancelled too many digits"
        )));
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Number of detector samples `N = tau_s * f_s`, validated to be an even
/// integer of at least 4: the finite-sample forms need a chi-square shape
/// parameter `u = N/2 >= 2`.
fn even_sample_count(params: &SensingParams) -> Result<u64> {
    let tb = params.time_bandwidth();
    let n = tb.round();
    if (tb - n).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::UnsupportedConfiguration(format!(
            "finite-sample evaluation needs an integer sample count, got tau_s * f_s = {tb}"
        )));
    }
    let n = n as u64;
    if n < 4 || n % 2 != 0 {
        return Err(Error::UnsupportedConfiguration(format!(
            "finite-sample evaluation needs an even sample count of at least 4, got {n}"
        )));
    }
    Ok(n)
}

/// False-alarm probability of the finite-sample energy detector: the
/// chi-square upper tail `Γ(N/2, η / (2 σ²)) / Γ(N/2)`, evaluated as the
/// equivalent Poisson partial sum.
///
/// This is the exact companion of [`pd_rayleigh`], which thresholds the
/// same chi-square statistic; [`pf_awgn`] is the large-sample Gaussian
/// limit of this quantity under a different (per-sample) threshold
/// normalization, so the two are not interchangeable point by point.
pub fn pf_chi_square(params: &SensingParams, eta: f64) -> Result<f64> {
    params.validate()?;
    check_threshold(eta)?;
    let u = (even_sample_count(params)? / 2) as usize;
    let x = eta / (2.0 * params.sigma2);
    // e^{-x} * sum_{k=0}^{u-1} x^k / k!, the survival function of a
    // chi-square with 2u degrees of freedom at 2x
    let mut term = (-x).exp();
    let mut sum = 0.0;
    for k in 0..u {
        sum += term;
        term *= x / (k + 1) as f64;
    }
    Ok(sum.min(1.0))
}

/// Both error probabilities of the detector at one threshold, paired under
/// the convention the fading model calls for: the Gaussian large-sample
/// forms for AWGN, the exact finite-sample chi-square forms for Rayleigh.
pub fn detection_point(params: &SensingParams, eta: f64) -> Result<DetectionPoint> {
    let (p_f, p_d) = match params.fading {
        FadingModel::Awgn => (pf_awgn(params, eta)?, pd_awgn(params, eta)?),
        FadingModel::Rayleigh => (pf_chi_square(params, eta)?, pd_rayleigh(params, eta)?),
    };
    Ok(DetectionPoint { eta, p_f, p_d, p_md: 1.0 - p_d })
}

/// Receiver operating characteristic over a uniform threshold grid.
///
/// Points come back in ascending threshold order, which is descending
/// false-alarm order. A single-point grid (`count == 1`) evaluates at
/// `eta_min` alone.
pub fn roc_curve(
    params: &SensingParams,
    eta_min: f64,
    eta_max: f64,
    count: usize,
) -> Result<Vec<DetectionPoint>> {
    params.validate()?;
    if count == 0 {
        return Err(Error::InvalidArgument("roc_curve needs at least one grid point".into()));
    }
    check_threshold(eta_min)?;
    if count >= 2 && !(eta_max > eta_min) {
        return Err(Error::InvalidArgument(format!(
            "roc_curve needs eta_max > eta_min, got [{eta_min}, {eta_max}]"
        )));
    }
    let mut points = Vec::with_capacity(count);
    for idx in 0..count {
        let eta = if count == 1 {
            eta_min
        } else {
            eta_min + (eta_max - eta_min) * idx as f64 / (count - 1) as f64
        };
        points.push(detection_point(params, eta)?);
    }
    Ok(points)
}

fn check_threshold(eta: f64) -> Result<()> {
    if eta.is_finite() && eta >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("energy threshold must be finite and >= 0, got {eta}")))
    }
}

/// Converts a dB quantity to linear scale. Lives here so every caller uses
/// the same convention: dB values appear only at configuration boundaries.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    // reference values computed with mpmath at 50 decimal digits
    const QINV_01: f64 = 1.281551565544600467;

    fn reference_params() -> SensingParams {
        SensingParams::new(db_to_linear(-15.0), 2e-3, 6e6)
    }

    #[test]
    fn q_function_reference_values() {
        assert_eq!(q_function(0.0), 0.5);
        let cases = [
            (1.2816, 0.099991500097675166),
            (2.1909, 0.014229514874398062),
            (QINV_01, 0.1),
            (-1.0, 0.84134474606854293),
            (3.0, 1.3498980316300946e-3),
            (6.0, 9.8658764503769814e-10),
        ];
        for (x, want) in cases {
            let got = q_function(x);
            assert!(
                ((got - want) / want).abs() < 1e-12,
                "Q({x}) = {got:e}, want {want:e}"
            );
        }
    }

    #[test]
    fn q_function_spec_anchor() {
        assert!((q_function(1.2816) - 0.1000).abs() < 1e-4);
    }

    #[test]
    fn q_function_symmetry_and_monotonicity() {
        let mut x = -30.0;
        let mut prev = q_function(x);
        while x <= 30.0 {
            assert!((q_function(x) + q_function(-x) - 1.0).abs() < 1e-12, "symmetry at {x}");
            let q = q_function(x);
            assert!(q <= prev + 1e-15, "not nonincreasing at {x}");
            assert!((0.0..=1.0).contains(&q));
            prev = q;
            x += 0.094;
        }
    }

    #[test]
    fn q_inverse_reference_and_round_trip() {
        assert!((q_inverse(0.1).unwrap() - QINV_01).abs() < 1e-12);
        assert_eq!(q_inverse(0.5).unwrap(), 0.0);
        let mut p = 1e-10;
        while p < 1.0 {
            let x = q_inverse(p).unwrap();
            let back = q_function(x);
            assert!(
                ((back - p) / p).abs() < 1e-10,
                "round trip failed at p = {p:e}: got {back:e}"
            );
            p *= 1.7;
        }
        for p in [0.9, 0.99, 0.999999, 1.0 - 1e-10] {
            let back = q_function(q_inverse(p).unwrap());
            assert!(((back - p) / p).abs() < 1e-10, "upper round trip at {p}");
        }
    }

    #[test]
    fn q_inverse_rejects_closed_interval() {
        for p in [0.0, 1.0, -0.5, 2.0, f64::NAN] {
            assert!(matches!(q_inverse(p), Err(Error::Domain(_))), "p = {p}");
        }
    }

    #[test]
    fn pd_awgn_hits_frozen_operating_point() {
        // eta chosen (high-precision, offline) so that P_d = 0.9 exactly
        let eta = 1.0195595843293102826;
        let got = pd_awgn(&reference_params(), eta).unwrap();
        assert!((got - 0.9).abs() < 1e-12, "got {got}");
    }

    #[test]
    fn pf_awgn_frozen_value() {
        let got = pf_awgn(&reference_params(), 1.02).unwrap();
        assert!((got - 0.014229868458155289).abs() < 1e-14, "got {got}");
        assert!((got - 0.0142).abs() < 1e-3); // coarse anchor
    }

    #[test]
    fn pf_from_pd_frozen_value() {
        let got = pf_from_pd(0.9, db_to_linear(-15.0), 12000.0).unwrap();
        assert!((got - 0.016070802986421799).abs() < 1e-14, "got {got}");
        assert!((got - 0.0161).abs() < 5e-4); // coarse anchor
    }

    #[test]
    fn pf_from_pd_matches_threshold_elimination() {
        // composing pd_awgn -> pf_from_pd must reproduce pf_awgn at the same
        // threshold, since the identity is the threshold eliminated exactly
        let params = reference_params();
        let mut eta = 0.99;
        while eta <= 1.05 {
            let p_d = pd_awgn(&params, eta).unwrap();
            if p_d > 1e-12 && p_d < 1.0 - 1e-12 {
                let via_identity = pf_from_pd(p_d, params.snr, params.time_bandwidth()).unwrap();
                let direct = pf_awgn(&params, eta).unwrap();
                assert!(
                    (via_identity - direct).abs() <= 1e-9,
                    "identity broke at eta = {eta}: {via_identity} vs {direct}"
                );
            }
            eta += 0.001;
        }
    }

    #[test]
    fn pf_from_pd_rejects_degenerate_pd() {
        assert!(pf_from_pd(0.0, 0.1, 100.0).is_err());
        assert!(pf_from_pd(1.0, 0.1, 100.0).is_err());
        assert!(pf_from_pd(0.5, -0.1, 100.0).is_err());
    }

    #[test]
    fn pd_rayleigh_frozen_table() {
        // mpmath evaluation of the same finite-sum expression, 50 digits
        let cases: [(u32, f64, f64, f64); 8] = [
            (6, 10.0, 2.0, 0.99080923993839031),
            (6, 10.0, 10.0, 0.76324712454839036),
            (6, 10.0, 30.0, 0.30943176040188369),
            (6, 10.0, 60.0, 0.079130857907830450),
            (10, 10.0, 10.0, 0.88331470703067724),
            (10, 10.0, 30.0, 0.37438696830663230),
            (10, 100.0, 10.0, 0.98595223272365161),
            (10, 100.0, 60.0, 0.77319161243659583),
        ];
        for (n, gbar, eta, want) in cases {
            let params = SensingParams::rayleigh(gbar, n);
            let got = pd_rayleigh(&params, eta).unwrap();
            assert!(
                ((got - want) / want).abs() < 1e-12,
                "pd_rayleigh(N={n}, snr={gbar}, eta={eta}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn pd_rayleigh_zero_threshold_is_certain_detection() {
        let params = SensingParams::rayleigh(10.0, 10);
        assert_eq!(pd_rayleigh(&params, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn pd_rayleigh_monotone_in_threshold() {
        let params = SensingParams::rayleigh(10.0, 10);
        let mut prev = 1.0;
        for i in 0..200 {
            let eta = i as f64 * 0.5;
            let p = pd_rayleigh(&params, eta).unwrap();
            assert!(p <= prev + 1e-12, "increased at eta = {eta}");
            prev = p;
        }
    }

    #[test]
    fn pd_rayleigh_rejects_bad_sample_counts() {
        for n in [2u32, 3, 5, 7] {
            let params = SensingParams::rayleigh(10.0, n);
            assert!(
                matches!(pd_rayleigh(&params, 1.0), Err(Error::UnsupportedConfiguration(_))),
                "N = {n} should be rejected"
            );
        }
        // fractional sample count
        let mut params = SensingParams::rayleigh(10.0, 10);
        params.tau_s = 10.5e-6;
        assert!(pd_rayleigh(&params, 1.0).is_err());
    }

    #[test]
    fn chi_square_false_alarm_frozen_values() {
        // reference values computed with mpmath's regularized upper
        // incomplete gamma at 50 decimal digits
        let cases = [
            (10, 10.0, 0.44049328506521241144),
            (10, 2.0, 0.99634015317265628765),
            (10, 30.0, 0.00085664121077530039211),
            (6, 4.5, 0.60933926699827819703),
            (6, 0.5, 0.99783850331023748744),
            (6, 20.0, 0.0027693957155115759437),
        ];
        for (n, eta, want) in cases {
            let params = SensingParams::rayleigh(10.0, n);
            let got = pf_chi_square(&params, eta).unwrap();
            assert!(
                (got - want).abs() < 1e-14 * want.max(1e-3),
                "N={n}, eta={eta}: got {got}, want {want}"
            );
        }
        let mut scaled = SensingParams::rayleigh(10.0, 10);
        scaled.sigma2 = 2.0;
        let got = pf_chi_square(&scaled, 10.0).unwrap();
        assert!((got - 0.89117801891415124235).abs() < 1e-14);
    }

    #[test]
    fn chi_square_false_alarm_limits_and_monotonicity() {
        let params = SensingParams::rayleigh(10.0, 10);
        assert_eq!(pf_chi_square(&params, 0.0).unwrap(), 1.0);
        assert!(pf_chi_square(&params, 400.0).unwrap() < 1e-12);
        let mut prev = 1.0;
        for step in 0..=60 {
            let p = pf_chi_square(&params, step as f64).unwrap();
            assert!(p <= prev + 1e-15);
            prev = p;
        }
        assert!(matches!(
            pf_chi_square(&SensingParams::rayleigh(10.0, 5), 1.0),
            Err(Error::UnsupportedConfiguration(_))
        ));
    }

    #[test]
    fn rayleigh_roc_pairs_the_finite_sample_statistic() {
        // both columns must come from the same chi-square threshold: the
        // false-alarm column has to traverse (0, 1), not collapse to 0
        let params = SensingParams::rayleigh(10.0, 10);
        let curve = roc_curve(&params, 0.1, 32.0, 40).unwrap();
        assert!(curve.first().unwrap().p_f > 0.99);
        assert!(curve.last().unwrap().p_f < 0.01);
        for pair in curve.windows(2) {
            assert!(pair[1].p_f <= pair[0].p_f + 1e-15);
            assert!(pair[1].p_md >= pair[0].p_md - 1e-12);
        }
        for point in &curve {
            let again = detection_point(&params, point.eta).unwrap();
            assert_eq!(again.p_f, point.p_f);
            assert_eq!(again.p_d, point.p_d);
        }
    }

    #[test]
    fn roc_curve_orders_points_by_descending_false_alarm() {
        let params = reference_params();
        let curve = roc_curve(&params, 0.97, 1.05, 50).unwrap();
        assert_eq!(curve.len(), 50);
        for pair in curve.windows(2) {
            assert!(pair[1].p_f <= pair[0].p_f + 1e-15);
            assert!(pair[1].p_md >= pair[0].p_md - 1e-15);
        }
        for point in &curve {
            assert!((point.p_md - (1.0 - point.p_d)).abs() < 1e-15);
        }
    }

    #[test]
    fn roc_curve_single_point_at_noise_floor() {
        let params = reference_params();
        let curve = roc_curve(&params, 1.0, 1.0, 1).unwrap();
        assert_eq!(curve.len(), 1);
        assert!((curve[0].p_f - 0.5).abs() < 1e-15);
    }

    #[test]
    fn roc_curve_argument_validation() {
        let params = reference_params();
        assert!(roc_curve(&params, 1.0, 2.0, 0).is_err());
        assert!(roc_curve(&params, 2.0, 1.0, 10).is_err());
        assert!(roc_curve(&params, -1.0, 2.0, 10).is_err());
    }

    #[test]
    fn longer_sensing_at_better_snr_dominates() {
        // doubled sensing time and 2 dB more SNR must push the whole curve
        // down: lower missed detection at every matched false-alarm level
        let base = reference_params();
        let better = SensingParams::new(db_to_linear(-13.0), 4e-3, 6e6);
        let pmd_at_pf = |params: &SensingParams, pf: f64| {
            let shift = params.snr * params.time_bandwidth().sqrt();
            let arg = (q_inverse(pf).unwrap() - shift) / (2.0 * params.snr + 1.0).sqrt();
            1.0 - q_function(arg)
        };
        let mut pf = 0.01;
        while pf < 0.6 {
            let a = pmd_at_pf(&base, pf);
            let b = pmd_at_pf(&better, pf);
            assert!(b < a, "at p_f = {pf}: {b} !< {a}");
            pf += 0.02;
        }
    }

    #[test]
    fn invalid_params_are_rejected() {
        let mut params = reference_params();
        params.snr = 0.0;
        assert!(pd_awgn(&params, 1.0).is_err());
        let mut params = reference_params();
        params.noise_power = -1.0;
        assert!(pf_awgn(&params, 1.0).is_err());
        let params = reference_params();
        assert!(pd_awgn(&params, -0.5).is_err());
        assert!(pd_awgn(&params, f64::NAN).is_err());
    }
}
