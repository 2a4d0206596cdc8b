//! Parameter sweeps: preset grids for every figure-style artifact, a
//! generic cross-product runner, the monotone-trend suite, and the full
//! analytic-versus-simulation validation pass.
//!
//! A sweep is declarative: fixed parameters plus ordered varied axes. The
//! runner evaluates every grid point independently (in parallel, merged
//! back in grid order), marking failed points instead of aborting, so one
//! degenerate configuration cannot sink a whole table.

use crate::chain::{solve_fixed_point, MacParams, SpectrumParams};
use crate::detection::{db_to_linear, detection_point, pf_from_pd, DetectionPoint, SensingParams};
use crate::error::{Error, Result};
use crate::metrics::{compute, Metrics, ThroughputMode};
use crate::sim::{simulate, ComparisonReport, SimConfig, SimStats};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Sensing operating point shared by all network-level presets: the
/// false-alarm probability is tied to the detection probability through
/// the detector at this SNR and sensing time.
pub const REFERENCE_SNR_DB: f64 = -15.0;
pub const REFERENCE_TAU_MS: f64 = 2.0;
pub const REFERENCE_FS_MHZ: f64 = 6.0;

/// The preset sweep families. Each reproduces one figure-style artifact:
/// two receiver operating characteristics and six network sweeps
/// (collision probability against station count, split by window, stage,
/// or activity/channel count; throughput against detection probability,
/// split the same three ways).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FigureId {
    RocAwgn,
    RocRayleigh,
    PcVsNW,
    PcVsNM,
    PcVsNAlphaC,
    SVsPdW,
    SVsPdM,
    SVsPdC,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::RocAwgn,
        FigureId::RocRayleigh,
        FigureId::PcVsNW,
        FigureId::PcVsNM,
        FigureId::PcVsNAlphaC,
        FigureId::SVsPdW,
        FigureId::SVsPdM,
        FigureId::SVsPdC,
    ];

    /// Stable lowercase name used in metadata and output files.
    pub fn name(&self) -> &'static str {
        match self {
            FigureId::RocAwgn => "roc_awgn",
            FigureId::RocRayleigh => "roc_rayleigh",
            FigureId::PcVsNW => "pc_vs_n_w",
            FigureId::PcVsNM => "pc_vs_n_m",
            FigureId::PcVsNAlphaC => "pc_vs_n_alpha_c",
            FigureId::SVsPdW => "s_vs_pd_w",
            FigureId::SVsPdM => "s_vs_pd_m",
            FigureId::SVsPdC => "s_vs_pd_c",
        }
    }

    /// Whether this family sweeps detector thresholds rather than network
    /// configurations.
    pub fn is_roc(&self) -> bool {
        matches!(self, FigureId::RocAwgn | FigureId::RocRayleigh)
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A sweepable parameter. Dimensioned values carry their unit in the name;
/// everything reaches the solvers in linear scale.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Param {
    /// Number of contending stations `n`.
    Stations,
    /// Maximum backoff stage `m`.
    MaxStage,
    /// Minimum contention window `W`.
    MinWindow,
    /// Number of licensed channels `C`.
    Channels,
    /// Primary-user activity probability.
    Alpha,
    /// Detection probability of the energy detector.
    DetectionProb,
    /// Explicit false-alarm probability; when absent it is derived from
    /// the detection probability at the sweep's sensing operating point.
    FalseAlarm,
    /// Sensed SNR in dB.
    SnrDb,
    /// Sensing time in milliseconds.
    TauMs,
    /// Sampling frequency in MHz.
    FsMhz,
    /// Energy threshold of the detector.
    Threshold,
    /// Sample count `N` of the finite-sample detector.
    Samples,
    /// Average SNR in dB of the fading distribution.
    AvgSnrDb,
}

impl Param {
    /// Column name in emitted tables.
    pub fn column(&self) -> &'static str {
        match self {
            Param::Stations => "n",
            Param::MaxStage => "m",
            Param::MinWindow => "w",
            Param::Channels => "c",
            Param::Alpha => "alpha",
            Param::DetectionProb => "p_d",
            Param::FalseAlarm => "p_f",
            Param::SnrDb => "snr_db",
            Param::TauMs => "tau_ms",
            Param::FsMhz => "fs_mhz",
            Param::Threshold => "eta",
            Param::Samples => "samples",
            Param::AvgSnrDb => "avg_snr_db",
        }
    }
}

impl std::str::FromStr for Param {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "n" | "stations" => Ok(Param::Stations),
            "m" | "max_stage" => Ok(Param::MaxStage),
            "w" | "window" | "min_window" => Ok(Param::MinWindow),
            "c" | "channels" => Ok(Param::Channels),
            "alpha" => Ok(Param::Alpha),
            "pd" | "p_d" => Ok(Param::DetectionProb),
            "pf" | "p_f" => Ok(Param::FalseAlarm),
            "snr_db" => Ok(Param::SnrDb),
            "tau_ms" => Ok(Param::TauMs),
            "fs_mhz" => Ok(Param::FsMhz),
            "eta" | "threshold" => Ok(Param::Threshold),
            "samples" => Ok(Param::Samples),
            "avg_snr_db" => Ok(Param::AvgSnrDb),
            other => Err(Error::InvalidArgument(format!(
                "unknown parameter {other:?}; known: n, m, w, c, alpha, pd, pf, snr_db, \
                 tau_ms, fs_mhz, eta, samples, avg_snr_db"
            ))),
        }
    }
}

/// Row-independent simulation settings for a sweep; per-row seeds are
/// derived deterministically from the base seed and the grid position.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimSettings {
    pub slots: u64,
    /// Explicit warmup; `None` applies the same rule as
    /// [`SimConfig::new`].
    pub warmup_slots: Option<u64>,
    pub seed: u64,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings { slots: 1_000_000, warmup_slots: None, seed: 0x5EED }
    }
}

/// Declarative description of one sweep: a cross product of varied axes
/// over a bed of fixed parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub figure_id: FigureId,
    /// Label distinguishing curves whose parameters change together and so
    /// cannot live on one cross-product grid.
    pub series: String,
    pub fixed: Vec<(Param, f64)>,
    /// Ordered axes; the first varies slowest in the row order.
    pub varied: Vec<(Param, Vec<f64>)>,
    pub with_simulation: bool,
    pub sim: Option<SimSettings>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let mut seen: Vec<Param> = Vec::new();
        for &(param, _) in &self.fixed {
            if seen.contains(&param) {
                return Err(Error::InvalidArgument(format!(
                    "parameter {} appears more than once",
                    param.column()
                )));
            }
            seen.push(param);
        }
        for (param, grid) in &self.varied {
            if seen.contains(param) {
                return Err(Error::InvalidArgument(format!(
                    "parameter {} appears more than once",
                    param.column()
                )));
            }
            seen.push(*param);
            if grid.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "varied parameter {} has an empty grid",
                    param.column()
                )));
            }
        }
        if self.figure_id.is_roc() {
            for required in [Param::Threshold] {
                if !seen.contains(&required) {
                    return Err(Error::InvalidArgument(format!(
                        "threshold sweep needs parameter {}",
                        required.column()
                    )));
                }
            }
            let sensing: &[Param] = match self.figure_id {
                FigureId::RocAwgn => &[Param::SnrDb, Param::TauMs, Param::FsMhz],
                _ => &[Param::Samples, Param::AvgSnrDb],
            };
            for required in sensing {
                if !seen.contains(required) {
                    return Err(Error::InvalidArgument(format!(
                        "{} sweep needs parameter {}",
                        self.figure_id,
                        required.column()
                    )));
                }
            }
        } else {
            for required in [
                Param::Stations,
                Param::MaxStage,
                Param::MinWindow,
                Param::Channels,
                Param::Alpha,
                Param::DetectionProb,
            ] {
                if !seen.contains(&required) {
                    return Err(Error::InvalidArgument(format!(
                        "network sweep needs parameter {}",
                        required.column()
                    )));
                }
            }
            let can_derive = seen.contains(&Param::SnrDb)
                && seen.contains(&Param::TauMs)
                && seen.contains(&Param::FsMhz);
            if !seen.contains(&Param::FalseAlarm) && !can_derive {
                return Err(Error::InvalidArgument(
                    "network sweep needs either p_f or the sensing point \
                     (snr_db, tau_ms, fs_mhz) to derive it"
                        .into(),
                ));
            }
        }
        Ok(())
    }

    /// Replaces a parameter wherever it lives: one value makes it fixed, a
    /// multi-value grid makes it a varied axis (in place if it already was
    /// one, appended otherwise).
    pub fn override_param(&mut self, param: Param, values: Vec<f64>) -> Result<()> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "override for {} carries no values",
                param.column()
            )));
        }
        let varied_pos = self.varied.iter().position(|(p, _)| *p == param);
        self.fixed.retain(|(p, _)| *p != param);
        if values.len() == 1 {
            if let Some(pos) = varied_pos {
                self.varied.remove(pos);
            }
            self.fixed.push((param, values[0]));
        } else if let Some(pos) = varied_pos {
            self.varied[pos].1 = values;
        } else {
            self.varied.push((param, values));
        }
        Ok(())
    }

    /// Number of grid points this spec expands to.
    pub fn point_count(&self) -> usize {
        self.varied.iter().map(|(_, grid)| grid.len()).product()
    }
}

/// One evaluated grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub series: String,
    /// Every parameter this sweep names, resolved to its value at this
    /// point, fixed parameters first, then the varied axes in order.
    pub params: Vec<(Param, f64)>,
    pub outcome: RowOutcome,
}

impl SweepRow {
    pub fn param(&self, param: Param) -> Option<f64> {
        self.params.iter().find(|(p, _)| *p == param).map(|&(_, v)| v)
    }

    pub fn metrics(&self) -> Option<&Metrics> {
        match &self.outcome {
            RowOutcome::Analytic { metrics } | RowOutcome::Simulated { metrics, .. } => {
                Some(metrics)
            }
            _ => None,
        }
    }
}

/// What one grid point produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RowOutcome {
    /// Threshold sweeps: the paired error probabilities.
    Detection { point: DetectionPoint },
    /// Network sweeps without simulation.
    Analytic { metrics: Metrics },
    /// Network sweeps with the empirical estimates alongside.
    Simulated { metrics: Metrics, sim: SimEstimates },
    /// The point could not be evaluated; the sweep carries on.
    Failed { message: String },
}

/// Compact empirical summary of one simulated grid point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimEstimates {
    pub seed: u64,
    pub slots: u64,
    pub attempts: u64,
    pub tau_hat: f64,
    /// `None` when no station ever transmitted.
    pub pc_hat: Option<f64>,
    pub pc_se: f64,
    pub success_rate_hat: f64,
    pub success_rate_se: f64,
}

impl From<&SimStats> for SimEstimates {
    fn from(stats: &SimStats) -> Self {
        let slot_count = stats.measured_slots as f64;
        let tau_hat = stats.estimate_tau();
        let pc_hat = stats.estimate_pc().ok();
        let success_rate_hat = stats.estimate_throughput();
        SimEstimates {
            seed: stats.config.seed,
            slots: stats.config.slots,
            attempts: stats.attempts,
            tau_hat,
            pc_hat,
            pc_se: pc_hat.map_or(0.0, |p| binomial_se(p, stats.attempts as f64)),
            success_rate_hat,
            success_rate_se: binomial_se(success_rate_hat, slot_count),
        }
    }
}

fn binomial_se(p_hat: f64, trials: f64) -> f64 {
    if trials <= 0.0 {
        return 0.0;
    }
    (p_hat.clamp(0.0, 1.0) * (1.0 - p_hat.clamp(0.0, 1.0)) / trials).sqrt()
}

/// All rows of one executed sweep (possibly merged across series).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub figure_id: FigureId,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| matches!(r.outcome, RowOutcome::Failed { .. })).count()
    }
}

/// Evaluates the full cross product of a spec. Grid points run in
/// parallel; rows come back in grid order (first varied axis slowest)
/// regardless of completion order. Solver or simulator failures mark their
/// row and leave the rest of the sweep intact.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let points = spec.point_count();
    let rows: Vec<SweepRow> = (0..points)
        .into_par_iter()
        .map(|idx| {
            let params = resolve_point(spec, idx);
            let outcome = evaluate_point(spec, idx, &params)
                .unwrap_or_else(|err| RowOutcome::Failed { message: err.to_string() });
            SweepRow { series: spec.series.clone(), params, outcome }
        })
        .collect();
    Ok(SweepResult { figure_id: spec.figure_id, rows })
}

/// Runs several specs of the same family and concatenates their rows.
pub fn run_specs(specs: &[SweepSpec]) -> Result<SweepResult> {
    let figure_id = match specs.first() {
        Some(spec) => spec.figure_id,
        None => return Err(Error::InvalidArgument("no sweep specs given".into())),
    };
    let mut rows = Vec::new();
    for spec in specs {
        if spec.figure_id != figure_id {
            return Err(Error::Contract(format!(
                "cannot merge {} rows into a {} table",
                spec.figure_id, figure_id
            )));
        }
        rows.extend(run_sweep(spec)?.rows);
    }
    Ok(SweepResult { figure_id, rows })
}

/// Runs a preset family end to end.
pub fn run_figure(
    figure: FigureId,
    with_simulation: bool,
    sim: Option<SimSettings>,
) -> Result<SweepResult> {
    let mut specs = presets(figure);
    for spec in &mut specs {
        spec.with_simulation = with_simulation;
        spec.sim = sim;
    }
    run_specs(&specs)
}

fn resolve_point(spec: &SweepSpec, idx: usize) -> Vec<(Param, f64)> {
    let mut params = spec.fixed.clone();
    // odometer decode: last listed axis spins fastest
    let mut rem = idx;
    let mut coords = vec![0usize; spec.varied.len()];
    for (axis, (_, grid)) in spec.varied.iter().enumerate().rev() {
        coords[axis] = rem % grid.len();
        rem /= grid.len();
    }
    for (axis, (param, grid)) in spec.varied.iter().enumerate() {
        params.push((*param, grid[coords[axis]]));
    }
    params
}

fn get(params: &[(Param, f64)], param: Param) -> Option<f64> {
    params.iter().find(|(p, _)| *p == param).map(|&(_, v)| v)
}

fn require(params: &[(Param, f64)], param: Param) -> Result<f64> {
    get(params, param).ok_or_else(|| {
        Error::InvalidArgument(format!("missing parameter {}", param.column()))
    })
}

fn require_count(params: &[(Param, f64)], param: Param) -> Result<u32> {
    let value = require(params, param)?;
    if value < 0.0 || value.fract() != 0.0 || value > u32::MAX as f64 {
        return Err(Error::InvalidArgument(format!(
            "parameter {} must be a nonnegative integer, got {value}",
            param.column()
        )));
    }
    Ok(value as u32)
}

/// The false-alarm probability operating alongside a target detection
/// probability. The boundary values carry their limits: guaranteeing
/// detection forces the threshold to the floor (every sensing alarms),
/// and never detecting forces it to the ceiling (no sensing alarms).
pub fn resolve_false_alarm(p_d: f64, snr: f64, time_bandwidth: f64) -> Result<f64> {
    if p_d == 1.0 {
        Ok(1.0)
    } else if p_d == 0.0 {
        Ok(0.0)
    } else {
        pf_from_pd(p_d, snr, time_bandwidth)
    }
}

/// Builds the network parameters at one resolved grid point, deriving the
/// false-alarm probability from the sensing operating point when it is not
/// given explicitly.
pub fn resolve_network_point(params: &[(Param, f64)]) -> Result<(MacParams, SpectrumParams)> {
    let mac = MacParams::new(
        require_count(params, Param::Stations)?,
        require_count(params, Param::MaxStage)?,
        require_count(params, Param::MinWindow)?,
    );
    let p_d = require(params, Param::DetectionProb)?;
    let p_f = match get(params, Param::FalseAlarm) {
        Some(p_f) => p_f,
        None => {
            let snr = db_to_linear(require(params, Param::SnrDb)?);
            let tb = require(params, Param::TauMs)? * 1e-3 * require(params, Param::FsMhz)? * 1e6;
            resolve_false_alarm(p_d, snr, tb)?
        }
    };
    let spectrum = SpectrumParams::new(
        require_count(params, Param::Channels)?,
        require(params, Param::Alpha)?,
        p_d,
        p_f,
    );
    mac.validate()?;
    spectrum.validate()?;
    Ok((mac, spectrum))
}

fn resolve_sensing_point(figure: FigureId, params: &[(Param, f64)]) -> Result<SensingParams> {
    match figure {
        FigureId::RocAwgn => Ok(SensingParams::new(
            db_to_linear(require(params, Param::SnrDb)?),
            require(params, Param::TauMs)? * 1e-3,
            require(params, Param::FsMhz)? * 1e6,
        )),
        FigureId::RocRayleigh => Ok(SensingParams::rayleigh(
            db_to_linear(require(params, Param::AvgSnrDb)?),
            require_count(params, Param::Samples)?,
        )),
        other => Err(Error::Contract(format!("{other} is not a threshold sweep"))),
    }
}

fn evaluate_point(spec: &SweepSpec, idx: usize, params: &[(Param, f64)]) -> Result<RowOutcome> {
    if spec.figure_id.is_roc() {
        let sensing = resolve_sensing_point(spec.figure_id, params)?;
        let eta = require(params, Param::Threshold)?;
        let point = detection_point(&sensing, eta)?;
        return Ok(RowOutcome::Detection { point });
    }

    let (mac, spectrum) = resolve_network_point(params)?;
    let fp = solve_fixed_point(&mac, &spectrum)?;
    let metrics = compute(&fp, ThroughputMode::default())?;
    if !spec.with_simulation {
        return Ok(RowOutcome::Analytic { metrics });
    }

    let settings = spec.sim.unwrap_or_default();
    let config = sim_config_for_row(&settings, &spec.series, idx, mac, spectrum);
    let stats = simulate(&config)?;
    Ok(RowOutcome::Simulated { metrics, sim: SimEstimates::from(&stats) })
}

fn sim_config_for_row(
    settings: &SimSettings,
    series: &str,
    idx: usize,
    mac: MacParams,
    spectrum: SpectrumParams,
) -> SimConfig {
    let seed = derive_seed(settings.seed ^ fnv1a(series), idx as u64);
    let mut config = SimConfig::new(mac, spectrum, settings.slots, seed);
    if let Some(warmup) = settings.warmup_slots {
        config.warmup_slots = warmup;
    }
    config
}

// FNV-1a, for folding series labels into seed material.
fn fnv1a(text: &str) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for byte in text.bytes() {
        hash ^= byte as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

// splitmix64 finalizer: decorrelates consecutive row indices into
// independent-looking seeds.
fn derive_seed(base: u64, idx: u64) -> u64 {
    let mut z = base ^ idx.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sensing_bed() -> Vec<(Param, f64)> {
    vec![
        (Param::SnrDb, REFERENCE_SNR_DB),
        (Param::TauMs, REFERENCE_TAU_MS),
        (Param::FsMhz, REFERENCE_FS_MHZ),
    ]
}

fn stations_2_to_10() -> Vec<f64> {
    (2..=10).map(f64::from).collect()
}

fn detection_grid_tenths() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

/// Threshold interval over which the Gaussian-limit false alarm traverses
/// from ~1 down to ~1e-7: five standard deviations of the no-signal
/// statistic either side of the noise floor.
pub fn awgn_threshold_bounds(time_bandwidth: f64) -> (f64, f64) {
    let half_width = 5.0 / time_bandwidth.sqrt();
    (1.0 - half_width, 1.0 + half_width)
}

/// Threshold interval over which the chi-square false alarm traverses
/// (1, 0): from almost-certain alarm up past the matched tail.
pub fn chi_square_threshold_bounds(samples: u32) -> (f64, f64) {
    let n = samples as f64;
    (0.05, n + 5.0 * (2.0 * n).sqrt())
}

fn awgn_threshold_grid(time_bandwidth: f64, count: usize) -> Vec<f64> {
    let (lo, hi) = awgn_threshold_bounds(time_bandwidth);
    uniform_grid(lo, hi, count)
}

fn chi_square_threshold_grid(samples: u32, count: usize) -> Vec<f64> {
    let (lo, hi) = chi_square_threshold_bounds(samples);
    uniform_grid(lo, hi, count)
}

/// `count` evenly spaced values across `[lo, hi]`; a single point sits at
/// `lo`.
pub fn uniform_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1).max(1) as f64).collect()
}

const ROC_POINTS: usize = 50;

/// The preset specs of a family. Threshold families return one spec per
/// curve (their sensing parameters move together); network families are a
/// single cross product.
pub fn presets(figure: FigureId) -> Vec<SweepSpec> {
    let network = |series: &str, fixed: Vec<(Param, f64)>, varied: Vec<(Param, Vec<f64>)>| {
        let mut all_fixed = fixed;
        all_fixed.extend(sensing_bed());
        SweepSpec {
            figure_id: figure,
            series: series.to_string(),
            fixed: all_fixed,
            varied,
            with_simulation: false,
            sim: None,
        }
    };
    match figure {
        FigureId::RocAwgn => [(2.0, -15.0), (4.0, -13.0)]
            .into_iter()
            .map(|(tau_ms, snr_db)| SweepSpec {
                figure_id: figure,
                series: format!("tau{tau_ms:.0}ms_snr{snr_db:.0}db"),
                fixed: vec![
                    (Param::TauMs, tau_ms),
                    (Param::SnrDb, snr_db),
                    (Param::FsMhz, REFERENCE_FS_MHZ),
                ],
                varied: vec![(
                    Param::Threshold,
                    awgn_threshold_grid(tau_ms * 1e-3 * REFERENCE_FS_MHZ * 1e6, ROC_POINTS),
                )],
                with_simulation: false,
                sim: None,
            })
            .collect(),
        FigureId::RocRayleigh => [(6u32, 10.0), (6, 20.0), (10, 10.0), (10, 20.0)]
            .into_iter()
            .map(|(samples, avg_snr_db)| SweepSpec {
                figure_id: figure,
                series: format!("n{samples}_snr{avg_snr_db:.0}db"),
                fixed: vec![
                    (Param::Samples, samples as f64),
                    (Param::AvgSnrDb, avg_snr_db),
                ],
                varied: vec![(Param::Threshold, chi_square_threshold_grid(samples, ROC_POINTS))],
                with_simulation: false,
                sim: None,
            })
            .collect(),
        FigureId::PcVsNW => vec![network(
            "default",
            vec![(Param::MaxStage, 3.0), (Param::Channels, 1.0), (Param::Alpha, 0.5)],
            vec![
                (Param::DetectionProb, vec![0.1, 0.9, 1.0]),
                (Param::MinWindow, vec![32.0, 64.0]),
                (Param::Stations, stations_2_to_10()),
            ],
        )],
        FigureId::PcVsNM => vec![network(
            "default",
            vec![(Param::MinWindow, 32.0), (Param::Channels, 1.0), (Param::Alpha, 0.5)],
            vec![
                (Param::DetectionProb, vec![0.1, 0.9, 1.0]),
                (Param::MaxStage, vec![3.0, 5.0]),
                (Param::Stations, stations_2_to_10()),
            ],
        )],
        FigureId::PcVsNAlphaC => vec![network(
            "default",
            vec![
                (Param::DetectionProb, 0.5),
                (Param::MaxStage, 3.0),
                (Param::MinWindow, 32.0),
            ],
            vec![
                (Param::Alpha, vec![0.0, 0.5, 0.8]),
                (Param::Channels, vec![1.0, 3.0, 6.0]),
                (Param::Stations, stations_2_to_10()),
            ],
        )],
        FigureId::SVsPdW => vec![network(
            "default",
            vec![(Param::MaxStage, 3.0), (Param::Channels, 1.0), (Param::Alpha, 0.5)],
            vec![
                (Param::MinWindow, vec![32.0, 64.0]),
                (Param::Stations, vec![2.0, 5.0, 10.0]),
                (Param::DetectionProb, detection_grid_tenths()),
            ],
        )],
        FigureId::SVsPdM => vec![network(
            "default",
            vec![(Param::MinWindow, 32.0), (Param::Channels, 1.0), (Param::Alpha, 0.5)],
            vec![
                (Param::MaxStage, vec![3.0, 5.0]),
                (Param::Stations, vec![2.0, 5.0, 10.0]),
                (Param::DetectionProb, detection_grid_tenths()),
            ],
        )],
        FigureId::SVsPdC => vec![network(
            "default",
            vec![(Param::MaxStage, 3.0), (Param::MinWindow, 32.0), (Param::Alpha, 0.5)],
            vec![
                (Param::Channels, vec![1.0, 3.0, 6.0]),
                (Param::Stations, vec![2.0, 5.0, 10.0]),
                (Param::DetectionProb, detection_grid_tenths()),
            ],
        )],
    }
}

/// Outcome of one monotone-trend assertion over preset rows.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrendCheck {
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
}

/// Runs the analytic presets and checks every claimed monotone trend:
/// collision probability rises with the station count and the channel
/// count, falls with the contention window, the backoff stage cap, the
/// detection probability, and the primary-user activity; throughput falls
/// with the detection probability; and the window's effect on the
/// collision probability pointwise dominates the stage cap's, strictly so
/// at ten stations on non-degenerate operating points.
pub fn trend_suite() -> Result<Vec<TrendCheck>> {
    let pc_w = run_figure(FigureId::PcVsNW, false, None)?;
    let pc_m = run_figure(FigureId::PcVsNM, false, None)?;
    let pc_ac = run_figure(FigureId::PcVsNAlphaC, false, None)?;
    let s_w = run_figure(FigureId::SVsPdW, false, None)?;
    let s_m = run_figure(FigureId::SVsPdM, false, None)?;
    let s_c = run_figure(FigureId::SVsPdC, false, None)?;

    let pc = |m: &Metrics| m.p_c;
    let s = |m: &Metrics| m.throughput;

    let mut checks = vec![
        check_monotone("pc_nondecreasing_in_n", &[&pc_w, &pc_m, &pc_ac], Param::Stations, true, pc),
        check_monotone("pc_nonincreasing_in_w", &[&pc_w], Param::MinWindow, false, pc),
        check_monotone("pc_nonincreasing_in_m", &[&pc_m], Param::MaxStage, false, pc),
        check_monotone("pc_nonincreasing_in_pd", &[&pc_w, &pc_m], Param::DetectionProb, false, pc),
        check_monotone("pc_nonincreasing_in_alpha", &[&pc_ac], Param::Alpha, false, pc),
        check_monotone("pc_nondecreasing_in_c", &[&pc_ac, &s_c], Param::Channels, true, pc),
        check_monotone(
            "s_nonincreasing_in_pd",
            &[&s_w, &s_m, &s_c],
            Param::DetectionProb,
            false,
            s,
        ),
    ];
    checks.push(check_window_dominates_stage(&pc_w, &pc_m));
    Ok(checks)
}

/// Key identifying a row by every parameter except the swept axis, with
/// exact bit-pattern matching (grid values are produced identically on
/// both sides of a comparison).
fn row_key(row: &SweepRow, exclude: Param) -> Vec<(Param, u64)> {
    let mut key: Vec<(Param, u64)> = row
        .params
        .iter()
        .filter(|(p, _)| *p != exclude)
        .map(|&(p, v)| (p, v.to_bits()))
        .collect();
    key.sort();
    key
}

fn check_monotone(
    name: &'static str,
    results: &[&SweepResult],
    axis: Param,
    nondecreasing: bool,
    y: impl Fn(&Metrics) -> f64,
) -> TrendCheck {
    let mut groups: BTreeMap<Vec<(Param, u64)>, Vec<(f64, f64)>> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut rows_seen = 0usize;
    for result in results {
        for row in &result.rows {
            let Some(x) = row.param(axis) else { continue };
            match row.metrics() {
                Some(metrics) => {
                    rows_seen += 1;
                    groups.entry(row_key(row, axis)).or_default().push((x, y(metrics)));
                }
                None => failures.push(format!("unevaluated row at {} = {x}", axis.column())),
            }
        }
    }
    for series in groups.values_mut() {
        series.sort_by(|a, b| a.0.total_cmp(&b.0));
        for pair in series.windows(2) {
            let ((x0, y0), (x1, y1)) = (pair[0], pair[1]);
            let ok = if nondecreasing { y1 >= y0 - 1e-12 } else { y1 <= y0 + 1e-12 };
            if !ok {
                failures.push(format!(
                    "{}={x0} -> {x1}: {y0:.6} -> {y1:.6}",
                    axis.column()
                ));
            }
        }
    }
    TrendCheck {
        name,
        passed: failures.is_empty() && rows_seen > 0,
        details: if failures.is_empty() {
            format!("{rows_seen} rows, all ordered")
        } else {
            failures.join("; ")
        },
    }
}

/// The contention-window change must move the collision probability at
/// least as much as the stage-cap change everywhere, and strictly more at
/// ten stations on operating points where anything transmits at all (a
/// fully blocked network has zero collision probability on both sides of
/// both changes).
fn check_window_dominates_stage(pc_w: &SweepResult, pc_m: &SweepResult) -> TrendCheck {
    let collect = |result: &SweepResult, axis: Param, value: f64| {
        let mut map: BTreeMap<Vec<(Param, u64)>, (f64, bool)> = BTreeMap::new();
        for row in &result.rows {
            if row.param(axis) == Some(value) {
                if let Some(metrics) = row.metrics() {
                    let degenerate = metrics.spectrum.perceived_busy_prob() >= 1.0 - 1e-12;
                    let mut key = row_key(row, axis);
                    // the shared base point (m=3, W=32) lives in both
                    // figures, whose keys differ only in which parameter
                    // the figure treats as fixed; drop both from the key
                    key.retain(|(p, _)| *p != Param::MinWindow && *p != Param::MaxStage);
                    map.insert(key, (metrics.p_c, degenerate));
                }
            }
        }
        map
    };
    let base_w = collect(pc_w, Param::MinWindow, 32.0);
    let wide_w = collect(pc_w, Param::MinWindow, 64.0);
    let base_m = collect(pc_m, Param::MaxStage, 3.0);
    let deep_m = collect(pc_m, Param::MaxStage, 5.0);

    let mut failures = Vec::new();
    let mut compared = 0usize;
    let mut strict_points = 0usize;
    for (key, &(pc_base_w, degenerate)) in &base_w {
        let (Some(&(pc_wide, _)), Some(&(pc_base_m, _)), Some(&(pc_deep, _))) =
            (wide_w.get(key), base_m.get(key), deep_m.get(key))
        else {
            failures.push("grids of the two figures no longer align".into());
            continue;
        };
        if (pc_base_w - pc_base_m).abs() > 1e-9 {
            failures.push(format!(
                "shared base point disagrees between figures: {pc_base_w} vs {pc_base_m}"
            ));
        }
        let gap_w = pc_base_w - pc_wide;
        let gap_m = pc_base_m - pc_deep;
        compared += 1;
        if gap_m > gap_w + 1e-12 {
            failures.push(format!("stage gap {gap_m:.6} exceeds window gap {gap_w:.6}"));
        }
        let at_ten = key.iter().any(|&(p, bits)| {
            p == Param::Stations && f64::from_bits(bits) == 10.0
        });
        if at_ten && !degenerate {
            strict_points += 1;
            if !(gap_w > gap_m + 1e-12) {
                failures.push(format!(
                    "at n=10 the window gap {gap_w:.6} does not strictly exceed \
                     the stage gap {gap_m:.6}"
                ));
            }
        }
    }
    TrendCheck {
        name: "w_effect_dominates_m_effect",
        passed: failures.is_empty() && compared > 0 && strict_points > 0,
        details: if failures.is_empty() {
            format!("{compared} matched points, {strict_points} strict at n=10")
        } else {
            failures.join("; ")
        },
    }
}

/// One analytic-versus-simulation comparison inside a validation run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationCase {
    pub figure_id: FigureId,
    pub params: Vec<(Param, f64)>,
    pub outcome: CaseOutcome,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum CaseOutcome {
    Compared(ComparisonReport),
    Failed { message: String },
}

impl ValidationCase {
    pub fn passed(&self) -> bool {
        match &self.outcome {
            CaseOutcome::Compared(report) => report.all_within_tolerance,
            CaseOutcome::Failed { .. } => false,
        }
    }
}

/// Aggregate result of [`validate_all`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub tolerance: f64,
    pub cases: Vec<ValidationCase>,
    pub passed_cases: usize,
    pub failed_cases: usize,
    pub all_passed: bool,
}

/// Cross-checks the analytic model against the simulator on the three
/// collision-probability preset grids. Every grid point is solved and
/// simulated; a case passes when every compared metric lands within
/// `tolerance`.
pub fn validate_all(tolerance: f64, settings: &SimSettings) -> Result<ValidationReport> {
    let figures = [FigureId::PcVsNW, FigureId::PcVsNM, FigureId::PcVsNAlphaC];
    let mut cases = Vec::new();
    for figure in figures {
        for spec in presets(figure) {
            spec.validate()?;
            let points = spec.point_count();
            let mut figure_cases: Vec<ValidationCase> = (0..points)
                .into_par_iter()
                .map(|idx| {
                    let params = resolve_point(&spec, idx);
                    let outcome = validate_point(&spec, settings, idx, &params, tolerance)
                        .map(CaseOutcome::Compared)
                        .unwrap_or_else(|err| CaseOutcome::Failed { message: err.to_string() });
                    ValidationCase { figure_id: figure, params, outcome }
                })
                .collect();
            cases.append(&mut figure_cases);
        }
    }
    let passed_cases = cases.iter().filter(|c| c.passed()).count();
    let failed_cases = cases.len() - passed_cases;
    Ok(ValidationReport {
        tolerance,
        cases,
        passed_cases,
        failed_cases,
        all_passed: failed_cases == 0,
    })
}

fn validate_point(
    spec: &SweepSpec,
    settings: &SimSettings,
    idx: usize,
    params: &[(Param, f64)],
    tolerance: f64,
) -> Result<ComparisonReport> {
    let (mac, spectrum) = resolve_network_point(params)?;
    let fp = solve_fixed_point(&mac, &spectrum)?;
    let metrics = compute(&fp, ThroughputMode::default())?;
    let config = sim_config_for_row(settings, &spec.series, idx, mac, spectrum);
    let stats = simulate(&config)?;
    stats.compare(&metrics, tolerance)
}
