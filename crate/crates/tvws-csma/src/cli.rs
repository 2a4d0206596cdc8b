//! Command-line front end: detector operating curves, analytic solving,
//! simulation, preset figure sweeps, and the analytic-versus-simulation
//! validation suite.
//!
//! All tables go out as CSV with a header row and `#`-prefixed metadata
//! comments echoing the fully resolved configuration; `--json` mirrors the
//! same records for machine consumption. A plain `key = value` config file
//! can supply any parameter, with command-line flags taking precedence.
//! Relative `--output` paths resolve under `TVWS_CSMA_OUTDIR` when that
//! variable is set.

use crate::chain::{build_chain, solve_fixed_point, MacParams, SpectrumParams};
use crate::detection::{db_to_linear, detection_point, FadingModel, SensingParams};
use crate::error::{Error, Result};
use crate::metrics::{compute, Metrics, ThroughputMode};
use crate::sim::{simulate, SimConfig};
use crate::sweep::{
    awgn_threshold_bounds, chi_square_threshold_bounds, presets, resolve_false_alarm, run_specs,
    uniform_grid, validate_all, CaseOutcome, FigureId, Param, RowOutcome, SimEstimates,
    SimSettings, SweepResult, ValidationReport, REFERENCE_FS_MHZ, REFERENCE_SNR_DB,
    REFERENCE_TAU_MS,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::Rng;
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Environment variable naming the directory under which relative
/// `--output` paths are created.
pub const OUTDIR_ENV: &str = "TVWS_CSMA_OUTDIR";

#[derive(Parser, Debug)]
#[command(
    name = "tvws-csma",
    version,
    about = "Analytic and Monte Carlo models of CSMA/CA over sensed TV white-space channels",
    subcommand_required = true,
    arg_required_else_help = true
)]
struct Cli {
    /// Plain `key = value` file supplying defaults for any parameter;
    /// command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Emit the records as JSON instead of CSV/console text.
    #[arg(long, global = true)]
    json: bool,

    /// Write the table to this file instead of standard output. Relative
    /// paths land under TVWS_CSMA_OUTDIR when it is set.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Receiver operating characteristic of the energy detector.
    Roc(RocArgs),
    /// Solve the analytic model at one operating point.
    Solve(SolveArgs),
    /// Run the slot simulator at one operating point.
    Simulate(SimulateArgs),
    /// Reproduce a preset figure sweep as a table.
    Figure(FigureArgs),
    /// Cross-check the analytic model against the simulator on the preset
    /// collision-probability grids.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FadingArg {
    Awgn,
    Rayleigh,
}

#[derive(Args, Debug)]
struct RocArgs {
    /// Channel model of the sensed signal.
    #[arg(long, value_enum, default_value = "awgn")]
    fading: FadingArg,

    /// Sensed SNR in dB (AWGN).
    #[arg(long, allow_negative_numbers = true)]
    snr_db: Option<f64>,

    /// Sensing time in milliseconds (AWGN).
    #[arg(long)]
    tau_ms: Option<f64>,

    /// Sampling frequency in MHz (AWGN).
    #[arg(long)]
    fs_mhz: Option<f64>,

    /// Average SNR in dB of the fading distribution (Rayleigh).
    #[arg(long, allow_negative_numbers = true)]
    avg_snr_db: Option<f64>,

    /// Detector sample count N (Rayleigh; even, at least 4).
    #[arg(long)]
    samples: Option<u32>,

    /// Lowest threshold of the grid.
    #[arg(long)]
    eta_min: Option<f64>,

    /// Highest threshold of the grid.
    #[arg(long)]
    eta_max: Option<f64>,

    /// Number of thresholds.
    #[arg(long)]
    points: Option<usize>,
}

/// Network operating point shared by `solve` and `simulate`. The
/// false-alarm probability follows from the detection probability at the
/// sensing operating point unless given explicitly.
#[derive(Args, Debug)]
struct NetworkArgs {
    /// Number of contending stations.
    #[arg(long)]
    n: Option<u32>,

    /// Maximum backoff stage.
    #[arg(long)]
    m: Option<u32>,

    /// Minimum contention window.
    #[arg(long)]
    w: Option<u32>,

    /// Number of licensed channels.
    #[arg(long)]
    c: Option<u32>,

    /// Primary-user activity probability per channel.
    #[arg(long)]
    alpha: Option<f64>,

    /// Detection probability of the energy detector.
    #[arg(long)]
    pd: Option<f64>,

    /// False-alarm probability; derived from --pd at the sensing operating
    /// point when omitted.
    #[arg(long)]
    pf: Option<f64>,

    /// Sensed SNR in dB used when deriving --pf.
    #[arg(long, allow_negative_numbers = true)]
    snr_db: Option<f64>,

    /// Sensing time in milliseconds used when deriving --pf.
    #[arg(long)]
    tau_ms: Option<f64>,

    /// Sampling frequency in MHz used when deriving --pf.
    #[arg(long)]
    fs_mhz: Option<f64>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    network: NetworkArgs,

    /// Weight successful slots by this factor and report utilization-style
    /// throughput instead of the per-slot success probability.
    #[arg(long)]
    rho: Option<f64>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    network: NetworkArgs,

    /// Total slots to step, including warmup.
    #[arg(long)]
    slots: Option<u64>,

    /// Leading slots excluded from the statistics.
    #[arg(long)]
    warmup: Option<u64>,

    /// RNG seed; drawn at random (and echoed) when omitted.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct FigureArgs {
    /// Figure identifier: fig1, fig2, fig5..fig10, or a family name such
    /// as pc_vs_n_w.
    id: String,

    /// Analytic columns only, no simulation.
    #[arg(long)]
    no_sim: bool,

    /// Slots per simulated grid point.
    #[arg(long)]
    slots: Option<u64>,

    /// Warmup slots per simulated grid point.
    #[arg(long)]
    warmup: Option<u64>,

    /// Base seed; per-point seeds derive from it.
    #[arg(long)]
    seed: Option<u64>,

    /// Override a preset parameter, e.g. --set alpha=0.3 or
    /// --set n=2,6,10 (a list replaces or adds a varied axis).
    #[arg(long = "set", value_name = "PARAM=V1[,V2,...]")]
    set: Vec<String>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Largest tolerated |analytic - simulated| per metric.
    #[arg(long)]
    tolerance: Option<f64>,

    /// Slots per simulated grid point.
    #[arg(long)]
    slots: Option<u64>,

    /// Warmup slots per simulated grid point.
    #[arg(long)]
    warmup: Option<u64>,

    /// Base seed; per-point seeds derive from it.
    #[arg(long)]
    seed: Option<u64>,
}

/// Runs the command line given as `args` (including the program name),
/// writing all output to `out`. Returns the process exit code: 0 on full
/// success, 1 when a row failed or a comparison exceeded tolerance, 2 on
/// usage errors.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 2 } else { 0 };
            let _ = write!(out, "{err}");
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(err) => {
            let _ = writeln!(out, "error: {err}");
            1
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let config = FileConfig::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Roc(args) => cmd_roc(cli, &config, args, out),
        Command::Solve(args) => cmd_solve(cli, &config, args, out),
        Command::Simulate(args) => cmd_simulate(cli, &config, args, out),
        Command::Figure(args) => cmd_figure(cli, &config, args, out),
        Command::Validate(args) => cmd_validate(cli, &config, args, out),
    }
}

// ---------------------------------------------------------------------------
// config file

/// Parsed `key = value` defaults. Keys are case-insensitive with `-` and
/// `_` interchangeable.
struct FileConfig(BTreeMap<String, String>);

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)?;
            for (idx, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    return Err(Error::InvalidArgument(format!(
                        "{}:{}: expected `key = value`, got {raw:?}",
                        path.display(),
                        idx + 1
                    )));
                };
                map.insert(normalize_key(key), value.trim().to_string());
            }
        }
        Ok(FileConfig(map))
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.0.get(&normalize_key(key)).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(text) => text.parse().map(Some).map_err(|_| {
                Error::InvalidArgument(format!(
                    "config key {key} has unparseable value {text:?}"
                ))
            }),
        }
    }
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

/// Flag value if present, else config value, else the given default.
fn setting<T: std::str::FromStr + Copy>(
    flag: Option<T>,
    config: &FileConfig,
    key: &str,
    default: T,
) -> Result<T> {
    Ok(flag.or(config.parse(key)?).unwrap_or(default))
}

/// Flag value if present, else config value, else an error naming both.
fn required<T: std::str::FromStr + Copy>(
    flag: Option<T>,
    config: &FileConfig,
    key: &str,
) -> Result<T> {
    flag.or(config.parse(key)?).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "missing required parameter: give --{} or set `{key}` in the config file",
            key.replace('_', "-")
        ))
    })
}

fn optional<T: std::str::FromStr + Copy>(
    flag: Option<T>,
    config: &FileConfig,
    key: &str,
) -> Result<Option<T>> {
    Ok(flag.or(config.parse(key)?))
}

// ---------------------------------------------------------------------------
// shared resolution

/// Fully resolved network operating point plus the provenance of its
/// false-alarm probability.
struct RunConfig {
    mac: MacParams,
    spectrum: SpectrumParams,
    pf_note: String,
}

fn resolve_network(args: &NetworkArgs, config: &FileConfig) -> Result<RunConfig> {
    let mac = MacParams::new(
        required(args.n, config, "n")?,
        required(args.m, config, "m")?,
        required(args.w, config, "w")?,
    );
    let c = required(args.c, config, "c")?;
    let alpha = required(args.alpha, config, "alpha")?;
    let p_d = required(args.pd, config, "pd")?;
    let (p_f, pf_note) = match optional(args.pf, config, "pf")? {
        Some(p_f) => (p_f, "given explicitly".to_string()),
        None => {
            let snr_db = setting(args.snr_db, config, "snr_db", REFERENCE_SNR_DB)?;
            let tau_ms = setting(args.tau_ms, config, "tau_ms", REFERENCE_TAU_MS)?;
            let fs_mhz = setting(args.fs_mhz, config, "fs_mhz", REFERENCE_FS_MHZ)?;
            let p_f =
                resolve_false_alarm(p_d, db_to_linear(snr_db), tau_ms * 1e-3 * fs_mhz * 1e6)?;
            (p_f, format!("derived from p_d at {snr_db} dB, {tau_ms} ms, {fs_mhz} MHz"))
        }
    };
    let spectrum = SpectrumParams::new(c, alpha, p_d, p_f);
    mac.validate()?;
    spectrum.validate()?;
    Ok(RunConfig { mac, spectrum, pf_note })
}

// ---------------------------------------------------------------------------
// output plumbing

fn fmt_f64(value: f64) -> String {
    format!("{value}")
}

fn csv_field(text: &str) -> String {
    if text.contains(',') || text.contains('"') || text.contains('\n') {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

fn push_csv_row(table: &mut String, fields: &[String]) {
    let escaped: Vec<String> = fields.iter().map(|f| csv_field(f)).collect();
    let _ = writeln!(table, "{}", escaped.join(","));
}

fn push_comment(table: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(table, "# {key} = {value}");
}

/// Writes `content` to the `--output` path (resolved under the output
/// directory variable for relative paths) or to the console writer.
fn emit(cli: &Cli, out: &mut dyn Write, content: &str) -> Result<()> {
    match &cli.output {
        Some(path) => {
            let target = resolve_output_path(path);
            if let Some(parent) = target.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(&target, content)?;
            writeln!(out, "wrote {}", target.display())?;
            Ok(())
        }
        None => {
            out.write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

fn resolve_output_path(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var(OUTDIR_ENV) {
            if !dir.is_empty() {
                return Path::new(&dir).join(path);
            }
        }
    }
    path.to_path_buf()
}

// ---------------------------------------------------------------------------
// roc

fn cmd_roc(cli: &Cli, config: &FileConfig, args: &RocArgs, out: &mut dyn Write) -> Result<i32> {
    let (params, label) = match args.fading {
        FadingArg::Awgn => {
            let snr_db = setting(args.snr_db, config, "snr_db", REFERENCE_SNR_DB)?;
            let tau_ms = setting(args.tau_ms, config, "tau_ms", REFERENCE_TAU_MS)?;
            let fs_mhz = setting(args.fs_mhz, config, "fs_mhz", REFERENCE_FS_MHZ)?;
            let params = SensingParams::new(db_to_linear(snr_db), tau_ms * 1e-3, fs_mhz * 1e6);
            (params, format!("awgn snr_db={snr_db} tau_ms={tau_ms} fs_mhz={fs_mhz}"))
        }
        FadingArg::Rayleigh => {
            let avg_snr_db = setting(args.avg_snr_db, config, "avg_snr_db", 10.0)?;
            let samples = setting(args.samples, config, "samples", 10u32)?;
            let params = SensingParams::rayleigh(db_to_linear(avg_snr_db), samples);
            (params, format!("rayleigh avg_snr_db={avg_snr_db} samples={samples}"))
        }
    };
    let (default_min, default_max) = match params.fading {
        FadingModel::Awgn => awgn_threshold_bounds(params.time_bandwidth()),
        FadingModel::Rayleigh => {
            chi_square_threshold_bounds(params.time_bandwidth().round() as u32)
        }
    };
    let eta_min = setting(args.eta_min, config, "eta_min", default_min)?;
    let eta_max = setting(args.eta_max, config, "eta_max", default_max)?;
    let points = setting(args.points, config, "points", 50usize)?;
    if points == 0 {
        return Err(Error::InvalidArgument("--points must be at least 1".into()));
    }
    if points >= 2 && !(eta_max > eta_min) {
        return Err(Error::InvalidArgument(format!(
            "--eta-max must exceed --eta-min, got [{eta_min}, {eta_max}]"
        )));
    }

    let curve: Result<Vec<_>> = uniform_grid(eta_min, eta_max, points)
        .into_iter()
        .map(|eta| detection_point(&params, eta))
        .collect();
    let curve = curve?;

    if cli.json {
        let payload = serde_json::json!({
            "detector": label,
            "eta_min": eta_min,
            "eta_max": eta_max,
            "points": curve,
        });
        let mut text = serde_json::to_string_pretty(&payload).expect("serializable");
        text.push('\n');
        emit(cli, out, &text)?;
        return Ok(0);
    }

    let mut table = String::new();
    push_comment(&mut table, "detector", &label);
    push_comment(&mut table, "eta_min", eta_min);
    push_comment(&mut table, "eta_max", eta_max);
    push_comment(&mut table, "points", points);
    push_csv_row(&mut table, &["eta".into(), "p_f".into(), "p_md".into()]);
    for point in &curve {
        push_csv_row(
            &mut table,
            &[fmt_f64(point.eta), fmt_f64(point.p_f), fmt_f64(point.p_md)],
        );
    }
    emit(cli, out, &table)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// solve

fn cmd_solve(cli: &Cli, config: &FileConfig, args: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let run_config = resolve_network(&args.network, config)?;
    let mode = match optional(args.rho, config, "rho")? {
        Some(rho) => ThroughputMode::WeightedUtilization { rho },
        None => ThroughputMode::SuccessProbability,
    };
    let fp = solve_fixed_point(&run_config.mac, &run_config.spectrum)?;
    let metrics = compute(&fp, mode)?;
    // independent residual check of the distribution actually reported
    let matrix = build_chain(&run_config.mac, &run_config.spectrum, fp.p)?;
    let residual = matrix.residual_inf(fp.solution.stationary());

    if cli.json {
        let payload = serde_json::json!({
            "metrics": metrics,
            "p_f_provenance": run_config.pf_note,
            "q": run_config.spectrum.perceived_busy_prob(),
            "fixed_point_iterations": fp.iterations,
            "stationary_residual": residual,
        });
        let mut text = serde_json::to_string_pretty(&payload).expect("serializable");
        text.push('\n');
        emit(cli, out, &text)?;
        return Ok(0);
    }

    let mac = run_config.mac;
    let spectrum = run_config.spectrum;
    let mut report = String::new();
    push_comment(&mut report, "n", mac.n);
    push_comment(&mut report, "m", mac.m);
    push_comment(&mut report, "w", mac.w);
    push_comment(&mut report, "c", spectrum.c);
    push_comment(&mut report, "alpha", spectrum.alpha);
    push_comment(&mut report, "p_d", spectrum.p_d);
    push_comment(&mut report, "p_f", format!("{} ({})", spectrum.p_f, run_config.pf_note));
    push_comment(&mut report, "q", spectrum.perceived_busy_prob());
    let mut line = |key: &str, value: String| {
        let _ = writeln!(report, "{key:<16} = {value}");
    };
    line("tau", fmt_f64(metrics.tau));
    line("p_c", fmt_f64(metrics.p_c));
    line("p_c_one_shot", fmt_f64(metrics.p_c_one_shot));
    line("p_tr", fmt_f64(metrics.p_tr));
    line("p_fr", fmt_f64(metrics.p_fr));
    line("p_coll", fmt_f64(metrics.p_coll_slot));
    line("s", fmt_f64(metrics.throughput));
    line("iterations", fp.iterations.to_string());
    line("residual", format!("{residual:e}"));
    emit(cli, out, &report)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// simulate

fn cmd_simulate(
    cli: &Cli,
    config: &FileConfig,
    args: &SimulateArgs,
    out: &mut dyn Write,
) -> Result<i32> {
    let run_config = resolve_network(&args.network, config)?;
    let slots = setting(args.slots, config, "slots", 1_000_000u64)?;
    let (seed, seed_note) = match optional(args.seed, config, "seed")? {
        Some(seed) => (seed, "given"),
        None => (rand::rng().random::<u64>(), "drawn at random"),
    };
    let mut sim_config = SimConfig::new(run_config.mac, run_config.spectrum, slots, seed);
    if let Some(warmup) = optional(args.warmup, config, "warmup")? {
        sim_config.warmup_slots = warmup;
    }
    let stats = simulate(&sim_config)?;
    let estimates = SimEstimates::from(&stats);

    if cli.json {
        let payload = serde_json::json!({
            "stats": stats,
            "estimates": estimates,
            "p_f_provenance": run_config.pf_note,
            "seed_provenance": seed_note,
        });
        let mut text = serde_json::to_string_pretty(&payload).expect("serializable");
        text.push('\n');
        emit(cli, out, &text)?;
        return Ok(0);
    }

    let mut table = String::new();
    push_comment(&mut table, "p_f", format!("{} ({})", stats.config.spectrum.p_f, run_config.pf_note));
    push_comment(&mut table, "seed", format!("{seed} ({seed_note})"));
    push_comment(&mut table, "warmup_slots", stats.config.warmup_slots);
    let header = [
        "n", "m", "w", "c", "alpha", "p_d", "p_f", "slots", "seed", "measured_slots",
        "attempts", "successes", "collision_slots", "idle_slots", "busy_blocked_slots",
        "pu_overlap_attempts", "tau_hat", "pc_hat", "pc_se", "success_rate_hat",
        "success_rate_se",
    ];
    push_csv_row(&mut table, &header.map(String::from));
    push_csv_row(
        &mut table,
        &[
            stats.config.mac.n.to_string(),
            stats.config.mac.m.to_string(),
            stats.config.mac.w.to_string(),
            stats.config.spectrum.c.to_string(),
            fmt_f64(stats.config.spectrum.alpha),
            fmt_f64(stats.config.spectrum.p_d),
            fmt_f64(stats.config.spectrum.p_f),
            stats.config.slots.to_string(),
            stats.config.seed.to_string(),
            stats.measured_slots.to_string(),
            stats.attempts.to_string(),
            stats.successes.to_string(),
            stats.collision_slots.to_string(),
            stats.idle_slots.to_string(),
            stats.busy_blocked_slots.to_string(),
            stats.pu_overlap_attempts.to_string(),
            fmt_f64(estimates.tau_hat),
            estimates.pc_hat.map(fmt_f64).unwrap_or_default(),
            fmt_f64(estimates.pc_se),
            fmt_f64(estimates.success_rate_hat),
            fmt_f64(estimates.success_rate_se),
        ],
    );
    emit(cli, out, &table)?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// figure

/// Maps a user-facing figure identifier to its sweep family.
pub fn parse_figure_id(id: &str) -> Result<FigureId> {
    match normalize_key(id).as_str() {
        "fig1" | "roc_awgn" => Ok(FigureId::RocAwgn),
        "fig2" | "roc_rayleigh" => Ok(FigureId::RocRayleigh),
        "fig5" | "pc_vs_n_w" => Ok(FigureId::PcVsNW),
        "fig6" | "pc_vs_n_m" => Ok(FigureId::PcVsNM),
        "fig7" | "pc_vs_n_alpha_c" => Ok(FigureId::PcVsNAlphaC),
        "fig8" | "s_vs_pd_w" => Ok(FigureId::SVsPdW),
        "fig9" | "s_vs_pd_m" => Ok(FigureId::SVsPdM),
        "fig10" | "s_vs_pd_c" => Ok(FigureId::SVsPdC),
        other => Err(Error::InvalidArgument(format!(
            "unknown figure id {other:?}; valid ids: fig1 (roc_awgn), fig2 (roc_rayleigh), \
             fig5 (pc_vs_n_w), fig6 (pc_vs_n_m), fig7 (pc_vs_n_alpha_c), fig8 (s_vs_pd_w), \
             fig9 (s_vs_pd_m), fig10 (s_vs_pd_c)"
        ))),
    }
}

fn parse_override(text: &str) -> Result<(Param, Vec<f64>)> {
    let Some((name, values)) = text.split_once('=') else {
        return Err(Error::InvalidArgument(format!(
            "override {text:?} is not of the form param=v1[,v2,...]"
        )));
    };
    let param: Param = name.trim().parse()?;
    let values: Result<Vec<f64>> = values
        .split(',')
        .map(|v| {
            v.trim().parse::<f64>().map_err(|_| {
                Error::InvalidArgument(format!("override value {v:?} is not a number"))
            })
        })
        .collect();
    Ok((param, values?))
}

fn cmd_figure(
    cli: &Cli,
    config: &FileConfig,
    args: &FigureArgs,
    out: &mut dyn Write,
) -> Result<i32> {
    let figure = parse_figure_id(&args.id)?;
    let with_simulation = !figure.is_roc() && !args.no_sim;
    let settings = SimSettings {
        slots: setting(args.slots, config, "slots", SimSettings::default().slots)?,
        warmup_slots: optional(args.warmup, config, "warmup")?,
        seed: setting(args.seed, config, "seed", SimSettings::default().seed)?,
    };

    let mut specs = presets(figure);
    for spec in &mut specs {
        for override_text in &args.set {
            let (param, values) = parse_override(override_text)?;
            spec.override_param(param, values)?;
        }
        spec.with_simulation = with_simulation;
        spec.sim = with_simulation.then_some(settings);
    }
    let result = run_specs(&specs)?;

    if cli.json {
        let payload = serde_json::json!({
            "figure": figure.name(),
            "simulation": with_simulation.then_some(settings),
            "rows": result.rows,
        });
        let mut text = serde_json::to_string_pretty(&payload).expect("serializable");
        text.push('\n');
        emit(cli, out, &text)?;
        return Ok(if result.failed_rows() == 0 { 0 } else { 1 });
    }

    let mut table = String::new();
    push_comment(&mut table, "figure", figure.name());
    if with_simulation {
        push_comment(
            &mut table,
            "simulation",
            format!("slots {} base_seed {}", settings.slots, settings.seed),
        );
    } else {
        push_comment(&mut table, "simulation", "disabled");
    }
    for override_text in &args.set {
        push_comment(&mut table, "override", override_text);
    }
    push_comment(&mut table, "rows", result.rows.len());
    push_comment(&mut table, "failed_rows", result.failed_rows());
    render_figure_csv(&mut table, &result, with_simulation);
    emit(cli, out, &table)?;
    Ok(if result.failed_rows() == 0 { 0 } else { 1 })
}

fn render_figure_csv(table: &mut String, result: &SweepResult, with_simulation: bool) {
    let Some(first) = result.rows.first() else {
        push_csv_row(table, &["series".into(), "error".into()]);
        return;
    };
    // the resolved false alarm is an output column, never a parameter one
    let param_columns: Vec<Param> = first
        .params
        .iter()
        .map(|&(p, _)| p)
        .filter(|p| *p != Param::FalseAlarm)
        .collect();

    let mut header: Vec<String> = vec!["series".into()];
    header.extend(param_columns.iter().map(|p| p.column().to_string()));
    if result.figure_id.is_roc() {
        header.extend(["p_f", "p_d", "p_md"].map(String::from));
    } else {
        header.extend(
            ["p_f", "q", "tau", "p_c", "p_c_one_shot", "p_tr", "p_fr", "p_coll", "s"]
                .map(String::from),
        );
        if with_simulation {
            header.extend(
                [
                    "sim_seed",
                    "sim_slots",
                    "sim_attempts",
                    "sim_tau",
                    "sim_pc",
                    "sim_pc_se",
                    "sim_s",
                    "sim_s_se",
                ]
                .map(String::from),
            );
        }
    }
    header.push("error".into());
    let width = header.len();
    push_csv_row(table, &header);

    for row in &result.rows {
        let mut fields: Vec<String> = vec![row.series.clone()];
        for param in &param_columns {
            fields.push(row.param(*param).map(fmt_f64).unwrap_or_default());
        }
        match &row.outcome {
            RowOutcome::Detection { point } => {
                fields.extend([fmt_f64(point.p_f), fmt_f64(point.p_d), fmt_f64(point.p_md)]);
            }
            RowOutcome::Analytic { metrics } => {
                push_metric_fields(&mut fields, metrics);
            }
            RowOutcome::Simulated { metrics, sim } => {
                push_metric_fields(&mut fields, metrics);
                fields.extend([
                    sim.seed.to_string(),
                    sim.slots.to_string(),
                    sim.attempts.to_string(),
                    fmt_f64(sim.tau_hat),
                    sim.pc_hat.map(fmt_f64).unwrap_or_default(),
                    fmt_f64(sim.pc_se),
                    fmt_f64(sim.success_rate_hat),
                    fmt_f64(sim.success_rate_se),
                ]);
            }
            RowOutcome::Failed { message } => {
                fields.resize(width - 1, String::new());
                fields.push(message.clone());
                push_csv_row(table, &fields);
                continue;
            }
        }
        fields.resize(width - 1, String::new());
        fields.push(String::new());
        push_csv_row(table, &fields);
    }
}

fn push_metric_fields(fields: &mut Vec<String>, metrics: &Metrics) {
    fields.extend([
        fmt_f64(metrics.spectrum.p_f),
        fmt_f64(metrics.spectrum.perceived_busy_prob()),
        fmt_f64(metrics.tau),
        fmt_f64(metrics.p_c),
        fmt_f64(metrics.p_c_one_shot),
        fmt_f64(metrics.p_tr),
        fmt_f64(metrics.p_fr),
        fmt_f64(metrics.p_coll_slot),
        fmt_f64(metrics.throughput),
    ]);
}

// ---------------------------------------------------------------------------
// validate

fn cmd_validate(
    cli: &Cli,
    config: &FileConfig,
    args: &ValidateArgs,
    out: &mut dyn Write,
) -> Result<i32> {
    let tolerance = setting(args.tolerance, config, "tolerance", 0.02)?;
    let settings = SimSettings {
        slots: setting(args.slots, config, "slots", SimSettings::default().slots)?,
        warmup_slots: optional(args.warmup, config, "warmup")?,
        seed: setting(args.seed, config, "seed", SimSettings::default().seed)?,
    };
    let report = validate_all(tolerance, &settings)?;

    if cli.json {
        let mut text = serde_json::to_string_pretty(&report).expect("serializable");
        text.push('\n');
        emit(cli, out, &text)?;
        return Ok(if report.all_passed { 0 } else { 1 });
    }

    let mut table = String::new();
    push_comment(&mut table, "tolerance", tolerance);
    push_comment(&mut table, "slots", settings.slots);
    push_comment(&mut table, "base_seed", settings.seed);
    render_validation_csv(&mut table, &report);
    push_comment(
        &mut table,
        "summary",
        format!(
            "{} of {} comparisons within tolerance {}",
            report.passed_cases,
            report.cases.len(),
            tolerance
        ),
    );
    emit(cli, out, &table)?;
    Ok(if report.all_passed { 0 } else { 1 })
}

fn render_validation_csv(table: &mut String, report: &ValidationReport) {
    let params = [
        Param::Stations,
        Param::MaxStage,
        Param::MinWindow,
        Param::Channels,
        Param::Alpha,
        Param::DetectionProb,
    ];
    let mut header: Vec<String> = vec!["figure".into()];
    header.extend(params.iter().map(|p| p.column().to_string()));
    header.extend(
        [
            "tau_analytic",
            "tau_sim",
            "pc_analytic",
            "pc_sim",
            "s_analytic",
            "s_sim",
            "max_abs_diff",
            "passed",
            "error",
        ]
        .map(String::from),
    );
    push_csv_row(table, &header);

    for case in &report.cases {
        let mut fields: Vec<String> = vec![case.figure_id.name().to_string()];
        for param in params {
            let value = case.params.iter().find(|(p, _)| *p == param).map(|&(_, v)| v);
            fields.push(value.map(fmt_f64).unwrap_or_default());
        }
        match &case.outcome {
            CaseOutcome::Compared(comparison) => {
                let find = |name: &str| {
                    comparison
                        .metrics
                        .iter()
                        .find(|m| m.name == name)
                        .map(|m| (m.analytic, m.simulated, m.abs_diff))
                };
                let mut max_diff = 0.0f64;
                for name in ["tau", "p_c", "success_rate"] {
                    let (analytic, simulated, diff) =
                        find(name).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
                    fields.push(fmt_f64(analytic));
                    fields.push(fmt_f64(simulated));
                    max_diff = max_diff.max(diff);
                }
                fields.push(fmt_f64(max_diff));
                fields.push(if case.passed() { "true" } else { "false" }.to_string());
                fields.push(String::new());
            }
            CaseOutcome::Failed { message } => {
                fields.extend(std::iter::repeat_n(String::new(), 7));
                fields.push("false".to_string());
                fields.push(message.clone());
            }
        }
        push_csv_row(table, &fields);
    }
}
