//! Cross-check one operating point: analytic chain versus slot simulator.
//!
//! The simulator shares no code with the chain solver — it steps stations,
//! counters, and per-channel primary-user activity slot by slot — so
//! agreement here is evidence for the model, not an identity. The
//! comparison report puts each metric side by side with its Monte Carlo
//! standard error.
//!
//! Run with: cargo run --release --example simulate_point

use tvws_csma::chain::{solve_fixed_point, MacParams, SpectrumParams};
use tvws_csma::metrics::{compute, ThroughputMode};
use tvws_csma::sim::{simulate, SimConfig};

fn main() -> tvws_csma::Result<()> {
    let mac = MacParams::new(10, 3, 32);
    let spectrum = SpectrumParams::new(1, 0.5, 0.9, 0.016);

    let fp = solve_fixed_point(&mac, &spectrum)?;
    let analytic = compute(&fp, ThroughputMode::SuccessProbability)?;

    let config = SimConfig::new(mac, spectrum, 1_000_000, 0xC0FFEE);
    let stats = simulate(&config)?;
    let report = stats.compare(&analytic, 0.02)?;

    println!(
        "{} slots simulated ({} measured after warmup), seed {:#x}",
        config.slots, stats.measured_slots, config.seed
    );
    println!();
    println!(
        "  {:<14} {:>12} {:>12} {:>10} {:>10}",
        "metric", "analytic", "simulated", "|diff|", "std err"
    );
    for m in &report.metrics {
        println!(
            "  {:<14} {:>12.6} {:>12.6} {:>10.6} {:>10.6}",
            m.name, m.analytic, m.simulated, m.abs_diff, m.std_error
        );
    }
    println!();
    println!(
        "all within tolerance {}: {}",
        report.tolerance,
        if report.all_within_tolerance { "yes" } else { "NO" }
    );
    Ok(())
}
