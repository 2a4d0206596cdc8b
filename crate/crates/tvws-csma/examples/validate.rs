//! Full analytic-versus-simulation validation across the preset
//! collision-probability grids.
//!
//! Every operating point of the three network figure families is solved
//! analytically and independently simulated; transmission probability,
//! collision probability, and success rate must agree within the given
//! tolerance at every point. This is the same sweep the `validate`
//! subcommand runs. The slot budget here is reduced so the example
//! finishes quickly; the command-line default is 1,000,000 slots per
//! point with tolerance 0.02.
//!
//! Run with: cargo run --release --example validate

use tvws_csma::sweep::{validate_all, CaseOutcome, SimSettings};

fn main() -> tvws_csma::Result<()> {
    let settings = SimSettings { slots: 100_000, warmup_slots: None, seed: 0x5EED };
    let tolerance = 0.05;
    let report = validate_all(tolerance, &settings)?;

    let mut worst: Option<(f64, String)> = None;
    for case in &report.cases {
        if let CaseOutcome::Compared(comparison) = &case.outcome {
            for metric in &comparison.metrics {
                let label = format!(
                    "{} ({}) {}",
                    case.figure_id,
                    case.params
                        .iter()
                        .map(|&(p, v)| format!("{}={v}", p.column()))
                        .collect::<Vec<_>>()
                        .join(" "),
                    metric.name
                );
                if worst.as_ref().is_none_or(|(d, _)| metric.abs_diff > *d) {
                    worst = Some((metric.abs_diff, label));
                }
            }
        }
    }

    println!(
        "{} of {} comparisons within tolerance {} at {} slots per point",
        report.passed_cases,
        report.cases.len(),
        report.tolerance,
        settings.slots
    );
    if let Some((diff, label)) = worst {
        println!("largest |analytic - simulated| = {diff:.5} at {label}");
    }
    println!("overall: {}", if report.all_passed { "PASS" } else { "FAIL" });
    Ok(())
}
