//! Reproduce a bundled parameter sweep and print a slice of it.
//!
//! Each figure family is a preset grid over network and sensing
//! parameters. This example runs the collision-probability-versus-stations
//! family analytically and prints one series. Raising the detection
//! probability at a fixed sensing operating point also raises the false
//! alarms, so stations perceive the channels busy more often and freeze
//! their counters; frozen stations do not transmit, which thins the
//! collisions — all the way to zero when sensing reports busy always.
//!
//! Run with: cargo run --example figure_sweep

use tvws_csma::sweep::{run_figure, FigureId, Param, RowOutcome};

fn main() -> tvws_csma::Result<()> {
    let result = run_figure(FigureId::PcVsNW, false, None)?;
    println!(
        "figure {}: {} rows, {} failed",
        result.figure_id,
        result.rows.len(),
        result.failed_rows()
    );
    println!();
    println!("collision probability vs. stations (W = 32):");
    println!("  {:>4} {:>10} {:>10} {:>10}", "n", "p_d=0.1", "p_d=0.9", "p_d=1.0");

    for n in 2..=10u32 {
        let mut cells = Vec::new();
        for p_d in [0.1, 0.9, 1.0] {
            let row = result
                .rows
                .iter()
                .find(|r| {
                    r.param(Param::Stations) == Some(f64::from(n))
                        && r.param(Param::DetectionProb) == Some(p_d)
                        && r.param(Param::MinWindow) == Some(32.0)
                })
                .expect("preset grid covers this point");
            match &row.outcome {
                RowOutcome::Analytic { metrics } => cells.push(format!("{:>10.6}", metrics.p_c)),
                other => panic!("expected an analytic row, got {other:?}"),
            }
        }
        println!("  {:>4} {}", n, cells.join(" "));
    }
    Ok(())
}
