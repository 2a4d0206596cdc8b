//! Solve the analytic model exactly at one network operating point.
//!
//! Ten saturated stations contend for a single TV channel whose primary
//! user is on half the time, sensed by a detector with a 90% detection
//! probability. The self-consistent fixed point couples each station's
//! transmission probability to the collision probability it experiences;
//! from the stationary distribution of the full (stage, counter, busy)
//! chain follow the per-slot event probabilities and the throughput.
//!
//! Run with: cargo run --example solve_point

use tvws_csma::chain::{build_chain, solve_fixed_point, MacParams, SpectrumParams};
use tvws_csma::metrics::{compute, ThroughputMode};

fn main() -> tvws_csma::Result<()> {
    let mac = MacParams::new(10, 3, 32);
    let spectrum = SpectrumParams::new(1, 0.5, 0.9, 0.016);

    let fp = solve_fixed_point(&mac, &spectrum)?;
    let metrics = compute(&fp, ThroughputMode::SuccessProbability)?;

    println!("{} stations, backoff {}..{} doubling {} times", mac.n, mac.w, mac.window(mac.m), mac.m);
    println!(
        "{} channel(s), occupied {:.0}% of slots, sensed busy with q = {:.4}",
        spectrum.c,
        spectrum.alpha * 100.0,
        spectrum.perceived_busy_prob()
    );
    println!();
    println!("fixed point after {} iterations:", fp.iterations);
    println!("  transmission probability tau   = {:.6}", metrics.tau);
    println!("  conditional collision prob p_c = {:.6}", metrics.p_c);
    println!("  slot with >=1 transmission     = {:.6}", 1.0 - metrics.p_fr);
    println!("  successful slot fraction       = {:.6}", metrics.p_tr);
    println!("  collided slot fraction         = {:.6}", metrics.p_coll_slot);
    println!("  throughput S                   = {:.6}", metrics.throughput);

    // the reported distribution really is stationary for the reported chain
    let matrix = build_chain(&mac, &spectrum, fp.p)?;
    let residual = matrix.residual_inf(fp.solution.stationary());
    println!();
    println!("stationary residual ||pi P - pi||_inf = {residual:.2e}");
    Ok(())
}
