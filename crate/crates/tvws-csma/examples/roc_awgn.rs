//! Receiver operating characteristic of the energy detector on a
//! non-fading channel.
//!
//! Sweeps the decision threshold across its useful range for two sensing
//! budgets and prints (threshold, false alarm, missed detection) triples.
//! Longer sensing at higher SNR pushes the whole curve toward the origin.
//!
//! Run with: cargo run --example roc_awgn

use tvws_csma::detection::{db_to_linear, roc_curve, SensingParams};
use tvws_csma::sweep::awgn_threshold_bounds;

fn main() -> tvws_csma::Result<()> {
    for (snr_db, tau_ms) in [(-15.0, 2.0), (-13.0, 4.0)] {
        let params = SensingParams::new(db_to_linear(snr_db), tau_ms * 1e-3, 6e6);
        let (lo, hi) = awgn_threshold_bounds(params.time_bandwidth());
        let curve = roc_curve(&params, lo, hi, 9)?;

        println!("sensing {tau_ms} ms at {snr_db} dB (time-bandwidth {}):", params.time_bandwidth());
        println!("  {:>10} {:>12} {:>12}", "eta", "p_f", "p_md");
        for point in &curve {
            println!("  {:>10.6} {:>12.4e} {:>12.4e}", point.eta, point.p_f, point.p_md);
        }
        println!();
    }
    Ok(())
}
