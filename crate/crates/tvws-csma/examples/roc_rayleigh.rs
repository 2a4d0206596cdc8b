//! Detector operating curves under Rayleigh fading.
//!
//! The detection probability averages the finite-sample energy statistic
//! over the exponential SNR distribution; the false-alarm probability is
//! the matching chi-square tail of the same statistic under noise only.
//! Fading flattens the curves: even generous average SNR leaves a heavy
//! missed-detection tail compared to the AWGN detector.
//!
//! Run with: cargo run --example roc_rayleigh

use tvws_csma::detection::{db_to_linear, roc_curve, SensingParams};
use tvws_csma::sweep::chi_square_threshold_bounds;

fn main() -> tvws_csma::Result<()> {
    let samples = 10;
    for avg_snr_db in [10.0, 20.0] {
        let params = SensingParams::rayleigh(db_to_linear(avg_snr_db), samples);
        let (lo, hi) = chi_square_threshold_bounds(samples);
        let curve = roc_curve(&params, lo, hi, 9)?;

        println!("{samples}-sample detector, average SNR {avg_snr_db} dB:");
        println!("  {:>10} {:>12} {:>12}", "eta", "p_f", "p_md");
        for point in &curve {
            println!("  {:>10.4} {:>12.4e} {:>12.4e}", point.eta, point.p_f, point.p_md);
        }
        println!();
    }
    Ok(())
}
