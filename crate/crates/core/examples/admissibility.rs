//! Build parameter sets and ask whether a covariance exists for them.
//!
//! `cargo run --example admissibility`

use mfbm::existence::{is_admissible, max_correlation, DEFAULT_PSD_TOL};
use mfbm::params::{pair_kind, validate};
use mfbm::{MfbmParams, SpecialCase};

fn main() -> mfbm::Result<()> {
    let (h1, h2) = (0.2, 0.8);
    let cap = max_correlation(h1, h2, SpecialCase::WellBalanced)?;
    println!("H = ({h1}, {h2}): |rho_12| can be at most {cap:.4} when eta = 0");

    for rho in [0.2, cap, 0.9] {
        let params =
            MfbmParams::independent(vec![h1, h2], vec![1.0, 1.0])?.with_pair(0, 1, rho, 0.0);
        let report = is_admissible(&params, DEFAULT_PSD_TOL);
        println!(
            "  rho = {rho:.4}  admissible = {:5}  min eig = {:+.3e}  C_12 = {:.6}",
            report.admissible,
            report.min_eigenvalue,
            report.coherence.unwrap()
        );
    }

    // H_1 + H_2 = 1 switches to the logarithmic branch.
    let unit = MfbmParams::independent(vec![0.3, 0.7], vec![1.0, 2.0])?.with_pair(0, 1, 0.4, 0.1);
    println!("pair kind at H = (0.3, 0.7): {:?}", pair_kind(&unit, 0, 1)?);

    // Structural problems are collected, not reported one at a time.
    let broken =
        MfbmParams::independent(vec![1.1, 0.5], vec![1.0, -1.0])?.with_pair(0, 1, 1.5, 0.0);
    println!("validation: {}", validate(&broken));
    Ok(())
}
