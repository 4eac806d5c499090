//! Increment cross-covariances and their large-lag behaviour.
//!
//! `cargo run --example covariance`

use mfbm::covariance::{asymptotic_increment_cov, increment_cov, is_time_reversible, CovMatrixFn};
use mfbm::MfbmParams;

fn main() -> mfbm::Result<()> {
    let params =
        MfbmParams::independent(vec![0.3, 0.75], vec![1.0, 2.0])?.with_pair(0, 1, 0.4, 0.15);
    println!("time reversible: {}", is_time_reversible(&params));

    println!(
        "{:>6} {:>14} {:>14} {:>14}",
        "h", "gamma_12(h)", "gamma_21(h)", "asymptotic"
    );
    for h in [1.0, 2.0, 5.0, 20.0, 100.0, 1000.0] {
        let g12 = increment_cov(&params, 0, 1, h, 1.0)?;
        let g21 = increment_cov(&params, 1, 0, h, 1.0)?;
        let asy = asymptotic_increment_cov(&params, 0, 1, h, 1.0);
        println!("{h:>6} {g12:>14.6e} {g21:>14.6e} {asy:>14.6e}");
    }

    // Covariance of (X(s), X(t)) as a matrix.
    let cov = CovMatrixFn::new(params);
    println!("Cov(X(1), X(2)) = {:.5}", cov.sigma(1.0, 2.0));
    println!("lag block at h = 3, delta = 0.5: {:.5}", cov.lag(3.0, 0.5)?);
    Ok(())
}
