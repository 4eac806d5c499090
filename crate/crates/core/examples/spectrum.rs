//! Cross-spectral densities of the increments and the coherence constant.
//!
//! `cargo run --example spectrum`

use mfbm::spectral::{coherence, cross_spectral_density, low_freq_modulus};
use mfbm::MfbmParams;

fn main() -> mfbm::Result<()> {
    let params =
        MfbmParams::independent(vec![0.25, 0.65], vec![1.0, 1.0])?.with_pair(0, 1, 0.5, -0.2);
    let delta = 1.0;

    println!(
        "{:>8} {:>13} {:>13} {:>13}",
        "omega", "Re S_12", "Im S_12", "low-freq |S|"
    );
    for omega in [-1.0, 0.01, 0.1, 0.5, 1.0, 3.0] {
        let s = cross_spectral_density(&params, 0, 1, omega, delta)?;
        let lf = low_freq_modulus(&params, 0, 1, omega, delta)?;
        println!("{omega:>8} {:>13.5e} {:>13.5e} {lf:>13.5e}", s.re, s.im);
    }

    // |S_12|^2 / (S_11 S_22) is the same at every frequency.
    let c = coherence(&params, 0, 1)?;
    for omega in [0.05, 0.7, 2.9] {
        let s12 = cross_spectral_density(&params, 0, 1, omega, delta)?;
        let s11 = cross_spectral_density(&params, 0, 0, omega, delta)?.re;
        let s22 = cross_spectral_density(&params, 1, 1, omega, delta)?.re;
        println!(
            "omega = {omega}: |S_12|^2/(S_11 S_22) = {:.12}",
            s12.norm_sqr() / (s11 * s22)
        );
    }
    println!("C_12 = {c:.12}");
    Ok(())
}
