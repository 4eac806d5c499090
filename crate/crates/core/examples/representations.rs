//! Spectral matrix A, moving-average matrices M+/M-, and the way back to parameters.
//!
//! `cargo run --example representations`

use mfbm::params::validate;
use mfbm::representations::{
    a_from_params, ma_from_a, params_from_ma, special_case_eta, spectral_target, MAMatrices,
};
use mfbm::{MfbmParams, SpecialCase};
use nalgebra::DMatrix;

fn main() -> mfbm::Result<()> {
    let params =
        MfbmParams::independent(vec![0.3, 0.8], vec![1.0, 1.5])?.with_pair(0, 1, 0.35, 0.1);

    let a = a_from_params(&params)?;
    println!("A = {:.5}", a.entries);
    let residual = (a.gram() - spectral_target(&params)).norm();
    println!("|A A* - target| = {residual:.2e}");

    let ma = ma_from_a(&a, params.hurst())?;
    println!("M+ = {:.5}M- = {:.5}", ma.m_plus, ma.m_minus);

    let back = params_from_ma(&ma, params.hurst())?;
    println!(
        "recovered rho_12 = {:.12}, eta_12 = {:.12}",
        back.rho()[(0, 1)],
        back.eta()[(0, 1)]
    );
    println!("recovered set valid: {}", validate(&back).is_valid());

    // A purely backward-looking kernel (M- = 0) lands on the causal eta.
    let one_sided = MAMatrices {
        m_plus: ma.m_plus.clone(),
        m_minus: DMatrix::zeros(2, 2),
    };
    let from_past = params_from_ma(&one_sided, params.hurst())?;
    let causal = special_case_eta(&from_past, SpecialCase::Causal)?;
    println!(
        "M- = 0: eta_12 = {:.10}, causal eta_12 for the same rho = {:.10}",
        from_past.eta()[(0, 1)],
        causal.eta()[(0, 1)]
    );
    Ok(())
}
