//! Cross-spectral densities of mfBm increments and the coherence function.
//!
//! Fourier convention: `S_ij(ω, δ) = (1/2π) ∫ e^{-ihω} γ_ij(h, δ) dh`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::{MfbmParams, PairKind};
use crate::special::{gamma, sign};

/// One evaluation of `S_ij(ω, δ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralValue {
    pub omega: f64,
    pub value: Complex64,
}

/// Phase factor `τ_ij(sign ω)`.
pub fn tau(params: &MfbmParams, i: usize, j: usize, sign_omega: f64) -> Complex64 {
    let s = sign(sign_omega);
    let rho = params.rho()[(i, j)];
    let eta = params.eta()[(i, j)];
    match params.kind(i, j) {
        PairKind::GenericSum => {
            let half = FRAC_PI_2 * params.h_sum(i, j);
            Complex64::new(rho * half.sin(), -eta * s * half.cos())
        }
        PairKind::UnitSum => Complex64::new(rho, -FRAC_PI_2 * eta * s),
    }
}

/// `|τ_ij|²`: `ρ² sin²(π(H_i+H_j)/2) + η² cos²(π(H_i+H_j)/2)`, or `ρ̃² + (π²/4) η̃²`.
pub(crate) fn tau_modulus_sq(params: &MfbmParams, i: usize, j: usize) -> f64 {
    tau(params, i, j, 1.0).norm_sqr()
}

/// `S_ij(ω, δ) = (σ_iσ_j/π) Γ(H_i+H_j+1) (1 - cos ωδ) / |ω|^{H_i+H_j+1} · τ_ij(sign ω)`.
pub fn cross_spectral_density(
    params: &MfbmParams,
    i: usize,
    j: usize,
    omega: f64,
    delta: f64,
) -> Result<Complex64> {
    if omega == 0.0 || !omega.is_finite() {
        return Err(Error::ZeroFrequency);
    }
    if !(delta > 0.0) {
        return Err(Error::NonPositiveDelta(delta));
    }
    let a = params.h_sum(i, j);
    let amp =
        params.sigma()[i] * params.sigma()[j] / PI * gamma(a + 1.0) * (1.0 - (omega * delta).cos())
            / omega.abs().powf(a + 1.0);
    Ok(tau(params, i, j, omega) * amp)
}

/// The full Hermitian matrix `S(ω, δ)`.
pub fn spectral_matrix(params: &MfbmParams, omega: f64, delta: f64) -> Result<DMatrix<Complex64>> {
    let p = params.p();
    let mut out = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            out[(i, j)] = cross_spectral_density(params, i, j, omega, delta)?;
        }
    }
    Ok(out)
}

/// Low-frequency equivalent of `|S_ij(ω, δ)|`:
/// `(σ_iσ_j/2π) Γ(H_i+H_j+1) δ² |τ_ij| / |ω|^{H_i+H_j-1}`.
pub fn low_freq_modulus(
    params: &MfbmParams,
    i: usize,
    j: usize,
    omega: f64,
    delta: f64,
) -> Result<f64> {
    if omega == 0.0 || !omega.is_finite() {
        return Err(Error::ZeroFrequency);
    }
    if !(delta > 0.0) {
        return Err(Error::NonPositiveDelta(delta));
    }
    let a = params.h_sum(i, j);
    Ok(params.sigma()[i] * params.sigma()[j] / (2.0 * PI)
        * gamma(a + 1.0)
        * delta
        * delta
        * tau_modulus_sq(params, i, j).sqrt()
        / omega.abs().powf(a - 1.0))
}

/// Coherence `|S_ij|² / (S_ii S_jj)`, which does not depend on `ω` or `δ`.
pub fn coherence(params: &MfbmParams, i: usize, j: usize) -> Result<f64> {
    if i == j {
        return Err(Error::SameComponent(i));
    }
    let (hi, hj) = (params.hurst()[i], params.hurst()[j]);
    let gamma_ratio =
        gamma(hi + hj + 1.0).powi(2) / (gamma(2.0 * hi + 1.0) * gamma(2.0 * hj + 1.0));
    Ok(gamma_ratio * tau_modulus_sq(params, i, j) / ((PI * hi).sin() * (PI * hj).sin()))
}
