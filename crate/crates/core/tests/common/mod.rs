//! Independent oracles and random parameter draws shared by integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use mfbm::existence::{is_admissible, DEFAULT_PSD_TOL};
use mfbm::MfbmParams;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

fn is_unit(params: &MfbmParams, i: usize, j: usize) -> bool {
    i != j && (params.hurst()[i] + params.hurst()[j] - 1.0).abs() <= params.one_tol()
}

/// `w_ij(h)` written out from its definition.
pub fn w_oracle(params: &MfbmParams, i: usize, j: usize, h: f64) -> f64 {
    let (rho, eta) = (params.rho()[(i, j)], params.eta()[(i, j)]);
    if h == 0.0 {
        return 0.0;
    }
    if is_unit(params, i, j) {
        rho * h.abs() + eta * h * h.abs().ln()
    } else {
        let a = params.hurst()[i] + params.hurst()[j];
        (rho - eta * h.signum()) * h.abs().powf(a)
    }
}

/// `E ΔX_i(t) ΔX_j(t+h)` for increments of length `delta`.
pub fn gamma_oracle(params: &MfbmParams, i: usize, j: usize, h: f64, delta: f64) -> f64 {
    let s = params.sigma()[i] * params.sigma()[j] / 2.0;
    s * (w_oracle(params, i, j, h - delta) - 2.0 * w_oracle(params, i, j, h)
        + w_oracle(params, i, j, h + delta))
}

/// Closed-form coherence constant `C_ij`.
pub fn coherence_oracle(params: &MfbmParams, i: usize, j: usize) -> f64 {
    let (hi, hj) = (params.hurst()[i], params.hurst()[j]);
    let a = hi + hj;
    let (rho, eta) = (params.rho()[(i, j)], params.eta()[(i, j)]);
    let tau_sq = if is_unit(params, i, j) {
        rho * rho + (PI / 2.0 * eta).powi(2)
    } else {
        (rho * (PI * a / 2.0).sin()).powi(2) + (eta * (PI * a / 2.0).cos()).powi(2)
    };
    tau_sq * gamma(a + 1.0).powi(2)
        / (gamma(2.0 * hi + 1.0) * gamma(2.0 * hj + 1.0) * (PI * hi).sin() * (PI * hj).sin())
}

/// Random admissible parameters: off-diagonal `ρ, η` are shrunk until the PSD test passes.
///
/// With `avoid_half`, every `|H_i - 1/2| >= 0.05`.
pub fn random_admissible(rng: &mut ChaCha8Rng, p: usize, avoid_half: bool) -> MfbmParams {
    let hurst: Vec<f64> = (0..p)
        .map(|_| loop {
            let h = rng.random_range(0.05..0.95);
            if !avoid_half || (h - 0.5f64).abs() >= 0.05 {
                break h;
            }
        })
        .collect();
    let sigma: Vec<f64> = (0..p).map(|_| rng.random_range(0.5..2.0)).collect();
    let pairs: Vec<(usize, usize, f64, f64)> = (0..p)
        .flat_map(|i| ((i + 1)..p).map(move |j| (i, j)))
        .map(|(i, j)| {
            (
                i,
                j,
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            )
        })
        .collect();
    let mut scale = 1.0;
    loop {
        let mut params = MfbmParams::independent(hurst.clone(), sigma.clone()).unwrap();
        for &(i, j, rho, eta) in &pairs {
            params = params.with_pair(i, j, scale * rho, scale * eta);
        }
        if is_admissible(&params, DEFAULT_PSD_TOL).admissible {
            return params;
        }
        scale *= 0.7;
    }
}
