//! Closed-form covariances of the mfBm and of its increments.
//!
//! Lag convention: `γ_ij(h, δ) = E[Δ_δ X_i(t) Δ_δ X_j(t + h)]`, so a positive
//! lag means component `j` is observed later. With that convention
//! `γ_ij(h) = γ_ji(-h)` and the lag blocks satisfy `G(-h) = G(h)ᵀ`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::params::{MfbmParams, PairKind};
use crate::special::{sign, xlogx};

/// `w_ij(h)`, the building block of every cross-covariance.
///
/// `(ρ - η sign(h)) |h|^{H_i+H_j}` for generic pairs, `ρ̃|h| + η̃ h log|h|` when
/// `H_i + H_j = 1`. Zero at `h = 0`.
pub fn w(params: &MfbmParams, i: usize, j: usize, h: f64) -> f64 {
    let rho = params.rho()[(i, j)];
    let eta = params.eta()[(i, j)];
    match params.kind(i, j) {
        PairKind::GenericSum => {
            if h == 0.0 {
                0.0
            } else {
                (rho - eta * sign(h)) * h.abs().powf(params.h_sum(i, j))
            }
        }
        PairKind::UnitSum => rho * h.abs() + eta * xlogx(h),
    }
}

/// `E[X_i(s) X_j(t)]`.
pub fn mfbm_cov(params: &MfbmParams, i: usize, j: usize, s: f64, t: f64) -> f64 {
    let scale = 0.5 * params.sigma()[i] * params.sigma()[j];
    scale * (w(params, i, j, -s) + w(params, i, j, t) - w(params, i, j, t - s))
}

/// `γ_ij(h, δ) = (σ_iσ_j/2) [w(h-δ) - 2w(h) + w(h+δ)]`.
pub fn increment_cov(params: &MfbmParams, i: usize, j: usize, h: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::NonPositiveDelta(delta));
    }
    Ok(increment_cov_unchecked(params, i, j, h, delta))
}

pub(crate) fn increment_cov_unchecked(
    params: &MfbmParams,
    i: usize,
    j: usize,
    h: f64,
    delta: f64,
) -> f64 {
    let scale = 0.5 * params.sigma()[i] * params.sigma()[j];
    // Outer terms summed first so that an even w gives a bitwise-even result.
    scale * ((w(params, i, j, h - delta) + w(params, i, j, h + delta)) - 2.0 * w(params, i, j, h))
}

/// The p×p block `G(h) = (γ_jk(h, δ))`.
#[derive(Clone, Debug, PartialEq)]
pub struct LagBlock {
    pub h: f64,
    pub delta: f64,
    pub block: DMatrix<f64>,
}

pub fn lag_block(params: &MfbmParams, h: f64, delta: f64) -> Result<LagBlock> {
    if !(delta > 0.0) {
        return Err(Error::NonPositiveDelta(delta));
    }
    let p = params.p();
    let block = DMatrix::from_fn(p, p, |i, j| increment_cov_unchecked(params, i, j, h, delta));
    Ok(LagBlock { h, delta, block })
}

/// Constant `κ_ij(sign h)` in `γ_ij(h, δ) ~ σ_iσ_j δ² |h|^{H_i+H_j-2} κ_ij(sign h)`.
pub fn asymptotic_kappa(params: &MfbmParams, i: usize, j: usize, sign_h: f64) -> f64 {
    let s = sign(sign_h);
    let rho = params.rho()[(i, j)];
    let eta = params.eta()[(i, j)];
    match params.kind(i, j) {
        PairKind::GenericSum => {
            let a = params.h_sum(i, j);
            (rho - eta * s) * a * (a - 1.0)
        }
        PairKind::UnitSum => eta * s,
    }
}

/// Large-lag equivalent of `γ_ij(h, δ)`: `(σ_iσ_j/2) δ² |h|^{H_i+H_j-2} κ_ij(sign h)`.
pub fn asymptotic_increment_cov(
    params: &MfbmParams,
    i: usize,
    j: usize,
    h: f64,
    delta: f64,
) -> f64 {
    0.5 * params.sigma()[i]
        * params.sigma()[j]
        * delta
        * delta
        * h.abs().powf(params.h_sum(i, j) - 2.0)
        * asymptotic_kappa(params, i, j, h)
}

/// True iff every stored off-diagonal `η` (or `η̃`) is exactly zero.
pub fn is_time_reversible(params: &MfbmParams) -> bool {
    let p = params.p();
    (0..p).all(|i| (0..p).all(|j| i == j || params.eta()[(i, j)] == 0.0))
}

/// Evaluator for the mfBm covariance matrix function.
#[derive(Clone, Debug)]
pub struct CovMatrixFn {
    params: MfbmParams,
}

impl CovMatrixFn {
    pub fn new(params: MfbmParams) -> Self {
        Self { params }
    }

    pub fn params(&self) -> &MfbmParams {
        &self.params
    }

    /// `Σ(s, t) = (E[X_i(s) X_j(t)])_ij`.
    pub fn sigma(&self, s: f64, t: f64) -> DMatrix<f64> {
        let p = self.params.p();
        DMatrix::from_fn(p, p, |i, j| mfbm_cov(&self.params, i, j, s, t))
    }

    /// `G(h)` for increments of size `delta`.
    pub fn lag(&self, h: f64, delta: f64) -> Result<DMatrix<f64>> {
        lag_block(&self.params, h, delta).map(|b| b.block)
    }
}
