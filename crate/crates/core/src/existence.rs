//! Admissibility of a parameter set: does it define a valid mfBm covariance?
//!
//! The test is positive semidefiniteness of the Hermitian matrix
//! `Q_ij = Γ(H_i+H_j+1) τ_ij(1)`. For two components this is equivalent to
//! the coherence being at most one, and the admissible `(ρ, η')` set is the
//! inside of an ellipse.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{unreparam_eta, MfbmParams, PairKind, SpecialCase};
use crate::special::gamma;
use crate::spectral::{coherence, tau};

/// Default relative tolerance of the PSD test.
pub const DEFAULT_PSD_TOL: f64 = 1e-10;

/// `Q_ij = Γ(H_i+H_j+1) τ_ij(1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianQ {
    pub entries: DMatrix<Complex64>,
}

impl HermitianQ {
    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .entries
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub fn build_q(params: &MfbmParams) -> HermitianQ {
    let p = params.p();
    let entries = DMatrix::from_fn(p, p, |i, j| {
        tau(params, i, j, 1.0) * gamma(params.h_sum(i, j) + 1.0)
    });
    HermitianQ { entries }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    pub min_eigenvalue: f64,
    pub max_abs_entry: f64,
    /// `C_12`, only for two components.
    pub coherence: Option<f64>,
}

impl AdmissibilityReport {
    pub fn into_result(self) -> Result<Self> {
        if self.admissible {
            Ok(self)
        } else {
            Err(Error::NotAdmissible {
                min_eigenvalue: self.min_eigenvalue,
            })
        }
    }
}

/// Admissible iff `λ_min(Q) >= -psd_tol * max |Q_ij|`.
pub fn is_admissible(params: &MfbmParams, psd_tol: f64) -> AdmissibilityReport {
    let q = build_q(params);
    let min_eigenvalue = q.eigenvalues()[0];
    let max_abs_entry = q.max_abs_entry();
    AdmissibilityReport {
        admissible: min_eigenvalue >= -psd_tol * max_abs_entry,
        min_eigenvalue,
        max_abs_entry,
        coherence: (params.p() == 2).then(|| coherence(params, 0, 1).expect("distinct components")),
    }
}

/// Largest `|ρ_12|` for which the causal or well-balanced two-component model exists.
pub fn max_correlation(h1: f64, h2: f64, case: SpecialCase) -> Result<f64> {
    for h in [h1, h2] {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::HurstOutOfRange(h));
        }
    }
    let gammas = gamma(2.0 * h1 + 1.0) * gamma(2.0 * h2 + 1.0) / gamma(h1 + h2 + 1.0).powi(2);
    let sines = (PI * h1).sin() * (PI * h2).sin() / (PI / 2.0 * (h1 + h2)).sin().powi(2);
    let lambda = match case {
        SpecialCase::Causal => (PI / 2.0 * (h1 - h2)).cos().powi(2),
        SpecialCase::WellBalanced => 1.0,
    };
    Ok((gammas * sines * lambda).sqrt())
}

/// A point `(ρ_12, η'_12)` on the curve `C_12 = 1`.
///
/// `eta_prime` is `(1 - H_1 - H_2) η_12`, or `η̃_12` itself when `H_1 + H_2 = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub rho: f64,
    pub eta_prime: f64,
}

/// Two-component parameters with unit scales from `(ρ, η')`.
pub fn pair_from_eta_prime(h1: f64, h2: f64, rho: f64, eta_prime: f64) -> Result<MfbmParams> {
    let base = MfbmParams::independent(vec![h1, h2], vec![1.0, 1.0])?;
    let eta = match base.kind(0, 1) {
        PairKind::UnitSum => eta_prime,
        PairKind::GenericSum => unreparam_eta(h1 + h2, eta_prime),
    };
    Ok(base.with_pair(0, 1, rho, eta))
}

/// `n_points` points on the admissibility ellipse, at equally spaced ray angles
/// starting on the positive `ρ` axis.
///
/// Each ray is bisected on `C_12(t·u) - 1` for 60 iterations. Since `C_12` is a
/// quadratic form in `(ρ, η')`, the root is also `1/sqrt(C_12(u))`; bisection
/// starts from a bracket around that value.
pub fn admissible_boundary(h1: f64, h2: f64, n_points: usize) -> Result<Vec<BoundaryPoint>> {
    if n_points == 0 {
        return Err(Error::Degenerate(
            "at least one boundary point is needed".into(),
        ));
    }
    let c_at = |rho: f64, eta_prime: f64| -> Result<f64> {
        coherence(&pair_from_eta_prime(h1, h2, rho, eta_prime)?, 0, 1)
    };
    (0..n_points)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / n_points as f64;
            let (u_rho, u_eta) = (theta.cos(), theta.sin());
            let c_unit = c_at(u_rho, u_eta)?;
            if !(c_unit > 0.0) || !c_unit.is_finite() {
                return Err(Error::Degenerate(format!(
                    "coherence vanishes along direction ({u_rho:.3}, {u_eta:.3})"
                )));
            }
            let guess = c_unit.sqrt().recip();
            let (mut lo, mut hi) = (0.5 * guess, 2.0 * guess);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if c_at(mid * u_rho, mid * u_eta)? <= 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t = 0.5 * (lo + hi);
            Ok(BoundaryPoint {
                rho: t * u_rho,
                eta_prime: t * u_eta,
            })
        })
        .collect()
}

/// Row of the maximal-correlation surface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MaxCorrPoint {
    pub h1: f64,
    pub h2: f64,
    pub max_rho: f64,
}

/// Maximal correlation on the `n × n` grid `H = k/(n+1)`, `k = 1..=n`.
pub fn max_corr_grid(n: usize, case: SpecialCase) -> Vec<MaxCorrPoint> {
    let hs: Vec<f64> = (1..=n).map(|k| k as f64 / (n + 1) as f64).collect();
    let mut out = Vec::with_capacity(n * n);
    for &h1 in &hs {
        for &h2 in &hs {
            let max_rho = max_correlation(h1, h2, case).expect("grid stays inside (0, 1)");
            out.push(MaxCorrPoint { h1, h2, max_rho });
        }
    }
    out
}
