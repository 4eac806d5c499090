//! Conversions between the covariance parameters, the spectral matrix `A`
//! and the moving-average pair `(M⁺, M⁻)`.
//!
//! `A` is normalized by `AA* = T` with `T_ij = (σ_iσ_j/2π) Γ(H_i+H_j+1) τ_ij(1)`.
//! Its global phase is fixed so that a real `A` corresponds to the
//! well-balanced model `M⁺ = M⁻`. With `θ_i = π(H_i - 1/2)/2` and
//! `g_i = Γ(H_i + 1/2)`, row `i` of `A` is
//!
//! ```text
//! A_i· = g_i/sqrt(2π) [ sin θ_i (M⁺ + M⁻)_i· - i cos θ_i (M⁺ - M⁻)_i· ]
//! ```
//!
//! which is inverted by `M± = sqrt(π/2) (A1/(g sin θ) ∓ A2/(g cos θ))` row-wise.
//! The inverse needs `sin θ_i ≠ 0`, i.e. `H_i ≠ 1/2`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::existence::{is_admissible, DEFAULT_PSD_TOL};
use crate::params::{MfbmParams, PairKind, SpecialCase};
use crate::special::{beta, gamma};
use crate::spectral::tau;

/// Complex `p×p` matrix of the spectral representation.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMatrixA {
    pub entries: DMatrix<Complex64>,
    /// Diagonal shift added to the target before factorization (0 when none was needed).
    pub shift: f64,
}

impl SpectralMatrixA {
    pub fn gram(&self) -> DMatrix<Complex64> {
        &self.entries * self.entries.adjoint()
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        self.entries.map(|z| z.re)
    }

    pub fn imag_part(&self) -> DMatrix<f64> {
        self.entries.map(|z| z.im)
    }
}

/// Real moving-average matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct MAMatrices {
    pub m_plus: DMatrix<f64>,
    pub m_minus: DMatrix<f64>,
}

/// `T_ij = (σ_iσ_j/2π) Γ(H_i+H_j+1) τ_ij(1)`.
pub fn spectral_target(params: &MfbmParams) -> DMatrix<Complex64> {
    let p = params.p();
    let s = params.sigma();
    DMatrix::from_fn(p, p, |i, j| {
        tau(params, i, j, 1.0) * (s[i] * s[j] / (2.0 * PI) * gamma(params.h_sum(i, j) + 1.0))
    })
}

/// Lower Cholesky factor of the spectral target.
///
/// Fails with [`Error::NotAdmissible`] when the target is not PSD. A target
/// that is PSD but numerically singular is shifted by `psd_tol · max|T|` on
/// the diagonal before factorizing; the shift is recorded.
pub fn a_from_params(params: &MfbmParams) -> Result<SpectralMatrixA> {
    is_admissible(params, DEFAULT_PSD_TOL).into_result()?;
    let target = spectral_target(params);
    if let Some(ch) = target.clone().cholesky() {
        return Ok(SpectralMatrixA {
            entries: ch.unpack(),
            shift: 0.0,
        });
    }
    let max_abs = target.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let shift = DEFAULT_PSD_TOL * max_abs;
    let p = params.p();
    let shifted = &target + DMatrix::<Complex64>::identity(p, p) * Complex64::from(shift);
    let ch = shifted.cholesky().ok_or_else(|| {
        Error::Degenerate("spectral target is not factorizable even after the PSD shift".into())
    })?;
    Ok(SpectralMatrixA {
        entries: ch.unpack(),
        shift,
    })
}

/// Closed-form factor for two components.
///
/// When `ρ_12 = η_12 = 0` the closed form is `0/0` off the diagonal; the
/// diagonal factor `sqrt(T_ii)` is returned instead.
pub fn a_explicit_p2(params: &MfbmParams) -> Result<SpectralMatrixA> {
    if params.p() != 2 {
        return Err(Error::Invalid(format!(
            "the explicit factor needs p = 2, got p = {}",
            params.p()
        )));
    }
    let report = is_admissible(params, DEFAULT_PSD_TOL);
    let report = report.into_result()?;
    let c = report.coherence.expect("p = 2");
    if c == 0.0 {
        let t = spectral_target(params);
        let entries = DMatrix::from_fn(2, 2, |i, j| {
            if i == j {
                Complex64::from(t[(i, i)].re.sqrt())
            } else {
                Complex64::from(0.0)
            }
        });
        return Ok(SpectralMatrixA {
            entries,
            shift: 0.0,
        });
    }
    let k_off = ((1.0 - c).max(0.0) / c).sqrt();
    let h = params.hurst();
    let sig = params.sigma();
    let entries = DMatrix::from_fn(2, 2, |i, j| {
        let a = params.h_sum(i, j);
        let lambda = sig[i] / (2.0 * PI.sqrt()) * gamma(a + 1.0)
            / (gamma(2.0 * h[j] + 1.0) * (PI * h[j]).sin()).sqrt();
        let rho = params.rho()[(i, j)];
        let eta = params.eta()[(i, j)];
        let (s, ec) = match params.kind(i, j) {
            PairKind::GenericSum => ((FRAC_PI_2 * a).sin(), eta * (FRAC_PI_2 * a).cos()),
            PairKind::UnitSum => (1.0, FRAC_PI_2 * eta),
        };
        let k = if i == j { 0.0 } else { k_off };
        Complex64::new(rho * s + ec * k, rho * k * s - ec) * lambda
    });
    Ok(SpectralMatrixA {
        entries,
        shift: 0.0,
    })
}

fn check_not_half(hurst: &[f64]) -> Result<()> {
    match hurst.iter().position(|&h| (h - 0.5).abs() < 1e-12) {
        Some(index) => Err(Error::HalfHurst { index }),
        None => Ok(()),
    }
}

fn theta(h: f64) -> f64 {
    PI * (h - 0.5) / 2.0
}

/// `(M⁺, M⁻)` from `A`.
pub fn ma_from_a(a: &SpectralMatrixA, hurst: &[f64]) -> Result<MAMatrices> {
    let p = hurst.len();
    if a.entries.nrows() != p || a.entries.ncols() != p {
        return Err(Error::Malformed(format!("A is not {p}x{p}")));
    }
    check_not_half(hurst)?;
    let c = FRAC_PI_2.sqrt();
    let mut m_plus = DMatrix::zeros(p, p);
    let mut m_minus = DMatrix::zeros(p, p);
    for i in 0..p {
        let g = gamma(hurst[i] + 0.5);
        let (st, ct) = theta(hurst[i]).sin_cos();
        for j in 0..p {
            let x = a.entries[(i, j)].re / (g * st);
            let y = a.entries[(i, j)].im / (g * ct);
            m_plus[(i, j)] = c * (x - y);
            m_minus[(i, j)] = c * (x + y);
        }
    }
    Ok(MAMatrices { m_plus, m_minus })
}

/// `A` from `(M⁺, M⁻)`; inverse of [`ma_from_a`].
pub fn a_from_ma(ma: &MAMatrices, hurst: &[f64]) -> SpectralMatrixA {
    let p = hurst.len();
    let entries = DMatrix::from_fn(p, p, |i, j| {
        let d = gamma(hurst[i] + 0.5) / (2.0 * PI).sqrt();
        let (st, ct) = theta(hurst[i]).sin_cos();
        let (mp, mm) = (ma.m_plus[(i, j)], ma.m_minus[(i, j)]);
        Complex64::new(d * st * (mp + mm), -d * ct * (mp - mm))
    });
    SpectralMatrixA {
        entries,
        shift: 0.0,
    }
}

/// Covariance parameters of the moving-average process with kernels `M±`.
pub fn params_from_ma(ma: &MAMatrices, hurst: &[f64]) -> Result<MfbmParams> {
    let p = hurst.len();
    for m in [&ma.m_plus, &ma.m_minus] {
        if m.nrows() != p || m.ncols() != p {
            return Err(Error::Malformed(format!("M matrices must be {p}x{p}")));
        }
    }
    for &h in hurst {
        if !(h > 0.0 && h < 1.0) {
            return Err(Error::HurstOutOfRange(h));
        }
    }
    let (mp, mm) = (&ma.m_plus, &ma.m_minus);
    let app = mp * mp.transpose();
    let amm = mm * mm.transpose();
    let apm = mp * mm.transpose();
    let amp = mm * mp.transpose();

    let mut sigma = vec![0.0; p];
    for i in 0..p {
        let h = hurst[i];
        let sin_h = (PI * h).sin();
        let var = beta(h + 0.5, h + 0.5) / sin_h
            * (app[(i, i)] + amm[(i, i)] - 2.0 * sin_h * apm[(i, i)]);
        if !(var > 0.0) {
            return Err(Error::Degenerate(format!(
                "component {i} has variance {var:.3e}"
            )));
        }
        sigma[i] = var.sqrt();
    }

    let base = MfbmParams::independent(hurst.to_vec(), sigma.clone())?;
    let mut rho = DMatrix::identity(p, p);
    let mut eta = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            if i == j {
                continue;
            }
            let (hi, hj) = (hurst[i], hurst[j]);
            let b = beta(hi + 0.5, hj + 0.5);
            let ss = sigma[i] * sigma[j];
            let sum_pm = app[(i, j)] + amm[(i, j)];
            let diff_pm = app[(i, j)] - amm[(i, j)];
            let cross_sum = apm[(i, j)] + amp[(i, j)];
            let cross_diff = apm[(i, j)] - amp[(i, j)];
            match base.kind(i, j) {
                PairKind::GenericSum => {
                    let sa = (PI * (hi + hj)).sin();
                    let (ci, cj) = ((PI * hi).cos(), (PI * hj).cos());
                    rho[(i, j)] = b / sa * (sum_pm * (ci + cj) - cross_sum * sa) / ss;
                    eta[(i, j)] = b / sa * (diff_pm * (ci - cj) - cross_diff * sa) / ss;
                }
                PairKind::UnitSum => {
                    let half = 0.5 * ((PI * hi).sin() + (PI * hj).sin());
                    rho[(i, j)] = b * (half * sum_pm - cross_sum) / ss;
                    eta[(i, j)] = (hj - hi) * diff_pm / ss;
                }
            }
        }
    }
    MfbmParams::from_parts(hurst.to_vec(), sigma, rho, eta)
}

/// Replace `η` by the value implied by the causal or well-balanced model for the given `ρ`.
pub fn special_case_eta(params: &MfbmParams, case: SpecialCase) -> Result<MfbmParams> {
    let p = params.p();
    let h = params.hurst();
    let mut eta = DMatrix::zeros(p, p);
    if case == SpecialCase::Causal {
        for i in 0..p {
            for j in 0..p {
                if i == j {
                    continue;
                }
                let rho = params.rho()[(i, j)];
                eta[(i, j)] = match params.kind(i, j) {
                    PairKind::GenericSum => {
                        -rho * (FRAC_PI_2 * (h[i] + h[j])).tan() * (FRAC_PI_2 * (h[i] - h[j])).tan()
                    }
                    PairKind::UnitSum => {
                        if (h[i] - 0.5).abs() < 1e-12 {
                            return Err(Error::HalfHurst { index: i });
                        }
                        rho * 2.0 / (PI * (PI * h[i]).tan())
                    }
                };
            }
        }
    }
    Ok(MfbmParams::from_parts(
        h.to_vec(),
        params.sigma().to_vec(),
        params.rho().clone(),
        eta,
    )?
    .with_one_tol(params.one_tol()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::is_time_reversible;
    use crate::params::validate;
    use proptest::prelude::*;

    fn rel_close(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, tol: f64) -> bool {
        let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        (a - b).iter().all(|z| z.norm() <= tol * scale)
    }

    fn pair(h: (f64, f64), sigma: (f64, f64), rho: f64, eta: f64) -> MfbmParams {
        MfbmParams::independent(vec![h.0, h.1], vec![sigma.0, sigma.1])
            .unwrap()
            .with_pair(0, 1, rho, eta)
    }

    #[test]
    fn scalar_white_noise_factor() {
        let p = MfbmParams::independent(vec![0.5], vec![1.0]).unwrap();
        let a = a_from_params(&p).unwrap();
        assert!((a.entries[(0, 0)].re - (2.0 * PI).sqrt().recip()).abs() < 1e-15);
        assert_eq!(a.shift, 0.0);
    }

    #[test]
    fn independent_gives_diagonal_a() {
        let p = MfbmParams::independent(vec![0.3, 0.8], vec![1.0, 2.0]).unwrap();
        for a in [a_from_params(&p).unwrap(), a_explicit_p2(&p).unwrap()] {
            assert_eq!(a.entries[(0, 1)], Complex64::from(0.0));
            assert_eq!(a.entries[(1, 0)], Complex64::from(0.0));
            assert!(rel_close(&a.gram(), &spectral_target(&p), 1e-14));
        }
    }

    #[test]
    fn inadmissible_is_rejected() {
        let p = pair((0.1, 0.8), (1.0, 1.0), 0.6, 0.0);
        assert!(matches!(
            a_from_params(&p),
            Err(Error::NotAdmissible { .. })
        ));
        assert!(matches!(
            a_explicit_p2(&p),
            Err(Error::NotAdmissible { .. })
        ));
    }

    #[test]
    fn explicit_factor_matches_target() {
        for (h, rho, eta) in [
            ((0.3, 0.6), 0.4, 0.2),
            ((0.2, 0.9), -0.3, 0.5),
            ((0.3, 0.7), 0.5, 0.1),
            ((0.5, 0.5), 0.2, -0.3),
            ((0.75, 0.8), 0.6, -0.2),
        ] {
            let p = pair(h, (1.3, 0.7), rho, eta);
            let a = a_explicit_p2(&p).unwrap();
            assert!(rel_close(&a.gram(), &spectral_target(&p), 1e-12), "{h:?}");
        }
        assert!(
            a_explicit_p2(&MfbmParams::independent(vec![0.3; 3], vec![1.0; 3]).unwrap()).is_err()
        );
    }

    #[test]
    fn explicit_factor_continuous_across_unit_sum() {
        let (rho, eta_prime) = (0.3, 0.2);
        let unit = a_explicit_p2(&pair((0.35, 0.65), (1.0, 1.0), rho, eta_prime)).unwrap();
        for eps in [1e-6, -1e-6] {
            let h = (0.35, 0.65 + eps);
            let eta = eta_prime / (1.0 - h.0 - h.1);
            let near = a_explicit_p2(&pair(h, (1.0, 1.0), rho, eta)).unwrap();
            assert!((&near.entries - &unit.entries)
                .iter()
                .all(|z| z.norm() < 1e-5));
        }
    }

    #[test]
    fn real_a_is_well_balanced() {
        let a = SpectralMatrixA {
            entries: DMatrix::from_row_slice(2, 2, &[0.4, 0.0, 0.1, 0.3]).map(Complex64::from),
            shift: 0.0,
        };
        let ma = ma_from_a(&a, &[0.3, 0.8]).unwrap();
        assert_eq!(ma.m_plus, ma.m_minus);
        let p = params_from_ma(&ma, &[0.3, 0.8]).unwrap();
        assert_eq!(p.eta()[(0, 1)], 0.0);
        assert!(is_time_reversible(&p));
    }

    #[test]
    fn half_hurst_rejected() {
        let p = MfbmParams::independent(vec![0.5, 0.3], vec![1.0, 1.0]).unwrap();
        let a = a_from_params(&p).unwrap();
        assert!(matches!(
            ma_from_a(&a, p.hurst()),
            Err(Error::HalfHurst { index: 0 })
        ));
    }

    #[test]
    fn scalar_beta_formula() {
        let h: f64 = 0.7;
        let ma = MAMatrices {
            m_plus: DMatrix::identity(1, 1),
            m_minus: DMatrix::identity(1, 1),
        };
        let p = params_from_ma(&ma, &[h]).unwrap();
        let expected = beta(1.2, 1.2) / (0.7 * PI).sin() * (2.0 - 2.0 * (0.7 * PI).sin());
        assert!((p.sigma()[0].powi(2) - expected).abs() < 1e-14);

        // Scalar round trip.
        let q = MfbmParams::independent(vec![h], vec![1.7]).unwrap();
        let back =
            params_from_ma(&ma_from_a(&a_from_params(&q).unwrap(), &[h]).unwrap(), &[h]).unwrap();
        assert!((back.sigma()[0] - 1.7).abs() < 1e-12);
    }

    #[test]
    fn unit_sum_well_balanced_has_zero_eta_tilde() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, -0.2, 0.8]);
        let ma = MAMatrices {
            m_plus: m.clone(),
            m_minus: m,
        };
        let p = params_from_ma(&ma, &[0.3, 0.7]).unwrap();
        assert_eq!(p.eta()[(0, 1)], 0.0);
    }

    #[test]
    fn zero_variance_rejected() {
        let ma = MAMatrices {
            m_plus: DMatrix::zeros(2, 2),
            m_minus: DMatrix::zeros(2, 2),
        };
        assert!(matches!(
            params_from_ma(&ma, &[0.3, 0.7]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn special_case_examples() {
        let p = pair((0.4, 0.4), (1.0, 1.0), 0.5, 0.0);
        assert_eq!(
            special_case_eta(&p, SpecialCase::Causal).unwrap().eta()[(0, 1)],
            0.0
        );

        let p = pair((0.3, 0.6), (1.0, 1.0), 0.3, 0.7);
        let wb = special_case_eta(&p, SpecialCase::WellBalanced).unwrap();
        assert!(is_time_reversible(&wb));
        let causal = special_case_eta(&p, SpecialCase::Causal).unwrap();
        let expected = -0.3 * (0.45 * PI).tan() * (-0.15 * PI).tan();
        assert!((causal.eta()[(0, 1)] - expected).abs() < 1e-14 * expected.abs());
        assert!((causal.eta()[(1, 0)] + expected).abs() < 1e-14 * expected.abs());

        let p = pair((0.5, 0.5), (1.0, 1.0), 0.3, 0.0);
        assert!(matches!(
            special_case_eta(&p, SpecialCase::Causal),
            Err(Error::HalfHurst { .. })
        ));
    }

    #[test]
    fn causal_a_has_fixed_phase_ratio() {
        // M⁻ = 0 maps to A1 = -tan(θ) A2 row-wise, and back to M⁻ = 0.
        let h = [0.3, 0.75];
        let ma = MAMatrices {
            m_plus: DMatrix::from_row_slice(2, 2, &[0.9, -0.4, 0.2, 1.1]),
            m_minus: DMatrix::zeros(2, 2),
        };
        let a = a_from_ma(&ma, &h);
        for i in 0..2 {
            for j in 0..2 {
                let z = a.entries[(i, j)];
                assert!((z.re + theta(h[i]).tan() * z.im).abs() < 1e-14);
            }
        }
        let back = ma_from_a(&a, &h).unwrap();
        assert!(back.m_minus.iter().all(|x| x.abs() < 1e-14));
        assert!((back.m_plus - ma.m_plus).iter().all(|x| x.abs() < 1e-14));
    }

    proptest! {
        #[test]
        fn causal_eta_matches_ma_with_zero_minus(
            h0 in 0.05f64..0.95, h1 in 0.05f64..0.95,
            m in proptest::collection::vec(-1.0f64..1.0, 4),
        ) {
            let hurst = [h0, h1];
            let ma = MAMatrices {
                m_plus: DMatrix::from_row_slice(2, 2, &m),
                m_minus: DMatrix::zeros(2, 2),
            };
            let from_ma = match params_from_ma(&ma, &hurst) {
                Ok(p) => p,
                Err(_) => return Ok(()),
            };
            prop_assume!(from_ma.rho()[(0, 1)].abs() > 1e-6);
            let causal = special_case_eta(&from_ma, SpecialCase::Causal).unwrap();
            let (a, b) = (causal.eta()[(0, 1)], from_ma.eta()[(0, 1)]);
            prop_assert!((a - b).abs() <= 1e-8 * (1.0 + b.abs()), "{} vs {}", a, b);
        }

        #[test]
        fn gram_fidelity_and_round_trip(
            h in proptest::collection::vec(0.05f64..0.95, 3),
            sigma in proptest::collection::vec(0.5f64..2.0, 3),
            r in proptest::collection::vec(-0.5f64..0.5, 3),
            e in proptest::collection::vec(-0.5f64..0.5, 3),
        ) {
            prop_assume!(h.iter().all(|x| (x - 0.5).abs() >= 0.05));
            let p = MfbmParams::independent(h.clone(), sigma).unwrap()
                .with_pair(0, 1, r[0], e[0]).with_pair(0, 2, r[1], e[1]).with_pair(1, 2, r[2], e[2]);
            prop_assume!(is_admissible(&p, DEFAULT_PSD_TOL).admissible);
            let a = a_from_params(&p).unwrap();
            prop_assume!(a.shift == 0.0);
            prop_assert!(rel_close(&a.gram(), &spectral_target(&p), 1e-12));
            let back = params_from_ma(&ma_from_a(&a, &h).unwrap(), &h).unwrap();
            prop_assert!(validate(&back).is_valid());
            for i in 0..3 {
                prop_assert!((back.sigma()[i] / p.sigma()[i] - 1.0).abs() < 1e-8);
                for j in 0..3 {
                    prop_assert!((back.rho()[(i, j)] - p.rho()[(i, j)]).abs() < 1e-8);
                    prop_assert!((back.eta()[(i, j)] - p.eta()[(i, j)]).abs() < 1e-8);
                }
            }
        }
    }
}
