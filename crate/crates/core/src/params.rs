//! Covariance-level parameterization of a multivariate fractional Brownian motion.
//!
//! A p-variate mfBm is determined (in law) by its Hurst exponents `H`, scale
//! parameters `σ`, and for every pair of components a symmetric correlation
//! coefficient `ρ_ij` plus an antisymmetric coefficient `η_ij`. When
//! `H_i + H_j = 1` the covariance takes a different closed form whose
//! coefficients are conventionally written `ρ̃_ij`, `η̃_ij`; this type stores
//! them in the same `rho`/`eta` slots and [`PairKind`] says how to read them.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default band on `|H_i + H_j - 1|` inside which a pair uses the `H_i + H_j = 1` formulas.
pub const DEFAULT_ONE_TOL: f64 = 1e-9;

const SYMMETRY_TOL: f64 = 1e-12;

/// Which closed form governs the cross-covariance of a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairKind {
    /// `H_i + H_j != 1`: coefficients are `(ρ_ij, η_ij)`.
    GenericSum,
    /// `H_i + H_j = 1` (within `one_tol`): coefficients are `(ρ̃_ij, η̃_ij)`.
    UnitSum,
}

/// The two one-parameter families singled out by their moving-average representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpecialCase {
    /// `M⁻ = 0`.
    Causal,
    /// `M⁻ = M⁺`; time reversible.
    WellBalanced,
}

/// Complete covariance parameterization. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct MfbmParams {
    hurst: Vec<f64>,
    sigma: Vec<f64>,
    rho: DMatrix<f64>,
    eta: DMatrix<f64>,
    one_tol: f64,
}

impl MfbmParams {
    /// Assemble parameters, checking only that the shapes agree.
    ///
    /// Value constraints (ranges, symmetry) are reported by [`validate`].
    pub fn from_parts(
        hurst: Vec<f64>,
        sigma: Vec<f64>,
        rho: DMatrix<f64>,
        eta: DMatrix<f64>,
    ) -> Result<Self> {
        let p = hurst.len();
        if p == 0 {
            return Err(Error::Malformed("p must be at least 1".into()));
        }
        if sigma.len() != p {
            return Err(Error::Malformed(format!(
                "sigma has {} entries, expected {p}",
                sigma.len()
            )));
        }
        for (name, m) in [("rho", &rho), ("eta", &eta)] {
            if m.nrows() != p || m.ncols() != p {
                return Err(Error::Malformed(format!(
                    "{name} is {}x{}, expected {p}x{p}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(Self {
            hurst,
            sigma,
            rho,
            eta,
            one_tol: DEFAULT_ONE_TOL,
        })
    }

    /// Independent components: `ρ = I`, `η = 0`.
    pub fn independent(hurst: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        let p = hurst.len();
        Self::from_parts(hurst, sigma, DMatrix::identity(p, p), DMatrix::zeros(p, p))
    }

    /// Same Hurst exponent, unit scale, common correlation `rho` and `η = 0`.
    pub fn equicorrelated(hurst: Vec<f64>, rho: f64) -> Result<Self> {
        let p = hurst.len();
        let mut out = Self::independent(hurst, vec![1.0; p])?;
        for i in 0..p {
            for j in (i + 1)..p {
                out = out.with_pair(i, j, rho, 0.0);
            }
        }
        Ok(out)
    }

    /// Set `ρ_ij = ρ_ji = rho` and `η_ij = -η_ji = eta`.
    ///
    /// Panics if `i` or `j` is out of range.
    pub fn with_pair(mut self, i: usize, j: usize, rho: f64, eta: f64) -> Self {
        self.rho[(i, j)] = rho;
        self.rho[(j, i)] = rho;
        self.eta[(i, j)] = eta;
        self.eta[(j, i)] = -eta;
        if i == j {
            self.eta[(i, i)] = eta;
        }
        self
    }

    pub fn with_sigma(mut self, sigma: Vec<f64>) -> Result<Self> {
        if sigma.len() != self.p() {
            return Err(Error::Malformed(format!(
                "sigma has {} entries, expected {}",
                sigma.len(),
                self.p()
            )));
        }
        self.sigma = sigma;
        Ok(self)
    }

    pub fn with_one_tol(mut self, one_tol: f64) -> Self {
        self.one_tol = one_tol;
        self
    }

    pub fn p(&self) -> usize {
        self.hurst.len()
    }

    pub fn hurst(&self) -> &[f64] {
        &self.hurst
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn rho(&self) -> &DMatrix<f64> {
        &self.rho
    }

    pub fn eta(&self) -> &DMatrix<f64> {
        &self.eta
    }

    pub fn one_tol(&self) -> f64 {
        self.one_tol
    }

    /// `H_i + H_j`.
    pub fn h_sum(&self, i: usize, j: usize) -> f64 {
        self.hurst[i] + self.hurst[j]
    }

    /// Branch for pair `(i, j)`; callers guarantee the indices are in range.
    pub(crate) fn kind(&self, i: usize, j: usize) -> PairKind {
        if (self.h_sum(i, j) - 1.0).abs() <= self.one_tol {
            PairKind::UnitSum
        } else {
            PairKind::GenericSum
        }
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index < self.p() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index, p: self.p() })
        }
    }

    /// Read the JSON parameter file format.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: ParamFile = serde_json::from_str(s)?;
        file.try_into()
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ParamFile::from(self))?)
    }
}

/// On-disk schema: `{"p":…, "H":[…], "sigma":[…], "rho":[[…]], "eta":[[…]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParamFile {
    pub p: usize,
    #[serde(rename = "H")]
    pub hurst: Vec<f64>,
    pub sigma: Vec<f64>,
    pub rho: Vec<Vec<f64>>,
    pub eta: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub one_tol: Option<f64>,
}

fn nested_to_matrix(name: &str, rows: &[Vec<f64>], p: usize) -> Result<DMatrix<f64>> {
    if rows.len() != p || rows.iter().any(|r| r.len() != p) {
        return Err(Error::Malformed(format!("{name} must be a {p}x{p} array")));
    }
    Ok(DMatrix::from_fn(p, p, |i, j| rows[i][j]))
}

fn matrix_to_nested(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl TryFrom<ParamFile> for MfbmParams {
    type Error = Error;

    fn try_from(file: ParamFile) -> Result<Self> {
        if file.hurst.len() != file.p {
            return Err(Error::Malformed(format!(
                "H has {} entries but p = {}",
                file.hurst.len(),
                file.p
            )));
        }
        let rho = nested_to_matrix("rho", &file.rho, file.p)?;
        let eta = nested_to_matrix("eta", &file.eta, file.p)?;
        let params = MfbmParams::from_parts(file.hurst, file.sigma, rho, eta)?;
        Ok(match file.one_tol {
            Some(tol) => params.with_one_tol(tol),
            None => params,
        })
    }
}

impl From<&MfbmParams> for ParamFile {
    fn from(params: &MfbmParams) -> Self {
        ParamFile {
            p: params.p(),
            hurst: params.hurst.clone(),
            sigma: params.sigma.clone(),
            rho: matrix_to_nested(&params.rho),
            eta: matrix_to_nested(&params.eta),
            one_tol: (params.one_tol != DEFAULT_ONE_TOL).then_some(params.one_tol),
        }
    }
}

/// One failed structural constraint.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NonFinite {
        what: &'static str,
        i: usize,
        j: usize,
    },
    HurstOutOfRange {
        i: usize,
        value: f64,
    },
    SigmaNotPositive {
        i: usize,
        value: f64,
    },
    RhoDiagonalNotOne {
        i: usize,
        value: f64,
    },
    RhoNotSymmetric {
        i: usize,
        j: usize,
    },
    RhoOutOfRange {
        i: usize,
        j: usize,
        value: f64,
    },
    EtaDiagonalNotZero {
        i: usize,
        value: f64,
    },
    EtaNotAntisymmetric {
        i: usize,
        j: usize,
    },
    NegativeOneTol(f64),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonFinite { what, i, j } => write!(f, "{what}[{i}][{j}] is not finite"),
            Violation::HurstOutOfRange { i, value } => {
                write!(f, "H[{i}] = {value} outside (0,1)")
            }
            Violation::SigmaNotPositive { i, value } => {
                write!(f, "sigma[{i}] = {value} not positive")
            }
            Violation::RhoDiagonalNotOne { i, value } => {
                write!(f, "rho[{i}][{i}] = {value}, expected 1")
            }
            Violation::RhoNotSymmetric { i, j } => {
                write!(f, "rho not symmetric at ({i},{j})")
            }
            Violation::RhoOutOfRange { i, j, value } => {
                write!(f, "rho out of [-1,1] at ({i},{j}): {value}")
            }
            Violation::EtaDiagonalNotZero { i, value } => {
                write!(f, "eta[{i}][{i}] = {value}, expected 0")
            }
            Violation::EtaNotAntisymmetric { i, j } => {
                write!(f, "eta not antisymmetric at ({i},{j})")
            }
            Violation::NegativeOneTol(v) => write!(f, "one_tol = {v} is negative"),
        }
    }
}

/// Every violated structural invariant. Empty means structurally valid, which
/// does not by itself mean the covariance exists (see [`crate::existence`]).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::Invalid(self.to_string()))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Collect every structural violation.
pub fn validate(params: &MfbmParams) -> ValidationReport {
    let p = params.p();
    let mut v = Vec::new();
    if !(params.one_tol >= 0.0) {
        v.push(Violation::NegativeOneTol(params.one_tol));
    }
    for (i, &h) in params.hurst.iter().enumerate() {
        if !h.is_finite() {
            v.push(Violation::NonFinite { what: "H", i, j: 0 });
        } else if !(h > 0.0 && h < 1.0) {
            v.push(Violation::HurstOutOfRange { i, value: h });
        }
    }
    for (i, &s) in params.sigma.iter().enumerate() {
        if !s.is_finite() {
            v.push(Violation::NonFinite {
                what: "sigma",
                i,
                j: 0,
            });
        } else if !(s > 0.0) {
            v.push(Violation::SigmaNotPositive { i, value: s });
        }
    }
    for i in 0..p {
        for j in 0..p {
            let r = params.rho[(i, j)];
            let e = params.eta[(i, j)];
            if !r.is_finite() {
                v.push(Violation::NonFinite { what: "rho", i, j });
                continue;
            }
            if !e.is_finite() {
                v.push(Violation::NonFinite { what: "eta", i, j });
                continue;
            }
            if i == j {
                if (r - 1.0).abs() > SYMMETRY_TOL {
                    v.push(Violation::RhoDiagonalNotOne { i, value: r });
                }
                if e.abs() > SYMMETRY_TOL {
                    v.push(Violation::EtaDiagonalNotZero { i, value: e });
                }
                continue;
            }
            if r.abs() > 1.0 {
                v.push(Violation::RhoOutOfRange { i, j, value: r });
            }
            if j > i {
                let rt = params.rho[(j, i)];
                let et = params.eta[(j, i)];
                if rt.is_finite() && (r - rt).abs() > SYMMETRY_TOL {
                    v.push(Violation::RhoNotSymmetric { i, j });
                }
                if et.is_finite() && (e + et).abs() > SYMMETRY_TOL {
                    v.push(Violation::EtaNotAntisymmetric { i, j });
                }
            }
        }
    }
    ValidationReport { violations: v }
}

/// Branch governing pair `(i, j)`.
pub fn pair_kind(params: &MfbmParams, i: usize, j: usize) -> Result<PairKind> {
    params.check_index(i)?;
    params.check_index(j)?;
    Ok(params.kind(i, j))
}

/// `η'_ij = (1 - H_i - H_j) η_ij`, the coefficient that stays continuous as
/// `H_i + H_j → 1` (where it tends to `η̃_ij`).
pub fn eta_reparam(params: &MfbmParams, i: usize, j: usize) -> Result<f64> {
    if pair_kind(params, i, j)? == PairKind::UnitSum {
        return Err(Error::UnitSumPair { i, j });
    }
    Ok(reparam_eta(params.h_sum(i, j), params.eta[(i, j)]))
}

/// `η ↦ (1 - h_sum) η`.
pub fn reparam_eta(h_sum: f64, eta: f64) -> f64 {
    (1.0 - h_sum) * eta
}

/// Inverse of [`reparam_eta`]; `h_sum` must differ from 1.
pub fn unreparam_eta(h_sum: f64, eta_prime: f64) -> f64 {
    eta_prime / (1.0 - h_sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two(h: (f64, f64), rho: f64, eta: f64) -> MfbmParams {
        MfbmParams::independent(vec![h.0, h.1], vec![1.0, 1.0])
            .unwrap()
            .with_pair(0, 1, rho, eta)
    }

    #[test]
    fn scalar_identity_case_is_valid() {
        let p = MfbmParams::independent(vec![0.5], vec![1.0]).unwrap();
        assert!(validate(&p).is_valid());
    }

    #[test]
    fn rho_out_of_range_reported() {
        let p = two((0.3, 0.6), 1.2, 0.0);
        let report = validate(&p);
        assert!(!report.is_valid());
        assert!(report.to_string().contains("rho out of [-1,1]"));
    }

    #[test]
    fn eta_must_be_antisymmetric() {
        let mut eta = DMatrix::zeros(2, 2);
        eta[(0, 1)] = 0.3;
        eta[(1, 0)] = 0.3;
        let p =
            MfbmParams::from_parts(vec![0.3, 0.6], vec![1.0, 1.0], DMatrix::identity(2, 2), eta)
                .unwrap();
        let report = validate(&p);
        assert_eq!(
            report.violations,
            vec![Violation::EtaNotAntisymmetric { i: 0, j: 1 }]
        );
        assert!(report.to_string().contains("eta not antisymmetric"));
    }

    #[test]
    fn report_collects_all_violations() {
        let mut rho = DMatrix::identity(2, 2);
        rho[(0, 0)] = 0.9;
        rho[(0, 1)] = 0.5;
        rho[(1, 0)] = 0.4;
        let p = MfbmParams::from_parts(vec![1.2, 0.5], vec![-1.0, 1.0], rho, DMatrix::zeros(2, 2))
            .unwrap();
        let report = validate(&p);
        assert_eq!(report.violations.len(), 4, "{report}");
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        assert!(MfbmParams::from_parts(
            vec![0.3, 0.6],
            vec![1.0],
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 2)
        )
        .is_err());
        let bad =
            r#"{"p":2,"H":[0.3,0.6],"sigma":[1,1],"rho":[[1,0.2],[0.2]],"eta":[[0,0],[0,0]]}"#;
        assert!(matches!(
            MfbmParams::from_json_str(bad),
            Err(Error::Malformed(_))
        ));
    }

    #[test]
    fn pair_kind_examples() {
        let p = two((0.3, 0.7), 0.0, 0.0).with_one_tol(1e-12);
        assert_eq!(pair_kind(&p, 0, 1).unwrap(), PairKind::UnitSum);
        let p = two((0.3, 0.6), 0.0, 0.0);
        assert_eq!(pair_kind(&p, 0, 1).unwrap(), PairKind::GenericSum);
        let p = two((0.5, 0.5), 0.0, 0.0);
        assert_eq!(pair_kind(&p, 0, 1).unwrap(), PairKind::UnitSum);
        assert!(matches!(
            pair_kind(&p, 0, 2),
            Err(Error::IndexOutOfRange { index: 2, p: 2 })
        ));
    }

    #[test]
    fn eta_reparam_examples() {
        assert!((eta_reparam(&two((0.2, 0.3), 0.0, 0.5), 0, 1).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(eta_reparam(&two((0.2, 0.3), 0.0, 0.0), 0, 1).unwrap(), 0.0);
        assert!((eta_reparam(&two((0.6, 0.6), 0.0, 1.0), 0, 1).unwrap() + 0.2).abs() < 1e-15);
        assert!(matches!(
            eta_reparam(&two((0.4, 0.6), 0.0, 1.0), 0, 1),
            Err(Error::UnitSumPair { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let p = two((0.3, 0.6), 0.4, 0.1);
        let s = p.to_json_string().unwrap();
        assert!(s.contains("\"H\""));
        assert_eq!(MfbmParams::from_json_str(&s).unwrap(), p);
    }

    proptest! {
        #[test]
        fn validate_matches_invariants(
            h in prop::collection::vec(-0.2f64..1.2, 3),
            s in prop::collection::vec(-0.5f64..2.0, 3),
            r in prop::collection::vec(-1.3f64..1.3, 9),
            e in prop::collection::vec(-1.0f64..1.0, 9),
            symmetrize in any::<bool>(),
        ) {
            let mut rho = DMatrix::from_row_slice(3, 3, &r);
            let mut eta = DMatrix::from_row_slice(3, 3, &e);
            if symmetrize {
                for i in 0..3 {
                    rho[(i, i)] = 1.0;
                    eta[(i, i)] = 0.0;
                    for j in (i + 1)..3 {
                        rho[(j, i)] = rho[(i, j)];
                        eta[(j, i)] = -eta[(i, j)];
                    }
                }
            }
            let expected = h.iter().all(|&x| x > 0.0 && x < 1.0)
                && s.iter().all(|&x| x > 0.0)
                && (0..3).all(|i| (0..3).all(|j| {
                    let sym = rho[(i, j)] == rho[(j, i)] && eta[(i, j)] == -eta[(j, i)];
                    let diag = i != j || (rho[(i, i)] == 1.0 && eta[(i, i)] == 0.0);
                    sym && diag && rho[(i, j)].abs() <= 1.0
                }));
            let params = MfbmParams::from_parts(h, s, rho, eta).unwrap();
            prop_assert_eq!(validate(&params).is_valid(), expected);
        }

        #[test]
        fn reparam_inverse_is_identity(hs in 0.0f64..2.0, eta in -5.0f64..5.0) {
            prop_assume!((hs - 1.0).abs() > 1e-3);
            let back = unreparam_eta(hs, reparam_eta(hs, eta));
            prop_assert!((back - eta).abs() <= 1e-12 * eta.abs().max(1.0));
        }

        #[test]
        fn pair_kind_symmetric(h0 in 0.01f64..0.99, h1 in 0.01f64..0.99) {
            let p = two((h0, h1), 0.0, 0.0);
            prop_assert_eq!(pair_kind(&p, 0, 1).unwrap(), pair_kind(&p, 1, 0).unwrap());
        }
    }
}
