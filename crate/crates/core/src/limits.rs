//! Partial sums of superlinear processes and their mfBm limit.
//!
//! `Z_i(t) = Σ_j Σ_k ψ_ij(t-k) ε_j(k)` with independent unit-variance
//! innovation sequences `ε_j`, and `S_n(τ)_i = n^{-d_i-1/2} Σ_{t=1}^{[nτ]} Z_i(t)`.
//! Each `ψ_ij` is a sum of a one-sided kernel on `k > 0` (side `Plus`) and one
//! on `k < 0` (side `Minus`), each power-law (long or negative memory) or
//! summable.
//!
//! Power kernels are realized as `ψ(k) = (α/d)(k^d - (k-1)^d)` for `k ≥ 2`,
//! which behaves like `α k^{d-1}` and has closed-form partial sums.

use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::covariance::mfbm_cov;
use crate::error::{Error, Result};
use crate::params::MfbmParams;
use crate::representations::{params_from_ma, MAMatrices};
use crate::rng::substream;
use crate::stats::{replicate_mean, Estimate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `0 < d < 1/2`.
    PowerPos,
    /// `-1/2 < d < 0`, kernel sums to zero.
    PowerNeg,
    /// `d = 0`, `α` is the kernel's sum.
    Summable,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Plus,
    Minus,
}

/// One-sided kernel of `ψ_ij`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelTerm {
    pub i: usize,
    pub j: usize,
    pub side: Side,
    pub regime: Regime,
    #[serde(default)]
    pub d: f64,
    pub alpha: f64,
}

impl KernelTerm {
    fn check(&self, p: usize) -> Result<()> {
        if self.i >= p || self.j >= p {
            return Err(Error::InvalidKernel(format!(
                "term ({}, {}) out of range for p = {p}",
                self.i, self.j
            )));
        }
        if !(self.alpha.is_finite() && self.alpha != 0.0) {
            return Err(Error::InvalidKernel(format!(
                "alpha must be finite and nonzero, got {}",
                self.alpha
            )));
        }
        let ok = match self.regime {
            Regime::PowerPos => self.d > 0.0 && self.d < 0.5,
            Regime::PowerNeg => self.d > -0.5 && self.d < 0.0,
            Regime::Summable => self.d == 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidKernel(format!(
                "d = {} is not allowed for {:?}",
                self.d, self.regime
            )))
        }
    }
}

/// All kernel terms of a `p`-component superlinear process.
///
/// On disk component indices are 1-based:
/// `{"p": 1, "truncation": null, "terms": [{"i": 1, "j": 1, "side": "plus", "regime": "power-pos", "d": 0.2, "alpha": 1.0}]}`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpec {
    pub p: usize,
    pub terms: Vec<KernelTerm>,
    /// Support bound `K`; `4n` when `None`.
    pub truncation: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct KernelFile {
    p: usize,
    #[serde(default)]
    truncation: Option<usize>,
    terms: Vec<KernelTerm>,
}

impl KernelSpec {
    pub fn new(p: usize, terms: Vec<KernelTerm>) -> Result<Self> {
        let spec = Self {
            p,
            terms,
            truncation: None,
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn with_truncation(mut self, k: usize) -> Self {
        self.truncation = Some(k);
        self
    }

    /// Single causal power kernel `ψ(k) ≈ α k^{d-1}`, `k > 0`.
    pub fn single_causal(d: f64, alpha: f64) -> Result<Self> {
        let regime = if d > 0.0 {
            Regime::PowerPos
        } else {
            Regime::PowerNeg
        };
        Self::new(
            1,
            vec![KernelTerm {
                i: 0,
                j: 0,
                side: Side::Plus,
                regime,
                d,
                alpha,
            }],
        )
    }

    fn check(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::InvalidKernel("p must be positive".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for t in &self.terms {
            t.check(self.p)?;
            if !seen.insert((t.i, t.j, t.side)) {
                return Err(Error::InvalidKernel(format!(
                    "duplicate term ({}, {}, {:?})",
                    t.i, t.j, t.side
                )));
            }
        }
        for i in 0..self.p {
            if !self.terms.iter().any(|t| t.i == i) {
                return Err(Error::InvalidKernel(format!(
                    "component {i} has no kernel term"
                )));
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: KernelFile = serde_json::from_str(s)?;
        let mut terms = Vec::with_capacity(file.terms.len());
        for mut t in file.terms {
            if t.i == 0 || t.j == 0 {
                return Err(Error::InvalidKernel("component indices are 1-based".into()));
            }
            t.i -= 1;
            t.j -= 1;
            terms.push(t);
        }
        let mut spec = Self::new(file.p, terms)?;
        spec.truncation = file.truncation;
        Ok(spec)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let file = KernelFile {
            p: self.p,
            truncation: self.truncation,
            terms: self
                .terms
                .iter()
                .map(|t| KernelTerm {
                    i: t.i + 1,
                    j: t.j + 1,
                    ..*t
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    fn resolve_truncation(&self, n: usize) -> Result<usize> {
        let k = self.truncation.unwrap_or(4 * n);
        if k < n {
            return Err(Error::InvalidKernel(format!(
                "truncation K = {k} is below n = {n}"
            )));
        }
        Ok(k)
    }
}

/// Coefficients `ψ(k)` for `k = -K..=K`, stored at index `k + K`.
///
/// The `PowerNeg` correction at `k = 0` makes the untruncated kernel sum to 0,
/// so the realized sum equals minus the dropped tail `(α/d) K^d`.
pub fn realize_kernel(term: &KernelTerm, truncation: usize) -> Vec<f64> {
    let big_k = truncation;
    let mut one_sided = vec![0.0; big_k + 1];
    let (d, alpha) = (term.d, term.alpha);
    match term.regime {
        Regime::Summable => one_sided[0] = alpha,
        Regime::PowerPos | Regime::PowerNeg => {
            if big_k >= 1 {
                one_sided[1] = if term.regime == Regime::PowerPos {
                    alpha / d
                } else {
                    alpha
                };
            }
            for k in 2..=big_k {
                let kf = k as f64;
                one_sided[k] = alpha / d * (kf.powf(d) - (kf - 1.0).powf(d));
            }
            if term.regime == Regime::PowerNeg {
                let realized: f64 = one_sided[1..].iter().sum();
                one_sided[0] = -realized + alpha / d * (big_k as f64).powf(d);
            }
        }
    }
    let mut out = vec![0.0; 2 * big_k + 1];
    for (k, v) in one_sided.into_iter().enumerate() {
        match term.side {
            Side::Plus => out[big_k + k] = v,
            Side::Minus => out[big_k - k] = v,
        }
    }
    out
}

/// `ψ_ij` summed over both sides, on `-K..=K`.
fn combined_kernels(spec: &KernelSpec, big_k: usize) -> Vec<Vec<Option<Vec<f64>>>> {
    let p = spec.p;
    let mut out = vec![vec![None; p]; p];
    for t in &spec.terms {
        let psi = realize_kernel(t, big_k);
        let slot: &mut Option<Vec<f64>> = &mut out[t.i][t.j];
        match slot {
            Some(acc) => acc.iter_mut().zip(&psi).for_each(|(a, b)| *a += b),
            None => *slot = Some(psi),
        }
    }
    out
}

/// Law of the innovations; both are zero-mean with unit variance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseLaw {
    Gaussian,
    Rademacher,
}

impl NoiseLaw {
    fn draw<R: Rng>(self, rng: &mut R) -> f64 {
        match self {
            NoiseLaw::Gaussian => rng.sample(StandardNormal),
            NoiseLaw::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

/// Limiting mfBm of the normalized partial sums.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitTarget {
    /// `d_i`: largest exponent in row `i`.
    pub d: Vec<f64>,
    /// `α⁺_ij / d_i` over terms with `d⁺_ij = d_i`; for Brownian rows, `α⁺_ij`.
    pub m_plus: DMatrix<f64>,
    /// `-α⁻_ij / d_i` over terms with `d⁻_ij = d_i`; for Brownian rows, `α⁻_ij`.
    pub m_minus: DMatrix<f64>,
    pub params: MfbmParams,
}

const SAME_D_TOL: f64 = 1e-12;

pub fn limit_target(spec: &KernelSpec) -> Result<LimitTarget> {
    spec.check()?;
    let p = spec.p;
    let d: Vec<f64> = (0..p)
        .map(|i| {
            spec.terms
                .iter()
                .filter(|t| t.i == i)
                .map(|t| t.d)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let zero_rows = d.iter().filter(|&&di| di == 0.0).count();
    let mut m_plus: DMatrix<f64> = DMatrix::zeros(p, p);
    let mut m_minus: DMatrix<f64> = DMatrix::zeros(p, p);

    if zero_rows == p {
        // Brownian limit: X_i = Σ_j a_ij W_j.
        for t in spec.terms.iter().filter(|t| t.d == 0.0) {
            match t.side {
                Side::Plus => m_plus[(t.i, t.j)] += t.alpha,
                Side::Minus => m_minus[(t.i, t.j)] += t.alpha,
            }
        }
        let a = &m_plus + &m_minus;
        let cov = &a * a.transpose();
        let sigma: Vec<f64> = (0..p).map(|i| cov[(i, i)].sqrt()).collect();
        if sigma.iter().any(|s| !(*s > 0.0)) {
            return Err(Error::Degenerate(
                "a Brownian component has zero variance".into(),
            ));
        }
        let rho = DMatrix::from_fn(p, p, |i, j| {
            if i == j {
                1.0
            } else {
                cov[(i, j)] / (sigma[i] * sigma[j])
            }
        });
        let params = MfbmParams::from_parts(vec![0.5; p], sigma, rho, DMatrix::zeros(p, p))?;
        return Ok(LimitTarget {
            d,
            m_plus,
            m_minus,
            params,
        });
    }
    if zero_rows > 0 {
        return Err(Error::InvalidKernel(
            "rows with d_i = 0 cannot be mixed with rows with d_i != 0".into(),
        ));
    }

    // An anticausal kernel weighs x in (0, τ) by +(α/d) x^d, while the M- kernel
    // (τ-x)_-^d - (-x)_-^d is -x^d there: hence the sign flip.
    for t in &spec.terms {
        if (t.d - d[t.i]).abs() <= SAME_D_TOL {
            let value = t.alpha / d[t.i];
            match t.side {
                Side::Plus => m_plus[(t.i, t.j)] += value,
                Side::Minus => m_minus[(t.i, t.j)] -= value,
            }
        }
    }
    let hurst: Vec<f64> = d.iter().map(|di| di + 0.5).collect();
    let ma = MAMatrices {
        m_plus: m_plus.clone(),
        m_minus: m_minus.clone(),
    };
    let params = params_from_ma(&ma, &hurst)?;
    Ok(LimitTarget {
        d,
        m_plus,
        m_minus,
        params,
    })
}

/// Precomputed partial-sum weights `W_T(k) = Σ_{t=1}^{T} ψ_ij(t-k)` over
/// innovations `k = 1-K ..= n+K`.
struct PartialSumWeights {
    n: usize,
    big_k: usize,
    /// `[τ][i][j]`, each of length `n + 2K`.
    weights: Vec<Vec<Vec<Option<Vec<f64>>>>>,
    scale: Vec<f64>,
}

impl PartialSumWeights {
    fn new(spec: &KernelSpec, limit_d: &[f64], n: usize, tau_grid: &[f64]) -> Result<Self> {
        let big_k = spec.resolve_truncation(n)?;
        let kernels = combined_kernels(spec, big_k);
        let len = n + 2 * big_k;
        let p = spec.p;
        let mut weights = Vec::with_capacity(tau_grid.len());
        for &tau in tau_grid {
            if !(0.0..=1.0).contains(&tau) {
                return Err(Error::InvalidConfig(format!(
                    "tau = {tau} is outside [0, 1]"
                )));
            }
            let steps = (n as f64 * tau).floor() as i64;
            let mut per_tau = vec![vec![None; p]; p];
            for i in 0..p {
                for j in 0..p {
                    let Some(psi) = &kernels[i][j] else { continue };
                    // cs[x + K + 1] = Σ_{l = -K}^{x} ψ(l)
                    let mut cs = vec![0.0; psi.len() + 1];
                    for (idx, v) in psi.iter().enumerate() {
                        cs[idx + 1] = cs[idx] + v;
                    }
                    let kk = big_k as i64;
                    let prefix = |x: i64| -> f64 { cs[(x.clamp(-kk - 1, kk) + kk + 1) as usize] };
                    let w: Vec<f64> = (0..len)
                        .map(|idx| {
                            let k = idx as i64 + 1 - kk;
                            prefix(steps - k) - prefix(-k)
                        })
                        .collect();
                    per_tau[i][j] = Some(w);
                }
            }
            weights.push(per_tau);
        }
        let scale = limit_d
            .iter()
            .map(|di| (n as f64).powf(-di - 0.5))
            .collect();
        Ok(Self {
            n,
            big_k,
            weights,
            scale,
        })
    }

    fn innovations_len(&self) -> usize {
        self.n + 2 * self.big_k
    }
}

/// `S_n(τ)` for every replicate: one `|τ grid| × p` matrix each.
pub fn simulate_partial_sums(
    spec: &KernelSpec,
    noise: NoiseLaw,
    n: usize,
    tau_grid: &[f64],
    seed: u64,
    replicates: usize,
) -> Result<Vec<DMatrix<f64>>> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be positive".into()));
    }
    let target = limit_target(spec)?;
    let w = PartialSumWeights::new(spec, &target.d, n, tau_grid)?;
    let p = spec.p;
    let len = w.innovations_len();
    let out = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let mut rng = substream(seed, r);
            let eps: Vec<Vec<f64>> = (0..p)
                .map(|_| (0..len).map(|_| noise.draw(&mut rng)).collect())
                .collect();
            DMatrix::from_fn(tau_grid.len(), p, |ti, i| {
                let mut s = 0.0;
                for (j, e) in eps.iter().enumerate() {
                    if let Some(wij) = &w.weights[ti][i][j] {
                        s += wij.iter().zip(e).map(|(a, b)| a * b).sum::<f64>();
                    }
                }
                s * w.scale[i]
            })
        })
        .collect();
    Ok(out)
}

/// One sample of `Z(1), …, Z(n)` (`n × p`) by FFT convolution, together
/// with the innovations `ε_j(k)`, `k = 1-K ..= n+K`, that produced it.
pub fn superlinear_path(
    spec: &KernelSpec,
    noise: NoiseLaw,
    n: usize,
    seed: u64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    spec.check()?;
    let big_k = spec.resolve_truncation(n)?;
    let kernels = combined_kernels(spec, big_k);
    let p = spec.p;
    let len = n + 2 * big_k;
    let mut rng = substream(seed, 0);
    let eps = DMatrix::from_fn(len, p, |_, _| 0.0).map(|_: f64| noise.draw(&mut rng));

    let size = (len + 2 * big_k + 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let spectra: Vec<Vec<Complex64>> = (0..p)
        .map(|j| {
            let mut buf = vec![Complex64::default(); size];
            for (idx, slot) in buf.iter_mut().take(len).enumerate() {
                *slot = Complex64::from(eps[(idx, j)]);
            }
            fwd.process(&mut buf);
            buf
        })
        .collect();

    let mut z = DMatrix::zeros(n, p);
    for i in 0..p {
        let mut acc = vec![Complex64::default(); size];
        for j in 0..p {
            let Some(psi) = &kernels[i][j] else { continue };
            let mut buf = vec![Complex64::default(); size];
            for (idx, v) in psi.iter().enumerate() {
                buf[idx] = Complex64::from(*v);
            }
            fwd.process(&mut buf);
            for (a, (b, c)) in acc.iter_mut().zip(buf.iter().zip(&spectra[j])) {
                *a += b * c;
            }
        }
        inv.process(&mut acc);
        // Linear convolution index q = (k + K - 1 + K) + ... : Z(t) sits at q = t + 2K - 1.
        for t in 1..=n {
            z[(t - 1, i)] = acc[t + 2 * big_k - 1].re / size as f64;
        }
    }
    Ok((z, eps))
}

/// Empirical versus limiting covariance of `S_n(τ)_i` and `S_n(τ)_j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LimitComparison {
    pub n: usize,
    pub tau: f64,
    pub i: usize,
    pub j: usize,
    pub empirical_cov: f64,
    pub target_cov: f64,
    pub mc_stderr: f64,
}

/// Compare `E S_n(τ)_i S_n(τ)_j` with `E X_i(τ) X_j(τ)` for every pair and `τ`.
pub fn compare_limits(
    spec: &KernelSpec,
    noise: NoiseLaw,
    n: usize,
    tau_grid: &[f64],
    seed: u64,
    replicates: usize,
) -> Result<Vec<LimitComparison>> {
    let target = limit_target(spec)?;
    let sums = simulate_partial_sums(spec, noise, n, tau_grid, seed, replicates)?;
    let p = spec.p;
    let mut rows = Vec::new();
    for (ti, &tau) in tau_grid.iter().enumerate() {
        for i in 0..p {
            for j in i..p {
                let products: Vec<f64> = sums.iter().map(|s| s[(ti, i)] * s[(ti, j)]).collect();
                let Estimate { estimate, stderr } = replicate_mean(&products);
                rows.push(LimitComparison {
                    n,
                    tau,
                    i,
                    j,
                    empirical_cov: estimate,
                    target_cov: mfbm_cov(&target.params, i, j, tau, tau),
                    mc_stderr: stderr,
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::existence::{is_admissible, DEFAULT_PSD_TOL};
    use crate::special::beta;
    use std::f64::consts::PI;

    fn term(i: usize, j: usize, side: Side, regime: Regime, d: f64, alpha: f64) -> KernelTerm {
        KernelTerm {
            i,
            j,
            side,
            regime,
            d,
            alpha,
        }
    }

    #[test]
    fn summable_is_delta() {
        let psi = realize_kernel(&term(0, 0, Side::Plus, Regime::Summable, 0.0, 1.0), 5);
        assert_eq!(psi.iter().sum::<f64>(), 1.0);
        assert_eq!(psi[5], 1.0);
    }

    #[test]
    fn power_neg_zero_sum_with_tail() {
        let (d, alpha, k) = (-0.3, 1.5, 1000);
        for side in [Side::Plus, Side::Minus] {
            let psi = realize_kernel(&term(0, 0, side, Regime::PowerNeg, d, alpha), k);
            let dropped_tail = -alpha / d * (k as f64).powf(d);
            assert!((psi.iter().sum::<f64>() + dropped_tail).abs() < 1e-12);
        }
    }

    #[test]
    fn power_pos_partial_sums_follow_antiderivative() {
        let psi = realize_kernel(&term(0, 0, Side::Plus, Regime::PowerPos, 0.2, 1.0), 10_000);
        let mut acc = 0.0;
        for k in 1..=10_000usize {
            acc += psi[10_000 + k];
            if k == 1000 || k == 10_000 {
                let expected = (k as f64).powf(0.2) / 0.2;
                assert!((acc / expected - 1.0).abs() < 0.03);
            }
        }
        // Asymptotically α k^{d-1}.
        let k = 5000.0f64;
        assert!((psi[15_000] / k.powf(-0.8) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn spec_validation() {
        assert!(
            KernelSpec::new(1, vec![term(0, 0, Side::Plus, Regime::PowerPos, 0.7, 1.0)]).is_err()
        );
        assert!(
            KernelSpec::new(1, vec![term(0, 0, Side::Plus, Regime::PowerNeg, 0.2, 1.0)]).is_err()
        );
        assert!(
            KernelSpec::new(1, vec![term(0, 0, Side::Plus, Regime::Summable, 0.0, 0.0)]).is_err()
        );
        assert!(
            KernelSpec::new(2, vec![term(0, 0, Side::Plus, Regime::Summable, 0.0, 1.0)]).is_err()
        );
        let dup = vec![
            term(0, 0, Side::Plus, Regime::Summable, 0.0, 1.0),
            term(0, 0, Side::Plus, Regime::Summable, 0.0, 2.0),
        ];
        assert!(KernelSpec::new(1, dup).is_err());
        let spec = KernelSpec::single_causal(0.2, 1.0)
            .unwrap()
            .with_truncation(10);
        assert!(simulate_partial_sums(&spec, NoiseLaw::Gaussian, 20, &[1.0], 0, 2).is_err());
    }

    #[test]
    fn json_round_trip_is_one_based() {
        let spec = KernelSpec::single_causal(0.2, 1.0).unwrap();
        let text = spec.to_json_string().unwrap();
        assert!(text.contains("\"i\": 1"));
        assert_eq!(KernelSpec::from_json_str(&text).unwrap(), spec);
        assert!(KernelSpec::from_json_str(&text.replace("\"i\": 1", "\"i\": 0")).is_err());
    }

    #[test]
    fn single_causal_target() {
        let (d, alpha) = (0.2, 1.3);
        let t = limit_target(&KernelSpec::single_causal(d, alpha).unwrap()).unwrap();
        assert!((t.params.hurst()[0] - 0.7).abs() < 1e-15);
        assert!((t.m_plus[(0, 0)] - alpha / d).abs() < 1e-15);
        assert_eq!(t.m_minus[(0, 0)], 0.0);
        let h: f64 = 0.7;
        let var = (alpha / d).powi(2) * beta(h + 0.5, h + 0.5) / (PI * h).sin();
        assert!((t.params.sigma()[0].powi(2) - var).abs() < 1e-12 * var);
        assert!(is_admissible(&t.params, DEFAULT_PSD_TOL).admissible);
    }

    #[test]
    fn two_sided_and_mixed_targets() {
        let spec = KernelSpec::new(
            1,
            vec![
                term(0, 0, Side::Plus, Regime::PowerPos, 0.3, 1.0),
                term(0, 0, Side::Minus, Regime::PowerPos, 0.3, 0.5),
            ],
        )
        .unwrap();
        let t = limit_target(&spec).unwrap();
        assert!((t.m_plus[(0, 0)] - 1.0 / 0.3).abs() < 1e-12);
        assert!((t.m_minus[(0, 0)] + 0.5 / 0.3).abs() < 1e-12);

        let mixed = KernelSpec::new(
            2,
            vec![
                term(0, 0, Side::Plus, Regime::PowerPos, 0.3, 1.0),
                term(1, 1, Side::Plus, Regime::Summable, 0.0, 1.0),
            ],
        )
        .unwrap();
        assert!(matches!(limit_target(&mixed), Err(Error::InvalidKernel(_))));
    }

    #[test]
    fn brownian_target() {
        let spec = KernelSpec::new(
            2,
            vec![
                term(0, 0, Side::Plus, Regime::Summable, 0.0, 1.0),
                term(1, 0, Side::Plus, Regime::Summable, 0.0, 0.5),
                term(1, 1, Side::Minus, Regime::Summable, 0.0, 2.0),
            ],
        )
        .unwrap();
        let t = limit_target(&spec).unwrap();
        let c = |i, j| mfbm_cov(&t.params, i, j, 0.4, 0.9);
        // a = [[1, 0], [0.5, 2]]; cov(X(s), X(t)) = a aᵀ min(s, t).
        assert!((c(0, 0) - 0.4).abs() < 1e-12);
        assert!((c(0, 1) - 0.5 * 0.4).abs() < 1e-12);
        assert!((c(1, 1) - 4.25 * 0.4).abs() < 1e-12);
    }

    #[test]
    fn exact_variance_approaches_target() {
        // var S_n(1) = Σ_k W(k)² n^{-2d-1}; the deficit is the truncated tail.
        let n = 512;
        let d = 0.2;
        let target = limit_target(&KernelSpec::single_causal(d, 1.0).unwrap()).unwrap();
        let var_target = target.params.sigma()[0].powi(2);
        let rel = |k: usize| {
            let spec = KernelSpec::single_causal(d, 1.0)
                .unwrap()
                .with_truncation(k * n);
            let w = PartialSumWeights::new(&spec, &target.d, n, &[1.0]).unwrap();
            let weights = w.weights[0][0][0].as_ref().unwrap();
            weights.iter().map(|x| x * x).sum::<f64>() * w.scale[0].powi(2) / var_target - 1.0
        };
        let (e4, e64) = (rel(4), rel(64));
        assert!((-0.045..-0.025).contains(&e4), "{e4}");
        assert!(e64.abs() < 0.01 && e64 > e4, "{e64}");
    }

    #[test]
    fn exact_covariance_matches_two_sided_target() {
        let spec = KernelSpec::new(
            2,
            vec![
                term(0, 0, Side::Plus, Regime::PowerPos, 0.15, 1.0),
                term(0, 1, Side::Minus, Regime::PowerPos, 0.15, 0.6),
                term(1, 1, Side::Plus, Regime::PowerPos, 0.2, 1.0),
                term(1, 0, Side::Minus, Regime::PowerPos, 0.2, -0.4),
                term(1, 0, Side::Plus, Regime::PowerPos, 0.2, 0.3),
            ],
        )
        .unwrap()
        .with_truncation(256 * 256);
        let target = limit_target(&spec).unwrap();
        let taus = [0.5, 1.0];
        let w = PartialSumWeights::new(&spec, &target.d, 256, &taus).unwrap();
        for (ti, &tau) in taus.iter().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    let mut c = 0.0;
                    for l in 0..2 {
                        if let (Some(a), Some(b)) = (&w.weights[ti][i][l], &w.weights[ti][j][l]) {
                            c += a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
                        }
                    }
                    c *= w.scale[i] * w.scale[j];
                    let expected = mfbm_cov(&target.params, i, j, tau, tau);
                    assert!(
                        (c / expected - 1.0).abs() < 0.02,
                        "({i}, {j}, {tau}): {c} vs {expected}"
                    );
                }
            }
        }
    }

    #[test]
    fn summable_partial_sum_has_unit_variance() {
        let spec =
            KernelSpec::new(1, vec![term(0, 0, Side::Plus, Regime::Summable, 0.0, 1.0)]).unwrap();
        let s = simulate_partial_sums(&spec, NoiseLaw::Rademacher, 64, &[1.0], 3, 400).unwrap();
        let sq: Vec<f64> = s.iter().map(|m| m[(0, 0)].powi(2)).collect();
        let e = replicate_mean(&sq);
        assert!(((e.estimate - 1.0) / e.stderr).abs() < 4.0);
    }

    #[test]
    fn path_partial_sums_match_weights() {
        let spec = KernelSpec::new(
            2,
            vec![
                term(0, 0, Side::Plus, Regime::PowerPos, 0.2, 1.0),
                term(0, 1, Side::Minus, Regime::PowerNeg, -0.1, 0.7),
                term(1, 1, Side::Plus, Regime::PowerPos, 0.3, 1.0),
                term(1, 0, Side::Minus, Regime::PowerPos, 0.3, -0.4),
            ],
        )
        .unwrap()
        .with_truncation(40);
        let n = 30;
        let (z, eps) = superlinear_path(&spec, NoiseLaw::Gaussian, n, 9).unwrap();
        // Direct convolution.
        let kernels = combined_kernels(&spec, 40);
        for i in 0..2 {
            for t in 1..=n as i64 {
                let mut direct = 0.0;
                for j in 0..2 {
                    let Some(psi) = &kernels[i][j] else { continue };
                    for idx in 0..eps.nrows() {
                        let k = idx as i64 + 1 - 40;
                        let lag = t - k;
                        if lag.abs() <= 40 {
                            direct += psi[(lag + 40) as usize] * eps[(idx, j)];
                        }
                    }
                }
                assert!((z[(t as usize - 1, i)] - direct).abs() < 1e-9);
            }
        }
        // Weights reproduce the cumulated series.
        let d = limit_target(&spec).unwrap().d;
        let w = PartialSumWeights::new(&spec, &d, n, &[0.5, 1.0]).unwrap();
        for (ti, steps) in [(0usize, 15usize), (1, 30)] {
            for i in 0..2 {
                let mut s = 0.0;
                for j in 0..2 {
                    if let Some(wij) = &w.weights[ti][i][j] {
                        s += wij
                            .iter()
                            .zip(eps.column(j).iter())
                            .map(|(a, b)| a * b)
                            .sum::<f64>();
                    }
                }
                let cum: f64 = z.column(i).iter().take(steps).sum();
                assert!((s - cum).abs() < 1e-9);
            }
        }
    }
}
