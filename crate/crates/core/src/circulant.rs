//! Exact simulation of discretized mfGn / mfBm by block-circulant embedding.
//!
//! The `np × np` block-Toeplitz covariance of `(ΔX(1), …, ΔX(n))` is embedded
//! into an `m`-block circulant matrix with first block row `C(0), …, C(m-1)`.
//! A length-`m` DFT block-diagonalizes it into Hermitian `p × p` blocks
//! `B(k)`; Gaussian vectors coloured by `B(k)^{1/2}` and transformed back give
//! a sequence whose covariance is exactly `E ΔX(k) ΔX(l)ᵀ = C((l - k) mod m)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::covariance::{increment_cov_unchecked, lag_block};
use crate::error::{Error, Result};
use crate::existence::{is_admissible, DEFAULT_PSD_TOL};
use crate::params::MfbmParams;
use crate::rng::{substream, GENERATOR};

/// Relative threshold below which an eigenvalue counts as negative.
pub const NEGATIVE_EIG_TOL: f64 = 1e-12;

/// What to do when some `B(k)` has a negative eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EigPolicy {
    Fail,
    /// Double `m` up to `max_doublings` times, then fail.
    GrowM {
        max_doublings: u32,
    },
    /// Clip negative eigenvalues to zero; the output is only approximately distributed.
    Truncate,
}

impl Default for EigPolicy {
    fn default() -> Self {
        EigPolicy::GrowM { max_doublings: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub n: usize,
    /// Embedding size; the smallest admissible power of two when `None`.
    pub m: Option<usize>,
    pub seed: u64,
    pub replicates: usize,
    pub eig_policy: EigPolicy,
    /// Largest accepted imaginary residual, relative to the path standard deviation.
    pub imag_tol: f64,
    /// Return cumulated mfBm paths (with `X(0) = 0`) instead of increments.
    pub integrate: bool,
}

impl SimulationConfig {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            m: None,
            seed: 0,
            replicates: 1,
            eig_policy: EigPolicy::default(),
            imag_tol: 1e-8,
            integrate: false,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn replicates(mut self, replicates: usize) -> Self {
        self.replicates = replicates;
        self
    }

    pub fn m(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    pub fn eig_policy(mut self, policy: EigPolicy) -> Self {
        self.eig_policy = policy;
        self
    }

    pub fn integrate(mut self, integrate: bool) -> Self {
        self.integrate = integrate;
        self
    }

    /// Smallest power of two strictly greater than `2(n-1)`, and at least 2.
    pub fn min_m(n: usize) -> usize {
        (2 * n.saturating_sub(1) + 1).next_power_of_two().max(2)
    }

    fn check(&self) -> Result<usize> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be positive".into()));
        }
        if self.replicates == 0 {
            return Err(Error::InvalidConfig("replicates must be positive".into()));
        }
        if !(self.imag_tol >= 0.0) {
            return Err(Error::InvalidConfig("imag_tol must be nonnegative".into()));
        }
        let min_m = Self::min_m(self.n);
        match self.m {
            None => Ok(min_m),
            Some(m) if !m.is_power_of_two() => Err(Error::InvalidConfig(format!(
                "m = {m} is not a power of two"
            ))),
            Some(m) if m < min_m => Err(Error::InvalidConfig(format!(
                "m = {m} must exceed 2(n-1) = {}",
                2 * (self.n - 1)
            ))),
            Some(m) => Ok(m),
        }
    }
}

/// Precomputed embedding; immutable and shareable across threads.
#[derive(Clone)]
pub struct CirculantPlan {
    pub params: MfbmParams,
    pub n: usize,
    pub m: usize,
    /// `C(0), …, C(m-1)`.
    pub c_blocks: Vec<DMatrix<f64>>,
    /// `B(k) = Σ_j C(j) e^{-2πijk/m}`.
    pub b_blocks: Vec<DMatrix<Complex64>>,
    /// Eigenvalues `ξ_1(k) ≤ … ≤ ξ_p(k)` of each `B(k)`.
    pub eigenvalues: Vec<DVector<f64>>,
    /// Unitary eigenvector matrices `R(k)`.
    pub eigenvectors: Vec<DMatrix<Complex64>>,
    /// `B̃(k) = R(k) diag(sqrt(max(ξ, 0))) R(k)*`.
    pub sqrt_blocks: Vec<DMatrix<Complex64>>,
    /// `Σ |ξ|` over clipped negative eigenvalues.
    pub truncated_mass: f64,
    /// False when eigenvalues beyond round-off were clipped.
    pub exact: bool,
    /// Times `m` was doubled under [`EigPolicy::GrowM`].
    pub doublings: u32,
    fft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for CirculantPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CirculantPlan")
            .field("p", &self.params.p())
            .field("n", &self.n)
            .field("m", &self.m)
            .field("truncated_mass", &self.truncated_mass)
            .field("exact", &self.exact)
            .field("doublings", &self.doublings)
            .finish_non_exhaustive()
    }
}

struct Negative {
    value: f64,
    k: usize,
}

pub fn build_plan(params: &MfbmParams, config: &SimulationConfig) -> Result<CirculantPlan> {
    let mut m = config.check()?;
    is_admissible(params, DEFAULT_PSD_TOL).into_result()?;
    let mut doublings = 0;
    loop {
        let truncate = config.eig_policy == EigPolicy::Truncate;
        match build_for_m(params, config.n, m, truncate) {
            Ok(mut plan) => {
                plan.doublings = doublings;
                return Ok(plan);
            }
            Err(neg) => match config.eig_policy {
                EigPolicy::GrowM { max_doublings } if doublings < max_doublings => {
                    doublings += 1;
                    m *= 2;
                }
                _ => {
                    return Err(Error::NegativeEigenvalue {
                        value: neg.value,
                        k: neg.k,
                        m,
                    })
                }
            },
        }
    }
}

fn build_for_m(
    params: &MfbmParams,
    n: usize,
    m: usize,
    truncate: bool,
) -> std::result::Result<CirculantPlan, Negative> {
    let p = params.p();
    let half = m / 2;
    let mut c_blocks: Vec<DMatrix<f64>> = Vec::with_capacity(m);
    for j in 0..m {
        let block = if j < half {
            lag_block(params, j as f64, 1.0).expect("unit delta").block
        } else if j == half {
            let g = lag_block(params, half as f64, 1.0)
                .expect("unit delta")
                .block;
            (&g + g.transpose()) * 0.5
        } else {
            // G(j - m) = G(m - j)ᵀ
            c_blocks[m - j].transpose()
        };
        c_blocks.push(block);
    }

    let fft = FftPlanner::<f64>::new().plan_fft_forward(m);
    let mut b_blocks = vec![DMatrix::<Complex64>::zeros(p, p); m];
    let mut buf = vec![Complex64::default(); m];
    for u in 0..p {
        for v in u..p {
            for (j, slot) in buf.iter_mut().enumerate() {
                *slot = Complex64::from(c_blocks[j][(u, v)]);
            }
            fft.process(&mut buf);
            for (k, value) in buf.iter().enumerate() {
                if u == v {
                    b_blocks[k][(u, u)] = Complex64::from(value.re);
                } else {
                    b_blocks[k][(u, v)] = *value;
                    b_blocks[k][(v, u)] = value.conj();
                }
            }
        }
    }

    // B(m-k) = conj B(k): decompose k = 0..=m/2 and mirror the rest.
    let mut eigenvalues = Vec::with_capacity(m);
    let mut eigenvectors = Vec::with_capacity(m);
    for b in b_blocks.iter().take(half + 1) {
        let eig = SymmetricEigen::new(b.clone());
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &c| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[c]));
        let values = DVector::from_iterator(p, order.iter().map(|&a| eig.eigenvalues[a]));
        let vectors = DMatrix::from_fn(p, p, |r, c| eig.eigenvectors[(r, order[c])]);
        eigenvalues.push(values);
        eigenvectors.push(vectors);
    }
    for k in (half + 1)..m {
        eigenvalues.push(eigenvalues[m - k].clone());
        eigenvectors.push(eigenvectors[m - k].map(|z| z.conj()));
    }

    let max_xi = eigenvalues
        .iter()
        .flat_map(|v| v.iter().copied())
        .fold(0.0, f64::max);
    let threshold = -NEGATIVE_EIG_TOL * max_xi;
    let mut truncated_mass = 0.0;
    let mut exact = true;
    for (k, values) in eigenvalues.iter().enumerate() {
        for &xi in values.iter() {
            if xi < 0.0 {
                truncated_mass += -xi;
                if xi < threshold {
                    if !truncate {
                        return Err(Negative { value: xi, k });
                    }
                    exact = false;
                }
            }
        }
    }

    let mut sqrt_blocks: Vec<DMatrix<Complex64>> = Vec::with_capacity(m);
    for k in 0..=half {
        let r = &eigenvectors[k];
        let d = eigenvalues[k].map(|xi| Complex64::from(xi.max(0.0).sqrt()));
        sqrt_blocks.push(r * DMatrix::from_diagonal(&d) * r.adjoint());
    }
    for k in (half + 1)..m {
        sqrt_blocks.push(sqrt_blocks[m - k].map(|z| z.conj()));
    }

    Ok(CirculantPlan {
        params: params.clone(),
        n,
        m,
        c_blocks,
        b_blocks,
        eigenvalues,
        eigenvectors,
        sqrt_blocks,
        truncated_mass,
        exact,
        doublings: 0,
        fft,
    })
}

impl CirculantPlan {
    pub fn p(&self) -> usize {
        self.params.p()
    }

    /// Block `(k, l)` of the implied block-circulant matrix: `C((l - k) mod m)`.
    pub fn circulant_block(&self, k: usize, l: usize) -> &DMatrix<f64> {
        &self.c_blocks[(l + self.m - k % self.m) % self.m]
    }

    /// Top-left `np × np` corner of the block-circulant matrix, index `k·p + u`.
    pub fn embedded_top_left(&self) -> DMatrix<f64> {
        let p = self.p();
        DMatrix::from_fn(self.n * p, self.n * p, |r, c| {
            self.circulant_block(r / p, c / p)[(r % p, c % p)]
        })
    }

    /// `C(j) = (1/m) Σ_k B(k) e^{2πijk/m}`, computed by inverse FFT.
    pub fn inverse_dft_blocks(&self) -> Vec<DMatrix<Complex64>> {
        let p = self.p();
        let m = self.m;
        let ifft = FftPlanner::<f64>::new().plan_fft_inverse(m);
        let mut out = vec![DMatrix::<Complex64>::zeros(p, p); m];
        let mut buf = vec![Complex64::default(); m];
        for u in 0..p {
            for v in 0..p {
                for (k, slot) in buf.iter_mut().enumerate() {
                    *slot = self.b_blocks[k][(u, v)];
                }
                ifft.process(&mut buf);
                for (j, value) in buf.iter().enumerate() {
                    out[j][(u, v)] = value / m as f64;
                }
            }
        }
        out
    }

    /// Largest component standard deviation of one increment.
    fn path_scale(&self) -> f64 {
        self.c_blocks[0]
            .diagonal()
            .iter()
            .fold(0.0f64, |a, &b| a.max(b))
            .sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathMeta {
    pub replicate: u64,
    pub seed: u64,
    pub generator: &'static str,
    pub n: usize,
    pub m: usize,
    pub exact: bool,
    pub truncated_mass: f64,
    /// Largest `|Im ΔX|` before taking real parts.
    pub max_imag_residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplePath {
    /// `n × p` increments, or `(n+1) × p` cumulated values starting at 0.
    pub values: DMatrix<f64>,
    pub integrated: bool,
    pub meta: PathMeta,
}

/// One replicate; reproducible from `(config.seed, replicate)` alone.
pub fn simulate_replicate(
    plan: &CirculantPlan,
    config: &SimulationConfig,
    replicate: u64,
) -> Result<SamplePath> {
    let (p, m, n) = (plan.p(), plan.m, plan.n);
    let half = m / 2;
    let mut rng = substream(config.seed, replicate);
    let inv_sqrt_m = (m as f64).sqrt().recip();
    let inv_sqrt_2m = (2.0 * m as f64).sqrt().recip();

    // Z(j) for j = 0..=m/2, then mirrored by conjugation.
    let mut z: Vec<DVector<Complex64>> = Vec::with_capacity(m);
    for j in 0..=half {
        let zj = DVector::from_fn(p, |_, _| {
            if j == 0 || j == half {
                let u: f64 = rng.sample(StandardNormal);
                Complex64::from(u * inv_sqrt_m)
            } else {
                let u: f64 = rng.sample(StandardNormal);
                let v: f64 = rng.sample(StandardNormal);
                Complex64::new(u, v) * inv_sqrt_2m
            }
        });
        z.push(zj);
    }
    for j in (half + 1)..m {
        z.push(z[m - j].map(|c| c.conj()));
    }

    let mut values = DMatrix::zeros(n, p);
    let mut max_imag: f64 = 0.0;
    let mut buf = vec![Complex64::default(); m];
    let w: Vec<DVector<Complex64>> = z
        .iter()
        .zip(&plan.sqrt_blocks)
        .map(|(zj, b)| b * zj)
        .collect();
    for u in 0..p {
        for (j, slot) in buf.iter_mut().enumerate() {
            *slot = w[j][u];
        }
        plan.fft.process(&mut buf);
        for (k, value) in buf.iter().enumerate() {
            max_imag = max_imag.max(value.im.abs());
            if k < n {
                values[(k, u)] = value.re;
            }
        }
    }

    let tolerance = config.imag_tol * plan.path_scale();
    if max_imag > tolerance {
        return Err(Error::ImaginaryResidual {
            residual: max_imag,
            tolerance,
        });
    }

    let values = if config.integrate {
        cumulate(&values)
    } else {
        values
    };
    Ok(SamplePath {
        values,
        integrated: config.integrate,
        meta: PathMeta {
            replicate,
            seed: config.seed,
            generator: GENERATOR,
            n,
            m,
            exact: plan.exact,
            truncated_mass: plan.truncated_mass,
            max_imag_residual: max_imag,
        },
    })
}

/// All `config.replicates` replicates, in replicate order.
pub fn simulate(plan: &CirculantPlan, config: &SimulationConfig) -> Result<Vec<SamplePath>> {
    (0..config.replicates as u64)
        .into_par_iter()
        .map(|r| simulate_replicate(plan, config, r))
        .collect()
}

/// `X(0) = 0, X(k) = ΔX(1) + … + ΔX(k)`.
pub fn cumulate(increments: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p) = increments.shape();
    let mut out = DMatrix::zeros(n + 1, p);
    for u in 0..p {
        for k in 0..n {
            out[(k + 1, u)] = out[(k, u)] + increments[(k, u)];
        }
    }
    out
}

/// `𝔾`: covariance of `(ΔX(1), …, ΔX(n))`, index `k·p + u`.
pub fn toeplitz_covariance(params: &MfbmParams, n: usize) -> DMatrix<f64> {
    let p = params.p();
    DMatrix::from_fn(n * p, n * p, |r, c| {
        let (k, u, l, v) = (r / p, r % p, c / p, c % p);
        increment_cov_unchecked(params, u, v, l as f64 - k as f64, 1.0)
    })
}

/// Largest `n` accepted by [`dense_oracle_simulate`].
pub const DENSE_ORACLE_MAX_N: usize = 64;

/// Reference sampler: dense Cholesky of `𝔾`. Slow, for testing only.
pub fn dense_oracle_simulate(
    params: &MfbmParams,
    n: usize,
    seed: u64,
    replicates: usize,
) -> Result<Vec<SamplePath>> {
    if n == 0 || n > DENSE_ORACLE_MAX_N {
        return Err(Error::InvalidConfig(format!(
            "dense oracle needs 1 <= n <= {DENSE_ORACLE_MAX_N}, got {n}"
        )));
    }
    is_admissible(params, DEFAULT_PSD_TOL).into_result()?;
    let p = params.p();
    let g = toeplitz_covariance(params, n);
    let (l, shift) = match g.clone().cholesky() {
        Some(ch) => (ch.unpack(), 0.0),
        None => {
            let shift = DEFAULT_PSD_TOL * g.amax();
            let ch = (&g + DMatrix::identity(n * p, n * p) * shift)
                .cholesky()
                .ok_or_else(|| Error::Degenerate("Toeplitz covariance is not PSD".into()))?;
            (ch.unpack(), shift)
        }
    };
    let out = (0..replicates as u64)
        .map(|r| {
            let mut rng = substream(seed, r);
            let e = DVector::from_fn(n * p, |_, _| rng.sample::<f64, _>(StandardNormal));
            let x = &l * e;
            SamplePath {
                values: DMatrix::from_fn(n, p, |k, u| x[k * p + u]),
                integrated: false,
                meta: PathMeta {
                    replicate: r,
                    seed,
                    generator: GENERATOR,
                    n,
                    m: 0,
                    exact: shift == 0.0,
                    truncated_mass: shift,
                    max_imag_residual: 0.0,
                },
            }
        })
        .collect();
    Ok(out)
}
