//! Replicate-ensemble covariance estimates and z-score comparison reports.
//!
//! Every estimate is a mean over independent replicates and its standard
//! error is the replicate standard deviation over `sqrt(R)`. Within-path
//! averages are not used for error bars: under long memory they converge far
//! slower than `1/sqrt(n)`.

use serde::Serialize;

use nalgebra::DMatrix;

use crate::circulant::SamplePath;
use crate::covariance::increment_cov;
use crate::error::{Error, Result};
use crate::params::MfbmParams;

/// Fewest replicates accepted by the estimators.
pub const MIN_REPLICATES: usize = 30;

/// Replicate mean and its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub stderr: f64,
}

/// Mean and standard error of a sample of replicate statistics.
pub fn replicate_mean(values: &[f64]) -> Estimate {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0)
    } else {
        0.0
    };
    Estimate {
        estimate: mean,
        stderr: (var / r).sqrt(),
    }
}

/// Increments `n × p` of a sample path, differencing cumulated paths.
pub fn increments(path: &SamplePath) -> DMatrix<f64> {
    if !path.integrated {
        return path.values.clone();
    }
    let (rows, p) = path.values.shape();
    DMatrix::from_fn(rows - 1, p, |k, u| {
        path.values[(k + 1, u)] - path.values[(k, u)]
    })
}

/// Lag-`h` cross-covariance of one path: `(1/(n-|h|)) Σ_t x_i(t) x_j(t+h)`.
///
/// No sample mean is subtracted; increments are zero-mean by construction.
pub fn path_cross_cov(x: &DMatrix<f64>, i: usize, j: usize, h: i64) -> f64 {
    let n = x.nrows() as i64;
    let (start, end) = if h >= 0 { (0, n - h) } else { (-h, n) };
    let mut acc = 0.0;
    for t in start..end {
        acc += x[(t as usize, i)] * x[((t + h) as usize, j)];
    }
    acc / (n - h.abs()) as f64
}

fn check_ensemble(ensemble: &[DMatrix<f64>], i: usize, j: usize, h: i64) -> Result<()> {
    if ensemble.len() < MIN_REPLICATES {
        return Err(Error::InsufficientData(format!(
            "{} replicates, need at least {MIN_REPLICATES}",
            ensemble.len()
        )));
    }
    let (n, p) = ensemble[0].shape();
    if ensemble.iter().any(|x| x.shape() != (n, p)) {
        return Err(Error::InsufficientData("paths differ in shape".into()));
    }
    if h.unsigned_abs() as usize >= n {
        return Err(Error::InsufficientData(format!(
            "lag {h} needs more than {n} samples"
        )));
    }
    for index in [i, j] {
        if index >= p {
            return Err(Error::IndexOutOfRange { index, p });
        }
    }
    Ok(())
}

/// Replicate-mean estimate of `γ_ij(h, 1)`.
pub fn empirical_cross_cov(
    ensemble: &[DMatrix<f64>],
    i: usize,
    j: usize,
    h: i64,
) -> Result<Estimate> {
    check_ensemble(ensemble, i, j, h)?;
    let per_path: Vec<f64> = ensemble
        .iter()
        .map(|x| path_cross_cov(x, i, j, h))
        .collect();
    Ok(replicate_mean(&per_path))
}

/// Pooled lag-`h` autocorrelation of component `i`: `Σ_r Σ_t x(t)x(t+h) / Σ_r Σ_t x(t)²`,
/// with both sums normalized per term.
pub fn empirical_autocorrelation(ensemble: &[DMatrix<f64>], i: usize, h: i64) -> Result<f64> {
    check_ensemble(ensemble, i, i, h)?;
    let num: f64 = ensemble.iter().map(|x| path_cross_cov(x, i, i, h)).sum();
    let den: f64 = ensemble.iter().map(|x| path_cross_cov(x, i, i, 0)).sum();
    Ok(num / den)
}

/// One cell of a comparison report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CovComparison {
    pub lag: i64,
    pub i: usize,
    pub j: usize,
    pub empirical: f64,
    pub theoretical: f64,
    pub stderr: f64,
    pub z: f64,
    pub n_replicates: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReportSummary {
    pub cells: usize,
    pub max_abs_z: f64,
    pub mean_z: f64,
    /// Fraction of cells with `|z| > z_gate`.
    pub fraction_over_gate: f64,
    pub z_gate: f64,
}

impl ReportSummary {
    /// True when the fraction of cells beyond the gate is within `budget`.
    pub fn passes(&self, budget: f64) -> bool {
        self.fraction_over_gate <= budget
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub rows: Vec<CovComparison>,
    pub summary: ReportSummary,
}

/// Default z-gate and tail budget.
pub const Z_GATE: f64 = 4.0;
pub const Z_BUDGET: f64 = 0.005;

pub fn summarize(rows: &[CovComparison], z_gate: f64) -> ReportSummary {
    let cells = rows.len();
    if cells == 0 {
        return ReportSummary {
            cells,
            max_abs_z: 0.0,
            mean_z: 0.0,
            fraction_over_gate: 0.0,
            z_gate,
        };
    }
    let max_abs_z = rows.iter().map(|r| r.z.abs()).fold(0.0, f64::max);
    let mean_z = rows.iter().map(|r| r.z).sum::<f64>() / cells as f64;
    let over = rows.iter().filter(|r| r.z.abs() > z_gate).count();
    ReportSummary {
        cells,
        max_abs_z,
        mean_z,
        fraction_over_gate: over as f64 / cells as f64,
        z_gate,
    }
}

/// Compare every pair `(i, j)` and lag against `γ_ij(h, delta)`.
pub fn compare_report(
    ensemble: &[DMatrix<f64>],
    params: &MfbmParams,
    lags: &[i64],
    delta: f64,
) -> Result<ComparisonReport> {
    let p = params.p();
    let mut rows = Vec::with_capacity(p * p * lags.len());
    for &h in lags {
        for i in 0..p {
            for j in 0..p {
                let est = empirical_cross_cov(ensemble, i, j, h)?;
                let theoretical = increment_cov(params, i, j, h as f64, delta)?;
                if !(est.stderr > 0.0) {
                    return Err(Error::Degenerate(format!(
                        "zero standard error at lag {h}, pair ({i}, {j})"
                    )));
                }
                rows.push(CovComparison {
                    lag: h,
                    i,
                    j,
                    empirical: est.estimate,
                    theoretical,
                    stderr: est.stderr,
                    z: (est.estimate - theoretical) / est.stderr,
                    n_replicates: ensemble.len(),
                });
            }
        }
    }
    let summary = summarize(&rows, Z_GATE);
    Ok(ComparisonReport { rows, summary })
}

/// Two-sample comparison of two ensembles: `z = (a - b)/sqrt(se_a² + se_b²)` per cell.
pub fn two_sample_report(
    a: &[DMatrix<f64>],
    b: &[DMatrix<f64>],
    lags: &[i64],
) -> Result<Vec<CovComparison>> {
    let p = a.first().map(|x| x.ncols()).unwrap_or(0);
    let mut rows = Vec::new();
    for &h in lags {
        for i in 0..p {
            for j in 0..p {
                let ea = empirical_cross_cov(a, i, j, h)?;
                let eb = empirical_cross_cov(b, i, j, h)?;
                let stderr = ea.stderr.hypot(eb.stderr);
                rows.push(CovComparison {
                    lag: h,
                    i,
                    j,
                    empirical: ea.estimate,
                    theoretical: eb.estimate,
                    stderr,
                    z: (ea.estimate - eb.estimate) / stderr,
                    n_replicates: a.len().min(b.len()),
                });
            }
        }
    }
    Ok(rows)
}
