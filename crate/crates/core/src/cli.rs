//! Command-line front end. Every subcommand reads the JSON parameter file
//! schema of [`crate::params::ParamFile`] (except `limits`, which reads a
//! kernel file) and writes CSV or JSON to `--out` or standard output.
//!
//! Exit codes: 0 success or pass, 1 inadmissible or failed gate, 2 error.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::circulant::{build_plan, simulate, EigPolicy, SimulationConfig};
use crate::covariance::increment_cov;
use crate::error::{Error, Result};
use crate::existence::{admissible_boundary, is_admissible, max_corr_grid, DEFAULT_PSD_TOL};
use crate::io::{read_increment_ensemble, write_rows, write_run, RunManifest};
use crate::limits::{compare_limits, KernelSpec, NoiseLaw};
use crate::params::{validate, MfbmParams, SpecialCase};
use crate::representations::{a_from_params, ma_from_a};
use crate::spectral::{coherence, cross_spectral_density};
use crate::stats::{compare_report, summarize, Z_BUDGET, Z_GATE};

#[derive(Debug, Parser)]
#[command(
    name = "mfbm",
    version,
    about = "Multivariate fractional Brownian motion toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Admissibility test; exit 1 when the parameters define no mfBm.
    Check(CheckArgs),
    /// Increment cross-covariances γ_ij(h, δ) on a lag grid.
    Covariance(CovarianceArgs),
    /// Cross-spectral densities and coherences on a frequency grid.
    Spectrum(SpectrumArgs),
    /// Spectral matrix A and moving-average matrices M+, M-.
    Represent(RepresentArgs),
    /// Exact circulant-embedding simulation.
    Simulate(SimulateArgs),
    /// Monte Carlo partial sums of a superlinear process against their mfBm limit.
    Limits(LimitsArgs),
    /// Compare a directory of simulated paths with the theoretical covariances.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Parameter file; optional with --max-corr-grid.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_PSD_TOL)]
    pub psd_tol: f64,
    /// Emit N points of the (rho, eta_prime) admissibility boundary for components --pair.
    #[arg(long, value_name = "N")]
    pub boundary: Option<usize>,
    /// 1-based components used by --boundary.
    #[arg(long, num_args = 2, default_values_t = [1, 2])]
    pub pair: Vec<usize>,
    /// Emit the maximal correlation on an N x N grid of Hurst exponents.
    #[arg(long, value_name = "N")]
    pub max_corr_grid: Option<usize>,
    #[arg(long, value_enum, default_value_t = CaseArg::WellBalanced)]
    pub case: CaseArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CaseArg {
    Causal,
    WellBalanced,
}

impl From<CaseArg> for SpecialCase {
    fn from(c: CaseArg) -> Self {
        match c {
            CaseArg::Causal => SpecialCase::Causal,
            CaseArg::WellBalanced => SpecialCase::WellBalanced,
        }
    }
}

#[derive(Debug, Args)]
pub struct CovarianceArgs {
    #[arg(long)]
    pub params: PathBuf,
    /// `start:stop:step` (inclusive) or a comma-separated list.
    #[arg(long, default_value = "0:10:1", allow_hyphen_values = true)]
    pub lags: String,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub params: PathBuf,
    /// `start:stop:step` (inclusive) or a comma-separated list; 0 is rejected.
    #[arg(long, default_value = "0.1:3.1:0.1", allow_hyphen_values = true)]
    pub omega: String,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RepresentArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Embedding size, a power of two above 2(n-1).
    #[arg(long)]
    pub m: Option<usize>,
    /// Write cumulated paths starting at X(0) = 0 instead of increments.
    #[arg(long)]
    pub integrate: bool,
    #[arg(long, value_enum, default_value_t = PolicyArg::Grow)]
    pub eig_policy: PolicyArg,
    /// Doublings of m allowed by `--eig-policy grow`.
    #[arg(long, default_value_t = 4)]
    pub max_doublings: u32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PolicyArg {
    Fail,
    Grow,
    Truncate,
}

#[derive(Debug, Args)]
pub struct LimitsArgs {
    /// Kernel file (1-based component indices).
    #[arg(long)]
    pub kernel: PathBuf,
    /// Sample sizes, comma-separated.
    #[arg(long, value_delimiter = ',', default_value = "512,1024,2048,4096")]
    pub n: Vec<usize>,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub tau: String,
    #[arg(long, default_value_t = 2000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = NoiseArg::Gaussian)]
    pub noise: NoiseArg,
    /// Kernel support bound; overrides the kernel file, default 4n.
    #[arg(long)]
    pub truncation: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum NoiseArg {
    Gaussian,
    Rademacher,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Directory of path CSVs, as written by `simulate`.
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long, default_value = "0:20:1", allow_hyphen_values = true)]
    pub lags: String,
    #[arg(long, default_value_t = Z_GATE)]
    pub z_gate: f64,
    /// Largest accepted fraction of cells with |z| above the gate.
    #[arg(long, default_value_t = Z_BUDGET)]
    pub budget: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parse `start:stop:step` (inclusive, with a small slack) or `a,b,c`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |msg: &str| Error::InvalidConfig(format!("grid '{spec}': {msg}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| bad(&e.to_string()));
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [a, b, step] = parts[..] else {
            return Err(bad("expected start:stop:step"));
        };
        let (a, b, step) = (num(a)?, num(b)?, num(step)?);
        if !(step > 0.0) || b < a {
            return Err(bad("need step > 0 and stop >= start"));
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|k| a + k as f64 * step).collect())
    } else {
        spec.split(',').map(num).collect()
    }
}

fn parse_lags(spec: &str) -> Result<Vec<i64>> {
    parse_grid(spec)?
        .into_iter()
        .map(|h| {
            let r = h.round();
            if (h - r).abs() > 1e-9 {
                Err(Error::InvalidConfig(format!("lag {h} is not an integer")))
            } else {
                Ok(r as i64)
            }
        })
        .collect()
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(File::create(path)?),
        None => Box::new(io::stdout().lock()),
    })
}

/// Parse a parameter file and reject structural violations, all reported at once.
fn load_params(path: &Path) -> Result<MfbmParams> {
    let params = MfbmParams::from_json_file(path)?;
    validate(&params).into_result()?;
    Ok(params)
}

#[derive(Serialize)]
struct CovRow {
    i: usize,
    j: usize,
    h: f64,
    delta: f64,
    gamma: f64,
}

#[derive(Serialize)]
struct SpectrumRow {
    i: usize,
    j: usize,
    omega: f64,
    delta: f64,
    #[serde(rename = "re_S")]
    re_s: f64,
    #[serde(rename = "im_S")]
    im_s: f64,
    coherence: Option<f64>,
}

#[derive(Serialize)]
struct LimitRow {
    n: usize,
    tau: f64,
    component_i: usize,
    component_j: usize,
    empirical_cov: f64,
    target_cov: f64,
    mc_stderr: f64,
}

#[derive(Serialize)]
struct VerifyRow {
    lag: i64,
    i: usize,
    j: usize,
    empirical: f64,
    theoretical: f64,
    stderr: f64,
    z: f64,
    n_replicates: usize,
}

#[derive(Serialize)]
struct Representation {
    #[serde(rename = "A_re")]
    a_re: Vec<Vec<f64>>,
    #[serde(rename = "A_im")]
    a_im: Vec<Vec<f64>>,
    #[serde(rename = "M_plus")]
    m_plus: Option<Vec<Vec<f64>>>,
    #[serde(rename = "M_minus")]
    m_minus: Option<Vec<Vec<f64>>>,
}

fn nested(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn check(args: CheckArgs) -> Result<ExitCode> {
    let params = args.params.as_deref().map(load_params).transpose()?;
    let mut code = ExitCode::SUCCESS;
    if let Some(params) = &params {
        let report = is_admissible(params, args.psd_tol);
        eprintln!(
            "{}: minimum eigenvalue {:.6e} (max |Q| {:.6e}){}",
            if report.admissible {
                "admissible"
            } else {
                "NOT admissible"
            },
            report.min_eigenvalue,
            report.max_abs_entry,
            report
                .coherence
                .map(|c| format!(", coherence C_12 = {c:.12}"))
                .unwrap_or_default()
        );
        if !report.admissible {
            code = ExitCode::from(1);
        }
    }
    if let Some(n) = args.boundary {
        let params = params
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("--boundary needs --params".into()))?;
        let (i, j) = (args.pair[0], args.pair[1]);
        for index in [i, j] {
            if index == 0 || index > params.p() {
                return Err(Error::IndexOutOfRange {
                    index,
                    p: params.p(),
                });
            }
        }
        if i == j {
            return Err(Error::SameComponent(i));
        }
        let h = params.hurst();
        let points = admissible_boundary(h[i - 1], h[j - 1], n)?;
        write_rows(sink(&args.out)?, &points)?;
    } else if let Some(n) = args.max_corr_grid {
        #[derive(Serialize)]
        struct GridRow {
            #[serde(rename = "H1")]
            h1: f64,
            #[serde(rename = "H2")]
            h2: f64,
            max_rho: f64,
        }
        let rows: Vec<GridRow> = max_corr_grid(n, args.case.into())
            .into_iter()
            .map(|p| GridRow {
                h1: p.h1,
                h2: p.h2,
                max_rho: p.max_rho,
            })
            .collect();
        write_rows(sink(&args.out)?, &rows)?;
    } else if params.is_none() {
        return Err(Error::InvalidConfig(
            "nothing to do: pass --params or --max-corr-grid".into(),
        ));
    }
    Ok(code)
}

fn covariance(args: CovarianceArgs) -> Result<ExitCode> {
    let params = load_params(&args.params)?;
    let lags = parse_grid(&args.lags)?;
    let mut rows = Vec::new();
    for &h in &lags {
        for i in 0..params.p() {
            for j in 0..params.p() {
                rows.push(CovRow {
                    i: i + 1,
                    j: j + 1,
                    h,
                    delta: args.delta,
                    gamma: increment_cov(&params, i, j, h, args.delta)?,
                });
            }
        }
    }
    write_rows(sink(&args.out)?, &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn spectrum(args: SpectrumArgs) -> Result<ExitCode> {
    let params = load_params(&args.params)?;
    let omegas = parse_grid(&args.omega)?;
    let mut rows = Vec::new();
    for &omega in &omegas {
        for i in 0..params.p() {
            for j in 0..params.p() {
                let s = cross_spectral_density(&params, i, j, omega, args.delta)?;
                rows.push(SpectrumRow {
                    i: i + 1,
                    j: j + 1,
                    omega,
                    delta: args.delta,
                    re_s: s.re,
                    im_s: s.im,
                    coherence: (i != j).then(|| coherence(&params, i, j)).transpose()?,
                });
            }
        }
    }
    write_rows(sink(&args.out)?, &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn represent(args: RepresentArgs) -> Result<ExitCode> {
    let params = load_params(&args.params)?;
    let a = a_from_params(&params)?;
    let (m_plus, m_minus) = match ma_from_a(&a, params.hurst()) {
        Ok(ma) => (Some(nested(&ma.m_plus)), Some(nested(&ma.m_minus))),
        Err(Error::HalfHurst { index }) => {
            eprintln!(
                "warning: H_{} = 1/2, M_plus and M_minus are not defined",
                index + 1
            );
            (None, None)
        }
        Err(e) => return Err(e),
    };
    let rep = Representation {
        a_re: nested(&a.real_part()),
        a_im: nested(&a.imag_part()),
        m_plus,
        m_minus,
    };
    let mut out = sink(&args.out)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&rep)?)?;
    Ok(ExitCode::SUCCESS)
}

fn simulate_cmd(args: SimulateArgs) -> Result<ExitCode> {
    let params = load_params(&args.params)?;
    let policy = match args.eig_policy {
        PolicyArg::Fail => EigPolicy::Fail,
        PolicyArg::Grow => EigPolicy::GrowM {
            max_doublings: args.max_doublings,
        },
        PolicyArg::Truncate => EigPolicy::Truncate,
    };
    let mut config = SimulationConfig::new(args.n)
        .replicates(args.replicates)
        .seed(args.seed)
        .eig_policy(policy)
        .integrate(args.integrate);
    if let Some(m) = args.m {
        config = config.m(m);
    }
    let start = Instant::now();
    let plan = build_plan(&params, &config)?;
    let paths = simulate(&plan, &config)?;
    let wall = start.elapsed().as_secs_f64();
    let manifest = RunManifest::new(&params, &config, &plan, &paths, wall);
    write_run(&args.out, &paths, &manifest)?;
    eprintln!(
        "wrote {} replicate(s) to {} (m = {}, exact = {}, {:.3}s)",
        paths.len(),
        args.out.display(),
        plan.m,
        plan.exact,
        wall
    );
    Ok(ExitCode::SUCCESS)
}

fn limits(args: LimitsArgs) -> Result<ExitCode> {
    let mut spec = KernelSpec::from_json_file(&args.kernel)?;
    if let Some(k) = args.truncation {
        spec = spec.with_truncation(k);
    }
    let noise = match args.noise {
        NoiseArg::Gaussian => NoiseLaw::Gaussian,
        NoiseArg::Rademacher => NoiseLaw::Rademacher,
    };
    let taus = parse_grid(&args.tau)?;
    let mut rows = Vec::new();
    for &n in &args.n {
        for c in compare_limits(&spec, noise, n, &taus, args.seed, args.replicates)? {
            rows.push(LimitRow {
                n: c.n,
                tau: c.tau,
                component_i: c.i + 1,
                component_j: c.j + 1,
                empirical_cov: c.empirical_cov,
                target_cov: c.target_cov,
                mc_stderr: c.mc_stderr,
            });
        }
    }
    write_rows(sink(&args.out)?, &rows)?;
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let params = load_params(&args.params)?;
    let ensemble = read_increment_ensemble(&args.dir)?;
    if let Some(x) = ensemble.first() {
        if x.ncols() != params.p() {
            return Err(Error::Malformed(format!(
                "paths have {} components, parameters have {}",
                x.ncols(),
                params.p()
            )));
        }
    }
    let lags = parse_lags(&args.lags)?;
    let report = compare_report(&ensemble, &params, &lags, 1.0)?;
    let summary = summarize(&report.rows, args.z_gate);
    let rows: Vec<VerifyRow> = report
        .rows
        .iter()
        .map(|r| VerifyRow {
            lag: r.lag,
            i: r.i + 1,
            j: r.j + 1,
            empirical: r.empirical,
            theoretical: r.theoretical,
            stderr: r.stderr,
            z: r.z,
            n_replicates: r.n_replicates,
        })
        .collect();
    write_rows(sink(&args.out)?, &rows)?;
    let pass = summary.passes(args.budget);
    eprintln!(
        "{}: {} cells, max |z| {:.2}, mean z {:.3}, fraction |z| > {} = {:.4} (budget {})",
        if pass { "PASS" } else { "FAIL" },
        summary.cells,
        summary.max_abs_z,
        summary.mean_z,
        args.z_gate,
        summary.fraction_over_gate,
        args.budget
    );
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Check(a) => check(a),
        Command::Covariance(a) => covariance(a),
        Command::Spectrum(a) => spectrum(a),
        Command::Represent(a) => represent(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Limits(a) => limits(a),
        Command::Verify(a) => verify(a),
    }
}

/// Parse `std::env::args`, run, and map errors to exit code 2.
pub fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
