//! On-disk formats: sample-path CSVs, run manifests and row CSVs.
//!
//! Component indices in every CSV are 1-based.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::circulant::{CirculantPlan, SamplePath, SimulationConfig};
use crate::error::{Error, Result};
use crate::params::{MfbmParams, ParamFile};

/// File name of the run manifest inside a simulation output directory.
pub const MANIFEST_NAME: &str = "manifest.json";

/// File name of replicate `r`.
pub fn path_file_name(replicate: u64) -> String {
    format!("path_{replicate:05}.csv")
}

/// Write one path with columns `t, X_1, …, X_p`.
///
/// Increments are labelled `t = 1..=n`; cumulated paths `t = 0..=n`.
pub fn write_path_csv(file: impl AsRef<Path>, path: &SamplePath) -> Result<()> {
    let mut w = csv::Writer::from_path(file)?;
    let p = path.values.ncols();
    let mut header = vec!["t".to_string()];
    header.extend((1..=p).map(|u| format!("X_{u}")));
    w.write_record(&header)?;
    let offset = usize::from(!path.integrated);
    for (k, row) in path.values.row_iter().enumerate() {
        let mut record = vec![(k + offset).to_string()];
        record.extend(row.iter().map(|v| format!("{v:.17e}")));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Read a path CSV: the `t` column and the `rows × p` values.
pub fn read_path_csv(file: impl AsRef<Path>) -> Result<(Vec<i64>, DMatrix<f64>)> {
    let file = file.as_ref();
    let mut r = csv::Reader::from_path(file)?;
    let p = r
        .headers()?
        .len()
        .checked_sub(1)
        .filter(|&p| p > 0)
        .ok_or_else(|| {
            Error::Malformed(format!("{}: expected columns t, X_1, ...", file.display()))
        })?;
    let mut t = Vec::new();
    let mut values = Vec::new();
    for record in r.records() {
        let record = record?;
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Malformed(format!("{}: {e}", file.display())))
        };
        t.push(parse(&record[0])? as i64);
        for u in 1..=p {
            values.push(parse(&record[u])?);
        }
    }
    Ok((t.clone(), DMatrix::from_row_slice(t.len(), p, &values)))
}

/// Everything needed to reproduce or audit a simulation run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub params: ParamFile,
    pub config: SimulationConfig,
    pub m: usize,
    pub doublings: u32,
    pub exact: bool,
    pub truncated_mass: f64,
    pub generator: String,
    pub wall_time_seconds: f64,
    pub max_imag_residual: f64,
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn new(
        params: &MfbmParams,
        config: &SimulationConfig,
        plan: &CirculantPlan,
        paths: &[SamplePath],
        wall_time_seconds: f64,
    ) -> Self {
        Self {
            params: ParamFile::from(params),
            config: config.clone(),
            m: plan.m,
            doublings: plan.doublings,
            exact: plan.exact,
            truncated_mass: plan.truncated_mass,
            generator: crate::rng::GENERATOR.to_string(),
            wall_time_seconds,
            max_imag_residual: paths
                .iter()
                .map(|p| p.meta.max_imag_residual)
                .fold(0.0, f64::max),
            files: paths
                .iter()
                .map(|p| path_file_name(p.meta.replicate))
                .collect(),
        }
    }
}

/// Write every replicate and the manifest into `dir`, creating it if needed.
pub fn write_run(
    dir: impl AsRef<Path>,
    paths: &[SamplePath],
    manifest: &RunManifest,
) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    for path in paths {
        write_path_csv(dir.join(path_file_name(path.meta.replicate)), path)?;
    }
    fs::write(
        dir.join(MANIFEST_NAME),
        serde_json::to_string_pretty(manifest)?,
    )?;
    Ok(())
}

/// Load the increments of every path CSV in `dir`, in file-name order.
///
/// A file whose `t` column starts at 0 holds a cumulated path and is differenced.
pub fn read_increment_ensemble(dir: impl AsRef<Path>) -> Result<Vec<DMatrix<f64>>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir.as_ref())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no path CSVs in {}",
            dir.as_ref().display()
        )));
    }
    files
        .iter()
        .map(|f| {
            let (t, x) = read_path_csv(f)?;
            if t.first() == Some(&0) {
                let (rows, p) = x.shape();
                if rows < 2 {
                    return Err(Error::InsufficientData(format!(
                        "{}: too short",
                        f.display()
                    )));
                }
                Ok(DMatrix::from_fn(rows - 1, p, |k, u| {
                    x[(k + 1, u)] - x[(k, u)]
                }))
            } else {
                Ok(x)
            }
        })
        .collect()
}

/// Write serializable rows as a CSV with a header.
pub fn write_rows<T: Serialize>(out: impl std::io::Write, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
