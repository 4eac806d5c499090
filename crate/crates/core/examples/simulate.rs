//! Exact simulation by circulant embedding, written out as CSV plus a manifest.
//!
//! `cargo run --release --example simulate -- [out_dir]`

use std::time::Instant;

use mfbm::circulant::{build_plan, simulate, EigPolicy, SimulationConfig};
use mfbm::io::{write_run, RunManifest};
use mfbm::MfbmParams;

fn main() -> mfbm::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "mfbm_run".into());
    let params = MfbmParams::independent(vec![0.2, 0.6, 0.85], vec![1.0, 0.5, 2.0])?
        .with_pair(0, 1, 0.3, 0.05)
        .with_pair(0, 2, -0.2, 0.0)
        .with_pair(1, 2, 0.25, -0.05);

    let config = SimulationConfig::new(1024)
        .seed(2024)
        .replicates(8)
        .integrate(true)
        .eig_policy(EigPolicy::GrowM { max_doublings: 4 });
    let start = Instant::now();
    let plan = build_plan(&params, &config)?;
    println!("{plan:?}");
    let paths = simulate(&plan, &config)?;
    let manifest = RunManifest::new(
        &params,
        &config,
        &plan,
        &paths,
        start.elapsed().as_secs_f64(),
    );

    let last: Vec<f64> = paths[0].values.row(config.n).iter().copied().collect();
    println!("replicate 0 at t = n: {last:.4?}");
    println!("max imaginary residual {:.2e}", manifest.max_imag_residual);

    write_run(&out, &paths, &manifest)?;
    println!("wrote {} paths to {out}/", paths.len());
    Ok(())
}
