//! Check simulated increments against the theoretical cross-covariances.
//!
//! `cargo run --release --example verify`

use mfbm::circulant::{build_plan, dense_oracle_simulate, simulate, SimulationConfig};
use mfbm::stats::{compare_report, increments, summarize, two_sample_report, Z_BUDGET, Z_GATE};
use mfbm::MfbmParams;

fn main() -> mfbm::Result<()> {
    let params =
        MfbmParams::independent(vec![0.35, 0.7], vec![1.0, 1.0])?.with_pair(0, 1, 0.5, 0.1);
    let (n, reps) = (64, 2000);
    let lags: Vec<i64> = (0..=20).collect();

    let config = SimulationConfig::new(n).seed(11).replicates(reps);
    let plan = build_plan(&params, &config)?;
    let ens: Vec<_> = simulate(&plan, &config)?.iter().map(increments).collect();

    let report = compare_report(&ens, &params, &lags, 1.0)?;
    let s = report.summary;
    println!(
        "{} cells: max |z| {:.2}, mean z {:+.3}, over {Z_GATE}: {:.4}  pass = {}",
        s.cells,
        s.max_abs_z,
        s.mean_z,
        s.fraction_over_gate,
        s.passes(Z_BUDGET)
    );
    for row in report.rows.iter().filter(|r| r.i != r.j).take(4) {
        println!(
            "  lag {} ({},{}): {:+.4} vs {:+.4}  z = {:+.2}",
            row.lag,
            row.i + 1,
            row.j + 1,
            row.empirical,
            row.theoretical,
            row.z
        );
    }

    // Same law from a dense Cholesky factor.
    let dense: Vec<_> = dense_oracle_simulate(&params, n, 12, reps)?
        .into_iter()
        .map(|p| p.values)
        .collect();
    let two = summarize(&two_sample_report(&ens, &dense, &lags)?, Z_GATE);
    println!("circulant vs dense: max |z| {:.2}", two.max_abs_z);

    // Wrong parameters get caught.
    let wrong = MfbmParams::independent(vec![0.45, 0.7], vec![1.0, 1.0])?.with_pair(0, 1, 0.5, 0.1);
    let bad = compare_report(&ens, &wrong, &lags, 1.0)?.summary;
    println!(
        "against H_1 = 0.45: over gate {:.3}  pass = {}",
        bad.fraction_over_gate,
        bad.passes(Z_BUDGET)
    );
    Ok(())
}
