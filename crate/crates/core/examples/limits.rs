//! Partial sums of long-memory linear processes against their multivariate fBm limit.
//!
//! `cargo run --release --example limits`

use mfbm::limits::{compare_limits, limit_target, KernelSpec, KernelTerm, NoiseLaw, Regime, Side};

fn main() -> mfbm::Result<()> {
    let term = |i, j, side, d, alpha| KernelTerm {
        i,
        j,
        side,
        regime: Regime::PowerPos,
        d,
        alpha,
    };
    let spec = KernelSpec::new(
        2,
        vec![
            term(0, 0, Side::Plus, 0.15, 1.0),
            term(0, 1, Side::Minus, 0.15, 0.6),
            term(1, 1, Side::Plus, 0.2, 1.0),
            term(1, 0, Side::Plus, 0.2, 0.4),
        ],
    )?;
    println!("kernel file:\n{}", spec.to_json_string()?);

    let target = limit_target(&spec)?;
    println!("limit H = {:?}", target.params.hurst());
    println!("M+ = {:.4}M- = {:.4}", target.m_plus, target.m_minus);

    for n in [128, 512] {
        let spec = spec.clone().with_truncation(16 * n);
        let rows = compare_limits(&spec, NoiseLaw::Rademacher, n, &[1.0], 5, 1000)?;
        for r in rows {
            println!(
                "n = {n:4}  ({},{})  empirical {:+.4} +- {:.4}  limit {:+.4}",
                r.i + 1,
                r.j + 1,
                r.empirical_cov,
                r.mc_stderr,
                r.target_cov
            );
        }
    }
    Ok(())
}
