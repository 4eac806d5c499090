//! Trace the edge of the admissible (rho, eta') region and tabulate the maximal correlation.
//!
//! `cargo run --example boundary`

use mfbm::existence::{admissible_boundary, is_admissible, max_corr_grid, pair_from_eta_prime};
use mfbm::SpecialCase;

fn main() -> mfbm::Result<()> {
    let (h1, h2) = (0.2, 0.9);
    let curve = admissible_boundary(h1, h2, 12)?;
    println!("boundary for H = ({h1}, {h2}):");
    for pt in &curve {
        println!("  rho = {:+.5}  eta' = {:+.5}", pt.rho, pt.eta_prime);
    }

    // Just inside is fine, just outside is not.
    let pt = curve[curve.len() / 2];
    for shrink in [0.99, 1.01] {
        let params = pair_from_eta_prime(h1, h2, shrink * pt.rho, shrink * pt.eta_prime)?;
        println!(
            "  scaled by {shrink}: admissible = {}",
            is_admissible(&params, 1e-10).admissible
        );
    }

    for case in [SpecialCase::Causal, SpecialCase::WellBalanced] {
        let grid = max_corr_grid(5, case);
        let worst = grid
            .iter()
            .min_by(|a, b| a.max_rho.total_cmp(&b.max_rho))
            .unwrap();
        println!(
            "{case:?}: smallest max |rho| on a 5x5 grid is {:.4} at H = ({:.2}, {:.2})",
            worst.max_rho, worst.h1, worst.h2
        );
    }
    Ok(())
}
