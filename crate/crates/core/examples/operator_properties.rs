//! Randomized quadratic-form checks of the discrete operators on a 15x15 interior.
//!
//! ```text
//! cargo run --example operator_properties -- 1.3 1.8 500
//! ```

use fracadi::prelude::*;
use fracadi::verify::DEFAULT_SEED;

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let alpha = args.first().map_or(1.5, |a| a.parse().expect("alpha"));
    let beta = args.get(1).map_or(1.5, |a| a.parse().expect("beta"));
    let samples = args.get(2).map_or(100, |a| a.parse().expect("samples"));
    let domain = DomainSpec::unit_square(alpha, beta, 1.0, 1.0, 1.0)?;
    let grid = Grid2D::new(&domain, 16, 16)?;
    let report = operator_property_suite(&domain, &grid, samples, DEFAULT_SEED)?;
    for item in &report.items {
        let mark = if item.passed { "ok  " } else { "FAIL" };
        println!(
            "{mark} {:<52} worst margin {:+.3e}",
            item.name, item.worst_margin
        );
    }
    Ok(())
}
