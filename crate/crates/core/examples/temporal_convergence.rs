//! Temporal ladder at fixed `h = 1/200`: `tau = 1/10 .. 1/80`.
//!
//! ```text
//! cargo run --release --example temporal_convergence -- 1.1 1.5
//! ```

use fracadi::prelude::*;

fn main() -> Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("numeric argument"))
        .collect();
    let alpha = args.first().copied().unwrap_or(1.1);
    let beta = args.get(1).copied().unwrap_or(1.5);
    let bench = ManufacturedProblem::new(alpha, beta, 2.0, 4.0);
    let levels: Vec<Level> = [10, 20, 40, 80]
        .iter()
        .map(|&steps| Level { m: 200, steps })
        .collect();
    let report = convergence_study(&bench, &levels, LadderMode::Temporal)?;
    for row in &report.rows {
        println!(
            "tau=1/{:<3} max={:.4e} rate={:>6} l2={:.4e} rate={:>6}",
            row.steps,
            row.error.max,
            row.rate_max.map_or("*".into(), |r| format!("{r:.3}")),
            row.error.l2,
            row.rate_l2.map_or("*".into(), |r| format!("{r:.3}")),
        );
    }
    Ok(())
}
