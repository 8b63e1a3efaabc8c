//! Compares one factorized ADI step with a dense solve of the unsplit system.

use fracadi::prelude::*;
use fracadi::verify::DEFAULT_SEED;

fn main() -> Result<()> {
    let n = std::env::args()
        .nth(1)
        .map_or(7, |a| a.parse().expect("interior size"));
    for alpha in [1.1, 1.5, 1.9] {
        for beta in [1.1, 1.5, 1.9] {
            for schedule in [SigmaSchedule::First, SigmaSchedule::Bdf2] {
                let r = oracle_step_check(alpha, beta, schedule, n, 0.05, DEFAULT_SEED)?;
                println!(
                    "alpha={alpha} beta={beta} sigma={:.4}  max|adi - dense|={:.2e}  residual={:.2e}",
                    r.sigma, r.max_diff, r.residual
                );
            }
        }
    }
    Ok(())
}
