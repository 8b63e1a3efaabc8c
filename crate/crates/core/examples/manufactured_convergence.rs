//! Spatial convergence ladder on the manufactured benchmark.
//!
//! Halves `h` and quarters `tau` together so that the fourth-order spatial error
//! dominates, then prints errors and observed orders.
//!
//! ```text
//! cargo run --release --example manufactured_convergence -- 1.5 1.9
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
    let levels = [
        Level { m: 8, steps: 64 },
        Level { m: 16, steps: 256 },
        Level { m: 32, steps: 1024 },
        Level { m: 64, steps: 4096 },
    ];
    let report = convergence_study(&bench, &levels, LadderMode::Spatial)?;
    println!("alpha={alpha} beta={beta}");
    println!(
        "{:>8} {:>10} {:>12} {:>7} {:>12} {:>7} {:>8}",
        "h", "tau", "max", "rate", "l2", "rate", "secs"
    );
    for row in &report.rows {
        let fmt_rate = |r: Option<f64>| r.map_or("*".to_string(), |v| format!("{v:.3}"));
        println!(
            "{:>8} {:>10} {:>12.4e} {:>7} {:>12.4e} {:>7} {:>8.2}",
            format!("1/{}", row.m),
            format!("1/{}", row.steps),
            row.error.max,
            fmt_rate(row.rate_max),
            row.error.l2,
            fmt_rate(row.rate_l2),
            row.seconds
        );
    }
    Ok(())
}
