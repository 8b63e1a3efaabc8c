//! Fractional FitzHugh-Nagumo on (0, 2.5)^2, printing a coarse ASCII view of the
//! potential every few steps.
//!
//! ```text
//! cargo run --release --example fitzhugh_nagumo -- 1.7
//! ```

use fracadi::prelude::*;

fn ascii(u: &Field2D, stride: usize) {
    const SHADES: &[u8] = b" .:-=+*#%@";
    for j in (0..u.ny()).step_by(stride).rev() {
        let row: String = (0..u.nx())
            .step_by(stride)
            .map(|i| {
                let v = u.get(i, j).clamp(0.0, 1.0);
                SHADES[(v * (SHADES.len() - 1) as f64).round() as usize] as char
            })
            .collect();
        println!("  {row}");
    }
}

fn main() -> Result<()> {
    let order = std::env::args()
        .nth(1)
        .map_or(1.7, |a| a.parse().expect("order"));
    let mut sim = FhnSimulation::new(
        order,
        order,
        1e-4,
        1e-4,
        50,
        200,
        100.0,
        FhnParams::default(),
        None,
    )?;
    sim.run(|n, t, u, w| {
        if n % 50 == 0 {
            println!(
                "step {n} t={t} max u={:.4} max w={:.4}",
                u.max_abs(),
                w.max_abs()
            );
            ascii(u, 3);
        }
    })?;
    println!("factorizations: {}", sim.factorization_count());
    Ok(())
}
