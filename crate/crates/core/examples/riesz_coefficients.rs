//! Fractional centered-difference weights and the resulting 1D operators.

use fracadi::prelude::*;

fn main() -> Result<()> {
    for gamma in [1.1, 1.5, 1.9, 2.0] {
        let c = riesz_coefficients(gamma, 6)?;
        let head: Vec<String> = c.g.iter().map(|g| format!("{g:+.6}")).collect();
        println!("gamma={gamma}: {}", head.join(" "));
    }

    // 1D operator on 7 interior nodes of (0, 1)
    let op = build_frac_operator(1.5, 1.0, 0.125, 7)?;
    println!("\nToeplitz column of delta (gamma=1.5, h=1/8):");
    for t in &op.toeplitz_col {
        println!("  {t:+.6e}");
    }
    println!("compact weight c2 = {}", op.c2);

    // apply to a sampled sine and compare with the classical second difference
    let lap = build_frac_operator(2.0, 1.0, 0.125, 7)?;
    let v: Vec<f64> = (1..=7)
        .map(|i| (std::f64::consts::PI * i as f64 / 8.0).sin())
        .collect();
    let mut out = vec![0.0; 7];
    lap.apply_line(&v, &mut out);
    println!(
        "\ngamma=2 applied to sin(pi x): {:?}",
        out.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>()
    );
    Ok(())
}
