//! Fitted truncation orders of the time quotient and the compact space operator.

use fracadi::prelude::*;
use fracadi::verify::compact_space_probe;

fn main() -> Result<()> {
    for kind in [ProbeKind::Bdf2FirstStep, ProbeKind::Bdf2Interior] {
        let p = truncation_order_probe(kind, 1.5)?;
        println!("{kind:?}: slope {:.3}", p.slope);
    }
    let cells = [16, 32, 64, 128];
    for gamma in [1.1, 1.5, 1.9, 2.0] {
        // x^7 (1-x)^7 is smooth enough after zero extension, x^4 (1-x)^4 is not
        let smooth = compact_space_probe(gamma, 7, &cells)?;
        let rough = compact_space_probe(gamma, 4, &cells)?;
        println!(
            "compact gamma={gamma}: k=7 slope {:.3}, k=4 slope {:.3}",
            smooth.slope, rough.slope
        );
    }
    Ok(())
}
