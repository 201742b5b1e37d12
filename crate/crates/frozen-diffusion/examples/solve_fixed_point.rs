//! Solve x g(x) = (1 - alpha) / alpha across a grid of freezing fractions
//! and report both residual forms for each root.
//!
//! `q_alpha` decreases in alpha: the more mass freezes per step, the closer
//! to the origin the frozen front sits on the sqrt(t) scale.

use frozen_diffusion::analysis::{atom_form_residual, fixed_point_residual};
use frozen_diffusion::solve_q;

fn main() -> frozen_diffusion::Result<()> {
    println!(
        "{:>6}  {:>20}  {:>14}  {:>14}",
        "alpha", "q", "series residual", "atom residual"
    );
    for alpha in [0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99] {
        let lm = solve_q(alpha, 1e-13)?;
        println!(
            "{:>6}  {:>20.16}  {:>14.2e}  {:>14.2e}",
            alpha,
            lm.q(),
            fixed_point_residual(&lm),
            atom_form_residual(&lm)
        );
    }
    println!();
    println!("series residual: q g(q) - (1 - alpha) / alpha");
    println!("atom residual:   (alpha/2) q - (1 - alpha) phi(q) / Phi([-q, q]),");
    println!("                 the balance between each atom and the Gaussian bulk");
    Ok(())
}
