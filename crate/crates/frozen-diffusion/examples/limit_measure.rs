//! The scaled limit: two atoms of mass alpha/2 at +-q plus a Gaussian
//! truncated to [-q, q], and how fast the rescaled process approaches it.

use frozen_diffusion::analysis::{
    levy_distance, limit_cdf, moment_growth_check, trunc_gauss_moment,
    trunc_gauss_moment_quadrature,
};
use frozen_diffusion::{run_fbd, solve_q};

fn main() -> frozen_diffusion::Result<()> {
    let alpha = 0.5;
    let lm = solve_q(alpha, 1e-13)?;
    let q = lm.q();
    println!("alpha = {alpha}: atoms of mass {} at +-{q:.12}", alpha / 2.0);

    println!();
    println!("limit CDF (right-continuous):");
    for x in [-q - 0.01, -q, -0.5, 0.0, 0.5, q] {
        println!("  F({x:>8.4}) = {:.10}", limit_cdf(&lm, x));
    }

    println!();
    println!("2k-th moments of the truncated Gaussian part, two routes:");
    println!("{:>4}  {:>22}  {:>22}", "k", "stable recursion", "adaptive quadrature");
    for k in [1, 2, 3, 5, 10] {
        println!(
            "{k:>4}  {:>22.15e}  {:>22.15e}",
            trunc_gauss_moment(k, &lm)?,
            trunc_gauss_moment_quadrature(k, &lm)?
        );
    }

    let growth = moment_growth_check(&lm, 15)?;
    println!();
    println!(
        "moment growth m_k <= c^k k! with c = {}: {}",
        growth.c,
        if growth.all_pass { "holds for k <= 15 (moment problem is determinate)" } else { "FAILS" }
    );

    println!();
    println!("levy distance of the rescaled process to the limit:");
    for steps in [100u64, 1_000, 10_000] {
        let trajectory = run_fbd(alpha, steps, &[steps])?;
        println!(
            "  t = {steps:>6}: {:.6}",
            levy_distance(&trajectory.final_state, &lm)?
        );
    }
    Ok(())
}
