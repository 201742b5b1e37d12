//! The exact moment structure of the process, demonstrated numerically.
//!
//! Three layers, checked on one run at alpha = 0.5:
//!  1. the exact identity M_2(t) = t (1 - alpha),
//!  2. the one-step change of M_{2k} written in free moments of the
//!     pre-step state (binomial expansion of one heat step),
//!  3. the t -> infinity limits M_{2k}(t)/t^k -> P_k(q) + alpha q^{2k}.

use frozen_diffusion::analysis::poly_p;
use frozen_diffusion::engine::{free_moment, moment};
use frozen_diffusion::numeric::double_factorial;
use frozen_diffusion::{freeze_split, heat_step, solve_q, MassState};

fn main() -> frozen_diffusion::Result<()> {
    let alpha = 0.5;
    let steps = 10_000u64;
    let lm = solve_q(alpha, 1e-13)?;
    let q = lm.q();

    let mut state = MassState::delta(alpha)?;
    let mut worst_change = [0.0f64; 3];
    let mut m_prev = [0.0f64; 3];
    for _ in 0..steps {
        let split = freeze_split(&state)?;
        let nu0 = free_moment(&split, 0)?;
        let nu2 = free_moment(&split, 2)?;
        let nu4 = free_moment(&split, 4)?;
        // M_{2k}(t+1) - M_{2k}(t) = sum_i C(2k, 2k-2i) nu_{2k-2i}
        let rhs = [nu0, 6.0 * nu2 + nu0, 15.0 * nu4 + 15.0 * nu2 + nu0];
        state = heat_step(&split);
        let m_next = [moment(&state, 2)?, moment(&state, 4)?, moment(&state, 6)?];
        for k in 0..3 {
            let rel = (m_next[k] - m_prev[k] - rhs[k]).abs() / rhs[k].abs().max(1.0);
            worst_change[k] = worst_change[k].max(rel);
        }
        m_prev = m_next;
    }

    let t = steps as f64;
    println!("alpha = {alpha}, t = {steps}, q = {q:.12}");
    println!();
    println!("exact second moment:");
    println!("  M_2(t)        = {:.12e}", m_prev[0]);
    println!("  t (1 - alpha) = {:.12e}", t * (1.0 - alpha));
    println!("  residual      = {:.2e}", m_prev[0] - t * (1.0 - alpha));
    println!();
    println!("one-step change identity, worst relative residual over the run:");
    for (k, worst) in worst_change.iter().enumerate() {
        println!("  k = {}: {:.2e}", k + 1, worst);
    }
    println!();
    println!("limits of the scaled moments (P_k(q) + alpha q^(2k)):");
    for k in 1..=3usize {
        let scaled = m_prev[k - 1] / t.powi(k as i32);
        let limit = poly_p(k, q, alpha)? + alpha * q.powi(2 * k as i32);
        println!(
            "  M_{}(t)/t^{k} = {scaled:.8}   limit = {limit:.8}   gap = {:.2e}",
            2 * k,
            (scaled - limit).abs()
        );
    }
    println!();
    println!("note: P_k(q) is the 2k-th moment of the truncated Gaussian part;");
    println!("P_1(q) = 1 - alpha - alpha q^2 = {:.8}", poly_p(1, q, alpha)?);
    println!("normalizing by (2k-1)!! keeps the recursion stable, e.g. (2*3-1)!! = {}", double_factorial(3));
    Ok(())
}
