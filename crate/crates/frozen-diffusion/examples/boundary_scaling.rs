//! Track beta_t / sqrt(t) along a geometric time grid and watch it approach
//! the fixed point q_alpha for several freezing fractions.

use frozen_diffusion::{run_fbd, solve_q};

fn main() -> frozen_diffusion::Result<()> {
    let times: Vec<u64> = (4..=16).map(|p| 1u64 << p).collect();
    println!("{:>8}  {:>12}  {:>12}  {:>12}", "t", "alpha=0.25", "alpha=0.5", "alpha=0.75");

    let mut columns = Vec::new();
    let mut roots = Vec::new();
    for &alpha in &[0.25, 0.5, 0.75] {
        let trajectory = run_fbd(alpha, *times.last().unwrap(), &times)?;
        columns.push(
            trajectory
                .rows
                .iter()
                .map(|row| row.beta_scaled)
                .collect::<Vec<_>>(),
        );
        roots.push(solve_q(alpha, 1e-13)?.q());
    }

    for (i, &t) in times.iter().enumerate() {
        println!(
            "{:>8}  {:>12.6}  {:>12.6}  {:>12.6}",
            t, columns[0][i], columns[1][i], columns[2][i]
        );
    }
    println!(
        "{:>8}  {:>12.6}  {:>12.6}  {:>12.6}",
        "q_alpha", roots[0], roots[1], roots[2]
    );
    println!();
    println!("deviation |beta/sqrt(t) - q| at the last row:");
    for (column, (&alpha, q)) in columns.iter().zip([0.25, 0.5, 0.75].iter().zip(&roots)) {
        println!("  alpha = {alpha}: {:.2e}", (column.last().unwrap() - q).abs());
    }
    Ok(())
}
