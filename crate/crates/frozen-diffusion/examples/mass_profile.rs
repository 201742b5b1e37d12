//! Evolve the mass process for 25000 steps and export the full profile.
//!
//! Writes `site,mass` CSV for mu_t to the system temp directory and prints
//! where the frozen pile sits relative to the q * sqrt(t) prediction.

use std::fs::File;
use std::io::BufWriter;

use frozen_diffusion::analysis::levy_distance;
use frozen_diffusion::engine::moment;
use frozen_diffusion::io::write_profile_csv;
use frozen_diffusion::{boundary, freeze_split, run_fbd, solve_q};

fn main() -> frozen_diffusion::Result<()> {
    let alpha = 0.5;
    let steps = 25_000;

    let trajectory = run_fbd(alpha, steps, &[steps])?;
    let state = &trajectory.final_state;
    let lm = solve_q(alpha, 1e-13)?;

    let beta = boundary(state);
    let t = steps as f64;
    println!("alpha = {alpha}, t = {steps}");
    println!("boundary beta      = {beta}");
    println!("beta / sqrt(t)     = {:.6}  (q = {:.6})", beta as f64 / t.sqrt(), lm.q());
    println!("M_2(t)             = {:.6}  (t (1 - alpha) = {})", moment(state, 2)?, t * (1.0 - alpha));
    println!("levy distance to scaled limit = {:.6}", levy_distance(state, &lm)?);

    // The frozen mass concentrates on at most two sites per side.
    let split = freeze_split(state)?;
    println!("frozen mass by site (right half):");
    for (x, &m) in split.frozen().iter().enumerate() {
        if m > 0.0 {
            println!("  site {x:>5}: {m:.9}");
        }
    }

    let path = std::env::temp_dir().join("fbd_mass_profile.csv");
    let mut out = BufWriter::new(File::create(&path)?);
    write_profile_csv(&mut out, state)?;
    println!("profile written to {}", path.display());
    Ok(())
}
