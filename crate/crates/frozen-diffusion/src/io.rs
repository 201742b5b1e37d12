//! Plot-ready serialization: CSV diagnostics and profiles, JSON metadata,
//! and grayscale graymaps for 2D heat maps.
//!
//! Reals are written as `{:.16e}` (17 significant digits), which round-trips
//! every finite f64 exactly; CSV uses LF line endings and fixed headers.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::engine::{DiagnosticsRow, Trajectory};
use crate::frw::AveragedProfile;
use crate::grid2d::MassGrid2D;
use crate::lattice::MassState;

/// Lossless decimal form of a float (17 significant digits).
pub fn format_float(value: f64) -> String {
    format!("{value:.16e}")
}

/// One diagnostics CSV record: an engine row plus the Levy distance of the
/// rescaled state to the limit measure at that time.
#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticsRecord {
    pub t: u64,
    pub beta: usize,
    pub beta_scaled: f64,
    pub m2: f64,
    pub m4: f64,
    pub m6: f64,
    pub m2_residual: f64,
    pub levy_distance: f64,
}

impl DiagnosticsRecord {
    pub fn new(row: &DiagnosticsRow, levy_distance: f64) -> Self {
        Self {
            t: row.t,
            beta: row.beta,
            beta_scaled: row.beta_scaled,
            m2: row.m2,
            m4: row.m4,
            m6: row.m6,
            m2_residual: row.m2_residual,
            levy_distance,
        }
    }
}

/// Diagnostics table with the fixed header
/// `t,beta,beta_scaled,m2,m4,m6,m2_residual,levy_distance`.
pub fn write_diagnostics_csv(
    out: &mut (impl Write + ?Sized),
    records: &[DiagnosticsRecord],
) -> std::io::Result<()> {
    writeln!(out, "t,beta,beta_scaled,m2,m4,m6,m2_residual,levy_distance")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.t,
            r.beta,
            format_float(r.beta_scaled),
            format_float(r.m2),
            format_float(r.m4),
            format_float(r.m6),
            format_float(r.m2_residual),
            format_float(r.levy_distance),
        )?;
    }
    Ok(())
}

/// The same table as a JSON document with run parameters attached.
pub fn write_diagnostics_json(
    out: &mut (impl Write + ?Sized),
    trajectory: &Trajectory,
    records: &[DiagnosticsRecord],
) -> std::io::Result<()> {
    #[derive(Serialize)]
    struct Document<'a> {
        alpha: f64,
        steps: u64,
        rows: &'a [DiagnosticsRecord],
    }
    let doc = Document { alpha: trajectory.alpha, steps: trajectory.steps, rows: records };
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)
}

/// Full mass profile as `site,mass`, every site of the window in ascending
/// order (zeros included, so the file plots directly as a curve).
pub fn write_profile_csv(out: &mut (impl Write + ?Sized), state: &MassState) -> std::io::Result<()> {
    writeln!(out, "site,mass")?;
    let max = state.max_site() as i64;
    for site in -max..=max {
        writeln!(out, "{},{}", site, format_float(state.mass_at(site)))?;
    }
    Ok(())
}

/// Averaged particle profile as `site,fraction`, occupied sites only.
pub fn write_frw_profile_csv(
    out: &mut (impl Write + ?Sized),
    profile: &AveragedProfile,
) -> std::io::Result<()> {
    writeln!(out, "site,fraction")?;
    for (&site, &fraction) in &profile.profile {
        writeln!(out, "{},{}", site, format_float(fraction))?;
    }
    Ok(())
}

/// Reproduction metadata for an averaged run: feed these numbers back to
/// `fbdsim frw` for a bit-identical rerun.
pub fn write_frw_metadata_json(
    out: &mut (impl Write + ?Sized),
    profile: &AveragedProfile,
) -> std::io::Result<()> {
    #[derive(Serialize)]
    struct Metadata {
        n: u64,
        alpha: f64,
        steps: u64,
        trials: u64,
        master_seed: u64,
    }
    let meta = Metadata {
        n: profile.n,
        alpha: profile.alpha,
        steps: profile.t,
        trials: profile.trials,
        master_seed: profile.master_seed,
    };
    serde_json::to_writer_pretty(&mut *out, &meta)?;
    writeln!(out)
}

/// Grid as a dense CSV matrix: one row per y from -R to R, columns x from
/// -R to R.
pub fn write_grid_csv(out: &mut (impl Write + ?Sized), grid: &MassGrid2D) -> std::io::Result<()> {
    let r = grid.radius();
    for y in -r..=r {
        let row: Vec<String> = (-r..=r).map(|x| format_float(grid.mass_at(x, y))).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// A column slice as `y,mass`.
pub fn write_slice_csv(out: &mut (impl Write + ?Sized), slice: &[(i64, f64)]) -> std::io::Result<()> {
    writeln!(out, "y,mass")?;
    for &(y, mass) in slice {
        writeln!(out, "{},{}", y, format_float(mass))?;
    }
    Ok(())
}

/// Binary graymap (P5, maxval 255) of the grid, darker = more mass, scaled
/// linearly by the maximum cell. Top row is y = +R.
pub fn write_grid_pgm(out: &mut (impl Write + ?Sized), grid: &MassGrid2D) -> std::io::Result<()> {
    let r = grid.radius();
    let side = (2 * r + 1) as usize;
    let max = (-r..=r)
        .flat_map(|y| (-r..=r).map(move |x| (x, y)))
        .map(|(x, y)| grid.mass_at(x, y))
        .fold(0.0f64, f64::max);
    write!(out, "P5\n{side} {side}\n255\n")?;
    let mut pixels = Vec::with_capacity(side * side);
    for y in (-r..=r).rev() {
        for x in -r..=r {
            let shade = if max > 0.0 {
                255.0 - (255.0 * grid.mass_at(x, y) / max).round()
            } else {
                255.0
            };
            pixels.push(shade as u8);
        }
    }
    out.write_all(&pixels)
}

/// Parse a `site,value` CSV (as written by the profile writers) back into a
/// map. Used by tests and downstream tooling for round-trip checks.
pub fn read_site_value_csv(text: &str) -> crate::Result<BTreeMap<i64, f64>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            continue;
        }
        let (site, value) = line.split_once(',').ok_or_else(|| {
            crate::Error::Domain(format!("line {} is not site,value: {line:?}", i + 1))
        })?;
        let site: i64 = site
            .parse()
            .map_err(|e| crate::Error::Domain(format!("bad site on line {}: {e}", i + 1)))?;
        let value: f64 = value
            .parse()
            .map_err(|e| crate::Error::Domain(format!("bad value on line {}: {e}", i + 1)))?;
        map.insert(site, value);
    }
    Ok(map)
}
