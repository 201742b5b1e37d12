//! Multi-step driver and moment diagnostics.
//!
//! `run_fbd` iterates the freeze/heat step from `delta(0)` and records a
//! diagnostics row at each scheduled time. Every sampled row is validated
//! against the exact identities of the process (`M_2(t) = t(1-alpha)`, mass
//! conservation, the closed-form boundary bounds); a violation aborts the run
//! with `InvalidState` since it can only mean numeric corruption.

use serde::Serialize;

use crate::lattice::{boundary, freeze_split, heat_step, FrozenSplit, MassState};
use crate::numeric::NeumaierSum;
use crate::{tol, validate_alpha, Error, Result};

/// Largest moment order served by [`moment`] and friends.
pub const MAX_MOMENT_ORDER: usize = 12;

/// Even moment `M_k = sum_x x^k mu(x)` of a state (`k = 0` gives total mass).
///
/// Documented range `k <= 12`, even only; odd moments vanish by symmetry and
/// are rejected rather than silently returned as zero.
pub fn moment(state: &MassState, k: usize) -> Result<f64> {
    half_moment(state.half(), k)
}

/// Even moment of the free part of a split.
pub fn free_moment(split: &FrozenSplit, k: usize) -> Result<f64> {
    half_moment(split.free(), k)
}

/// Even moment of the frozen part of a split.
pub fn frozen_moment(split: &FrozenSplit, k: usize) -> Result<f64> {
    half_moment(split.frozen(), k)
}

fn half_moment(half: &[f64], k: usize) -> Result<f64> {
    if !k.is_multiple_of(2) {
        return Err(Error::Domain(format!(
            "odd moments vanish by symmetry; refusing k = {k}"
        )));
    }
    if k > MAX_MOMENT_ORDER {
        return Err(Error::Domain(format!(
            "moment order {k} beyond documented range {MAX_MOMENT_ORDER}"
        )));
    }
    if k == 0 {
        return Ok(crate::lattice::half_total(half));
    }
    let mut acc = NeumaierSum::new();
    for (x, &m) in half.iter().enumerate().skip(1) {
        if m != 0.0 {
            acc.add(2.0 * m * (x as f64).powi(k as i32));
        }
    }
    Ok(acc.value())
}

/// Sampling schedule for diagnostics rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// Powers of two up to `steps`, plus `steps` itself.
    Geometric,
    /// Every multiple of the stride, plus `steps` itself.
    Linear(u64),
    /// Explicit strictly increasing times.
    Explicit(Vec<u64>),
}

impl Schedule {
    /// Resolve to a strictly increasing list of sample times `<= steps`.
    pub fn times(&self, steps: u64) -> Result<Vec<u64>> {
        let times = match self {
            Schedule::Geometric => {
                let mut v = Vec::new();
                let mut t = 1u64;
                while t <= steps {
                    v.push(t);
                    t = t.saturating_mul(2);
                }
                if v.last() != Some(&steps) && steps >= 1 {
                    v.push(steps);
                }
                v
            }
            Schedule::Linear(stride) => {
                if *stride == 0 {
                    return Err(Error::Domain("linear schedule stride must be >= 1".into()));
                }
                let mut v: Vec<u64> = (1..=steps / stride).map(|i| i * stride).collect();
                if v.last() != Some(&steps) && steps >= 1 {
                    v.push(steps);
                }
                v
            }
            Schedule::Explicit(list) => {
                if list.is_empty() {
                    return Err(Error::Domain("explicit schedule is empty".into()));
                }
                if !list.windows(2).all(|w| w[0] < w[1]) {
                    return Err(Error::Domain(
                        "explicit schedule must be strictly increasing".into(),
                    ));
                }
                if *list.last().unwrap() > steps {
                    return Err(Error::Domain(format!(
                        "schedule time {} exceeds steps {steps}",
                        list.last().unwrap()
                    )));
                }
                list.clone()
            }
        };
        Ok(times)
    }

    /// Parse `geometric`, `linear:<stride>`, or `explicit:<t1,t2,...>`.
    pub fn parse(text: &str) -> Result<Self> {
        if text == "geometric" {
            return Ok(Schedule::Geometric);
        }
        if let Some(stride) = text.strip_prefix("linear:") {
            let stride: u64 = stride
                .parse()
                .map_err(|_| Error::Domain(format!("bad linear stride in {text:?}")))?;
            return Ok(Schedule::Linear(stride));
        }
        if let Some(list) = text.strip_prefix("explicit:") {
            let times = list
                .split(',')
                .map(|s| s.trim().parse::<u64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::Domain(format!("bad explicit schedule {text:?}")))?;
            return Ok(Schedule::Explicit(times));
        }
        Err(Error::Domain(format!(
            "unknown schedule {text:?} (expected geometric, linear:<k>, explicit:<list>)"
        )))
    }
}

/// One sampled diagnostics row.
#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticsRow {
    pub t: u64,
    pub beta: usize,
    /// `beta / sqrt(t)`, zero at `t = 0`.
    pub beta_scaled: f64,
    pub m2: f64,
    pub m4: f64,
    pub m6: f64,
    /// `M_2(t) - t (1 - alpha)`.
    pub m2_residual: f64,
    /// Total mass minus 1.
    pub mass_residual: f64,
    /// Total frozen mass of the split at this time.
    pub frozen_mass: f64,
}

/// Result of a multi-step run.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub alpha: f64,
    pub steps: u64,
    pub rows: Vec<DiagnosticsRow>,
    /// Full states at explicitly requested times.
    pub snapshots: Vec<(u64, MassState)>,
    pub final_state: MassState,
}

/// Run the process for `steps` steps, sampling diagnostics at `sample_times`.
pub fn run_fbd(alpha: f64, steps: u64, sample_times: &[u64]) -> Result<Trajectory> {
    run_fbd_with_snapshots(alpha, steps, sample_times, &[])
}

/// As [`run_fbd`], additionally storing full states at `snapshot_times`.
pub fn run_fbd_with_snapshots(
    alpha: f64,
    steps: u64,
    sample_times: &[u64],
    snapshot_times: &[u64],
) -> Result<Trajectory> {
    validate_alpha(alpha)?;
    validate_times(sample_times, steps)?;
    validate_times(snapshot_times, steps)?;

    let mut state = MassState::delta(alpha)?;
    let mut rows = Vec::with_capacity(sample_times.len());
    let mut snapshots = Vec::with_capacity(snapshot_times.len());
    let mut next_sample = sample_times.iter().copied().peekable();
    let mut next_snap = snapshot_times.iter().copied().peekable();

    for t in 0..=steps {
        if next_sample.peek() == Some(&t) {
            next_sample.next();
            rows.push(diagnostics_row(&state)?);
        }
        if next_snap.peek() == Some(&t) {
            next_snap.next();
            snapshots.push((t, state.clone()));
        }
        if t < steps {
            state = heat_step(&freeze_split(&state)?);
        }
    }

    log::info!(
        "fbd run finished: alpha={alpha} steps={steps} beta={} max_site={}",
        boundary(&state),
        state.max_site()
    );
    Ok(Trajectory { alpha, steps, rows, snapshots, final_state: state })
}

fn validate_times(times: &[u64], steps: u64) -> Result<()> {
    if !times.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Domain("sample times must be strictly increasing".into()));
    }
    if let Some(&last) = times.last() {
        if last > steps {
            return Err(Error::Domain(format!("sample time {last} exceeds steps {steps}")));
        }
    }
    Ok(())
}

/// Build and validate the diagnostics row for a state.
pub fn diagnostics_row(state: &MassState) -> Result<DiagnosticsRow> {
    let alpha = state.alpha();
    let t = state.t();
    let split = freeze_split(state)?;
    let beta = split.beta();
    let m2 = moment(state, 2)?;
    let m4 = moment(state, 4)?;
    let m6 = moment(state, 6)?;
    let tf = t as f64;
    let beta_scaled = if t == 0 { 0.0 } else { beta as f64 / tf.sqrt() };
    let row = DiagnosticsRow {
        t,
        beta,
        beta_scaled,
        m2,
        m4,
        m6,
        m2_residual: m2 - tf * (1.0 - alpha),
        mass_residual: state.total_mass() - 1.0,
        frozen_mass: split.frozen_total(),
    };

    if row.m2_residual.abs() > tol::ROW_M2_REL * tf.max(1.0) {
        return Err(Error::InvalidState(format!(
            "M2 identity violated at t={t}: residual {:e}",
            row.m2_residual
        )));
    }
    if row.mass_residual.abs() > tol::MASS_DRIFT_PER_T * (tf + 1.0) {
        return Err(Error::InvalidState(format!(
            "mass drift at t={t}: residual {:e}",
            row.mass_residual
        )));
    }
    if t >= 1 {
        let lower = (tf * (1.0 - alpha)).sqrt() - 1.0;
        let upper = (tf * (1.0 - alpha) / alpha).sqrt();
        let b = beta as f64;
        if b <= lower - tol::BOUNDARY_BOUND_SLACK || b > upper + tol::BOUNDARY_BOUND_SLACK {
            return Err(Error::InvalidState(format!(
                "boundary {beta} outside ({lower}, {upper}] at t={t}"
            )));
        }
    }
    Ok(row)
}
