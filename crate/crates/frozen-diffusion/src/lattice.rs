//! Symmetric mass states on `Z` and the freeze/diffuse step.
//!
//! A state is a probability measure `mu_t`, symmetric about the origin,
//! stored as a half array: `half[0]` is the mass at site 0, `half[x]` the mass
//! at each of `+x` and `-x`. One step of the dynamics:
//!
//! 1. boundary: `beta_t = sup { x : mu_t([x, inf)) >= alpha/2 }`,
//! 2. freeze: the extreme `alpha/2` mass per side stops moving; sites above
//!    `beta_t` freeze whole, the remainder of the quota freezes at `beta_t`,
//! 3. heat: every site's free mass splits evenly onto its two neighbours,
//!    `mu_{t+1}(x) = (nu_t(x-1) + nu_t(x+1)) / 2 + f_t(x)`.
//!
//! Frozen mass is recomputed from scratch every step, so mass frozen earlier
//! re-enters the free pool as soon as it stops being extreme.

use crate::numeric::NeumaierSum;
use crate::{tol, validate_alpha, Error, Result};

/// Symmetric mass distribution at a fixed time.
#[derive(Clone, Debug, PartialEq)]
pub struct MassState {
    alpha: f64,
    t: u64,
    half: Vec<f64>,
}

impl MassState {
    /// Unit mass at the origin, time zero.
    pub fn delta(alpha: f64) -> Result<Self> {
        validate_alpha(alpha)?;
        Ok(Self { alpha, t: 0, half: vec![1.0] })
    }

    /// Build a state from an explicit half array (`half[x]` = mass at `+-x`).
    ///
    /// Rejects non-finite or negative entries and totals away from 1 by more
    /// than 1e-9. Trailing zero sites are trimmed.
    pub fn from_half(alpha: f64, t: u64, half: Vec<f64>) -> Result<Self> {
        validate_alpha(alpha)?;
        if half.is_empty() {
            return Err(Error::InvalidState("empty half array".into()));
        }
        for (x, &m) in half.iter().enumerate() {
            if !m.is_finite() || m < 0.0 {
                return Err(Error::InvalidState(format!("mass {m} at site {x}")));
            }
        }
        let mut state = Self { alpha, t, half };
        state.trim();
        let total = state.total_mass();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("total mass {total} != 1")));
        }
        Ok(state)
    }

    pub(crate) fn from_parts_unchecked(alpha: f64, t: u64, half: Vec<f64>) -> Self {
        let mut state = Self { alpha, t, half };
        state.trim();
        state
    }

    fn trim(&mut self) {
        while self.half.len() > 1 && *self.half.last().unwrap() == 0.0 {
            self.half.pop();
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Largest site index stored; mass is zero strictly beyond it.
    pub fn max_site(&self) -> usize {
        self.half.len() - 1
    }

    /// Half-array view: `half()[x]` is the mass at each of `+x` and `-x`.
    pub fn half(&self) -> &[f64] {
        &self.half
    }

    /// Mass at a signed site.
    pub fn mass_at(&self, x: i64) -> f64 {
        let x = x.unsigned_abs() as usize;
        self.half.get(x).copied().unwrap_or(0.0)
    }

    /// Total mass over the whole line (compensated).
    pub fn total_mass(&self) -> f64 {
        let mut acc = NeumaierSum::new();
        acc.add(self.half[0]);
        for &m in &self.half[1..] {
            acc.add(2.0 * m);
        }
        acc.value()
    }

    /// Overwrite one site's half-array entry, bypassing validation.
    ///
    /// Exists for fault injection in the negative-control checks; never use
    /// it to construct real states.
    #[doc(hidden)]
    pub fn set_site_mass(&mut self, x: usize, mass: f64) {
        if x >= self.half.len() {
            self.half.resize(x + 1, 0.0);
        }
        self.half[x] = mass;
        self.trim();
    }
}

/// Outcome of freezing a state: the immobile extreme mass, the free rest, and
/// the boundary site. Arrays use the same half indexing as [`MassState`].
#[derive(Clone, Debug, PartialEq)]
pub struct FrozenSplit {
    alpha: f64,
    t: u64,
    beta: usize,
    free: Vec<f64>,
    frozen: Vec<f64>,
}

impl FrozenSplit {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// Boundary site `beta_t`.
    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn free(&self) -> &[f64] {
        &self.free
    }

    pub fn frozen(&self) -> &[f64] {
        &self.frozen
    }

    /// Total frozen mass; equals `alpha` by construction.
    pub fn frozen_total(&self) -> f64 {
        half_total(&self.frozen)
    }

    /// Total free mass; equals `1 - alpha` by construction.
    pub fn free_total(&self) -> f64 {
        half_total(&self.free)
    }
}

pub(crate) fn half_total(half: &[f64]) -> f64 {
    let mut acc = NeumaierSum::new();
    acc.add(half[0]);
    for &m in &half[1..] {
        acc.add(2.0 * m);
    }
    acc.value()
}

/// Boundary quantile `beta_t = sup { x : mu_t([x, inf)) >= alpha/2 }`.
///
/// Suffix masses are accumulated from the outside in, so each comparison sees
/// the numerically cleanest value available; a suffix within
/// [`tol::BOUNDARY_TIE`] below `alpha/2` counts as reaching it. Always
/// well-defined: `mu([0, inf)) >= 1/2 > alpha/2`.
pub fn boundary(state: &MassState) -> usize {
    let threshold = state.alpha / 2.0 - tol::BOUNDARY_TIE;
    let mut suffix = 0.0;
    for x in (1..=state.max_site()).rev() {
        suffix += state.half[x];
        if suffix >= threshold {
            return x;
        }
    }
    0
}

/// Split a state into frozen and free parts.
///
/// Sites strictly above `beta` freeze whole; the remaining quota
/// `alpha/2 - mu((beta, inf))` freezes at `beta`. When `beta = 0` the two
/// sides' quotas land on the same site and add, capped at the origin mass
/// (for valid states the cap never binds). Fails with `InvalidState` on
/// corrupt inputs: a negative or non-finite mass anywhere, or a freeze
/// quota outside what the boundary site holds.
pub fn freeze_split(state: &MassState) -> Result<FrozenSplit> {
    let alpha = state.alpha;
    for (x, &m) in state.half.iter().enumerate() {
        if m < 0.0 || !m.is_finite() {
            return Err(Error::InvalidState(format!(
                "negative or non-finite mass {m} at site {x} (t={})",
                state.t
            )));
        }
    }
    let beta = boundary(state);
    let n = state.half.len();
    let mut frozen = vec![0.0; n];

    let mut suffix = NeumaierSum::new();
    for (slot, &m) in frozen.iter_mut().zip(&state.half).skip(beta + 1) {
        *slot = m;
        suffix.add(m);
    }
    let above = suffix.value();

    if beta >= 1 {
        let quota = alpha / 2.0 - above;
        if quota < -tol::FROZEN_TOTAL || quota > state.half[beta] + tol::FROZEN_TOTAL {
            return Err(Error::InvalidState(format!(
                "freeze quota {quota} at beta={beta} outside [0, {}] (t={})",
                state.half[beta],
                state.t
            )));
        }
        frozen[beta] = quota.clamp(0.0, state.half[beta]);
    } else {
        // Both sides' quotas overlap at the origin.
        let quota = alpha - 2.0 * above;
        if quota < -tol::FROZEN_TOTAL || quota > state.half[0] + tol::FROZEN_TOTAL {
            return Err(Error::InvalidState(format!(
                "origin freeze quota {quota} outside [0, {}] (t={})",
                state.half[0], state.t
            )));
        }
        frozen[0] = quota.clamp(0.0, state.half[0]);
    }

    let free = state
        .half
        .iter()
        .zip(&frozen)
        .map(|(&m, &f)| m - f)
        .collect();

    Ok(FrozenSplit { alpha, t: state.t, beta, free, frozen })
}

/// One discrete heat step on the free mass; frozen mass stays put.
///
/// `mu_{t+1}(x) = (nu(x-1) + nu(x+1)) / 2 + f(x)`, evaluated in half-array
/// coordinates. The support grows by at most one site.
pub fn heat_step(split: &FrozenSplit) -> MassState {
    let n = split.free.len();
    let nu = |x: usize| split.free.get(x).copied().unwrap_or(0.0);
    let mut half = Vec::with_capacity(n + 1);
    // Site 0 receives half of each neighbour's full mass: nu(-1)/2 + nu(1)/2.
    half.push(split.frozen[0] + nu(1));
    for x in 1..=n {
        let inflow = if x == 1 {
            // nu(0) is the full origin mass, not a per-side half.
            0.5 * (nu(0) + nu(2))
        } else {
            0.5 * (nu(x - 1) + nu(x + 1))
        };
        let f = split.frozen.get(x).copied().unwrap_or(0.0);
        half.push(f + inflow);
    }
    MassState::from_parts_unchecked(split.alpha, split.t + 1, half)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(state: &MassState) -> MassState {
        heat_step(&freeze_split(state).unwrap())
    }

    // alpha = 1/2 from delta(0): every mass is dyadic, so the first steps are
    // exact in binary floating point and can be asserted with equality.
    #[test]
    fn exact_evolution_alpha_half() {
        let mu0 = MassState::delta(0.5).unwrap();
        assert_eq!(mu0.half(), &[1.0]);

        let s0 = freeze_split(&mu0).unwrap();
        assert_eq!(s0.beta(), 0);
        assert_eq!(s0.frozen(), &[0.5]);
        assert_eq!(s0.free(), &[0.5]);

        let mu1 = heat_step(&s0);
        assert_eq!(mu1.half(), &[0.5, 0.25]);
        assert_eq!(mu1.t(), 1);

        let mu2 = step(&mu1);
        assert_eq!(mu2.half(), &[0.0, 0.5]);

        let mu3 = step(&mu2);
        assert_eq!(mu3.half(), &[0.25, 0.25, 0.125]);
        assert_eq!(mu3.total_mass(), 1.0);
    }

    #[test]
    fn freeze_split_two_point_frozen_support() {
        // mu_3 at alpha = 1/2: frozen = {+-2: 1/8, +-1: 1/8}, free = {0: 1/4, +-1: 1/8}.
        let mu3 = MassState::from_half(0.5, 3, vec![0.25, 0.25, 0.125]).unwrap();
        let split = freeze_split(&mu3).unwrap();
        assert_eq!(split.beta(), 1);
        assert_eq!(split.frozen(), &[0.0, 0.125, 0.125]);
        assert_eq!(split.free(), &[0.25, 0.125, 0.0]);
        assert_eq!(split.frozen_total(), 0.5);
        assert_eq!(split.free_total(), 0.5);
    }

    // alpha = 3/4 keeps beta at 0 for several steps, exercising the origin
    // overlap rule; all masses stay dyadic so equality assertions hold,
    // including an exact suffix tie at t = 3.
    #[test]
    fn exact_evolution_alpha_three_quarters() {
        let mu0 = MassState::delta(0.75).unwrap();

        let s0 = freeze_split(&mu0).unwrap();
        assert_eq!(s0.beta(), 0);
        assert_eq!(s0.frozen(), &[0.75]);

        let mu1 = heat_step(&s0);
        assert_eq!(mu1.half(), &[0.75, 0.125]);

        let s1 = freeze_split(&mu1).unwrap();
        assert_eq!(s1.beta(), 0);
        assert_eq!(s1.frozen(), &[0.5, 0.125]);
        let mu2 = heat_step(&s1);
        assert_eq!(mu2.half(), &[0.5, 0.25]);

        let mu3 = step(&mu2);
        assert_eq!(mu3.half(), &[0.25, 0.375]);

        // Suffix at site 1 is exactly alpha/2: the tie resolves to beta = 1.
        let s3 = freeze_split(&mu3).unwrap();
        assert_eq!(s3.beta(), 1);
        assert_eq!(s3.frozen(), &[0.0, 0.375]);
        assert_eq!(s3.free(), &[0.25, 0.0]);

        let mu4 = heat_step(&s3);
        assert_eq!(mu4.half(), &[0.0, 0.5]);
        let mu5 = step(&mu4);
        assert_eq!(mu5.half(), &[0.125, 0.375, 0.0625]);
        assert_eq!(mu5.total_mass(), 1.0);
    }

    #[test]
    fn boundary_tie_tolerance_absorbs_representation_fuzz() {
        // Suffix 1e-15 below alpha/2 still counts as reaching the quantile.
        let eps = 1e-15;
        let side = 0.25 - eps;
        let origin = 1.0 - 2.0 * side;
        let state = MassState::from_half(0.5, 1, vec![origin, side]).unwrap();
        assert_eq!(boundary(&state), 1);

        // A deficit beyond the tie tolerance pushes the boundary inward.
        let side = 0.25 - 1e-12;
        let origin = 1.0 - 2.0 * side;
        let state = MassState::from_half(0.5, 1, vec![origin, side]).unwrap();
        assert_eq!(boundary(&state), 0);
    }

    #[test]
    fn support_never_exceeds_beta_plus_one_after_step() {
        let mut state = MassState::delta(0.3).unwrap();
        for _ in 0..200 {
            let split = freeze_split(&state).unwrap();
            state = heat_step(&split);
            assert!(state.max_site() <= split.beta() + 1);
            // Equivalent statement: mass vanishes at and beyond beta_t + 2.
            let beta_now = boundary(&state);
            assert!(state.max_site() < beta_now + 2);
        }
    }

    #[test]
    fn mass_conserved_per_step() {
        for alpha in [0.1, 0.5, 0.9] {
            let mut state = MassState::delta(alpha).unwrap();
            for _ in 0..500 {
                let before = state.total_mass();
                state = step(&state);
                let after = state.total_mass();
                assert!(
                    (after - before).abs() <= tol::MASS_CONSERVATION_PER_STEP,
                    "alpha={alpha} t={} drift={:e}",
                    state.t(),
                    after - before
                );
            }
        }
    }

    #[test]
    fn frozen_total_is_alpha_every_step() {
        for alpha in [0.25, 0.6180339887498949, 0.75] {
            let mut state = MassState::delta(alpha).unwrap();
            for _ in 0..300 {
                let split = freeze_split(&state).unwrap();
                assert!((split.frozen_total() - alpha).abs() <= tol::FROZEN_TOTAL);
                assert!((split.free_total() - (1.0 - alpha)).abs() <= tol::FROZEN_TOTAL);
                state = heat_step(&split);
            }
        }
    }

    #[test]
    fn corrupt_state_is_rejected() {
        assert!(MassState::from_half(0.5, 0, vec![0.5, 0.4]).is_err()); // total 1.3
        assert!(MassState::from_half(0.5, 0, vec![1.2, -0.1]).is_err()); // negative
        assert!(MassState::from_half(1.5, 0, vec![1.0]).is_err()); // alpha
        assert!(MassState::delta(0.0).is_err());
        assert!(MassState::delta(f64::NAN).is_err());

        // An injected negative mass shows up as an impossible freeze quota.
        let mut state = MassState::delta(0.5).unwrap();
        state = step(&step(&state));
        state.set_site_mass(1, -0.6);
        assert!(matches!(freeze_split(&state), Err(Error::InvalidState(_))));
    }

    #[test]
    fn mass_at_is_symmetric() {
        let state = MassState::from_half(0.5, 3, vec![0.25, 0.25, 0.125]).unwrap();
        assert_eq!(state.mass_at(-2), state.mass_at(2));
        assert_eq!(state.mass_at(2), 0.125);
        assert_eq!(state.mass_at(17), 0.0);
    }

    #[test]
    fn trailing_zeros_are_trimmed() {
        let state = MassState::from_half(0.5, 2, vec![0.0, 0.5, 0.0, 0.0]).unwrap();
        assert_eq!(state.max_site(), 1);
    }
}
