//! Frozen random walk: the n-particle system whose fixed-t, n -> infinity
//! limit is the deterministic mass process.
//!
//! Each step freezes the `k = floor(n alpha / 2)` leftmost and `k` rightmost
//! particles permanently for that step's move; every other particle jumps +-1
//! with probability 1/2. Positions are kept as a site -> count map, the cut
//! is computed by sweeping the map from each end, and jumps are drawn per
//! site as Binomial(free, 1/2) rather than per particle.
//!
//! Determinism: every trial owns a ChaCha8 stream seeded by
//! [`trial_seed`], sites consume randomness in ascending order, and
//! trial reduction is exact integer addition, so results are byte-identical
//! for a given master seed at any parallelism level.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::lattice::MassState;
use crate::numeric::NeumaierSum;
use crate::{validate_alpha, Error, Result};

/// n particles on the integer line with their RNG stream.
#[derive(Clone, Debug)]
pub struct ParticleEnsemble {
    n: u64,
    alpha: f64,
    /// Particles frozen per side per step.
    k: u64,
    t: u64,
    seed: u64,
    counts: BTreeMap<i64, u64>,
    rng: ChaCha8Rng,
}

impl ParticleEnsemble {
    /// All n particles at the origin, stream seeded for reproducible runs.
    pub fn new(n: u64, alpha: f64, seed: u64) -> Result<Self> {
        validate_alpha(alpha)?;
        if n == 0 {
            return Err(Error::Domain("need at least one particle".into()));
        }
        let k = (n as f64 * alpha / 2.0).floor() as u64;
        let mut counts = BTreeMap::new();
        counts.insert(0, n);
        Ok(Self { n, alpha, k, t: 0, seed, counts, rng: ChaCha8Rng::seed_from_u64(seed) })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Freeze count per side, `floor(n alpha / 2)`.
    pub fn freeze_count(&self) -> u64 {
        self.k
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Site -> particle count.
    pub fn counts(&self) -> &BTreeMap<i64, u64> {
        &self.counts
    }

    /// Position of the k-th particle from the right (the empirical boundary);
    /// the maximum position when k = 0.
    pub fn boundary(&self) -> i64 {
        if self.k == 0 {
            return *self.counts.keys().next_back().expect("nonempty ensemble");
        }
        let mut remaining = self.k;
        for (&site, &count) in self.counts.iter().rev() {
            if count >= remaining {
                return site;
            }
            remaining -= count;
        }
        unreachable!("k < n by construction");
    }

    /// Empirical second moment per unit mass, `(1/n) sum x^2`.
    pub fn second_moment(&self) -> f64 {
        let acc: NeumaierSum = self
            .counts
            .iter()
            .map(|(&site, &count)| count as f64 * (site as f64) * (site as f64))
            .collect();
        acc.value() / self.n as f64
    }

    /// The m smallest positions with multiplicity (ascending).
    pub fn first_positions(&self, m: usize) -> Vec<i64> {
        let mut out = Vec::with_capacity(m);
        'outer: for (&site, &count) in &self.counts {
            for _ in 0..count {
                if out.len() == m {
                    break 'outer;
                }
                out.push(site);
            }
        }
        out
    }

    /// Site -> fraction of the n particles.
    pub fn profile(&self) -> BTreeMap<i64, f64> {
        self.counts
            .iter()
            .map(|(&site, &count)| (site, count as f64 / self.n as f64))
            .collect()
    }

    /// Per-site frozen counts `(left cut, right cut)` for the current state.
    /// The k leftmost particles freeze (ties taken in ascending site order)
    /// and the k rightmost likewise from the other end; the two sets are
    /// disjoint because `2k <= n alpha < n`.
    fn frozen_per_site(&self) -> BTreeMap<i64, u64> {
        let mut frozen: BTreeMap<i64, u64> = BTreeMap::new();
        let mut remaining = self.k;
        for (&site, &count) in &self.counts {
            if remaining == 0 {
                break;
            }
            let take = count.min(remaining);
            frozen.insert(site, take);
            remaining -= take;
        }
        let mut remaining = self.k;
        for (&site, &count) in self.counts.iter().rev() {
            if remaining == 0 {
                break;
            }
            let take = count.min(remaining);
            *frozen.entry(site).or_insert(0) += take;
            remaining -= take;
        }
        frozen
    }
}

/// Advance the ensemble by one step: freeze the k extreme particles per side,
/// jump everything else +-1 uniformly. Particle count is conserved exactly
/// (integer arithmetic throughout).
pub fn frw_step(ens: &mut ParticleEnsemble) {
    let frozen = ens.frozen_per_site();
    let mut next: BTreeMap<i64, u64> = frozen.clone();
    next.retain(|_, c| *c > 0);
    // Ascending site order fixes the randomness consumption order.
    for (&site, &count) in &ens.counts {
        let free = count - frozen.get(&site).copied().unwrap_or(0);
        if free == 0 {
            continue;
        }
        let right = Binomial::new(free, 0.5).expect("valid binomial").sample(&mut ens.rng);
        if right > 0 {
            *next.entry(site + 1).or_insert(0) += right;
        }
        if free - right > 0 {
            *next.entry(site - 1).or_insert(0) += free - right;
        }
    }
    ens.counts = next;
    ens.t += 1;
}

/// Run a fresh ensemble for `steps` steps. Deterministic given the seed.
pub fn frw_run(n: u64, alpha: f64, steps: u64, seed: u64) -> Result<ParticleEnsemble> {
    let mut ens = ParticleEnsemble::new(n, alpha, seed)?;
    for _ in 0..steps {
        frw_step(&mut ens);
    }
    Ok(ens)
}

/// Trial-averaged occupation profile.
#[derive(Clone, Debug)]
pub struct AveragedProfile {
    pub n: u64,
    pub alpha: f64,
    pub t: u64,
    pub trials: u64,
    pub master_seed: u64,
    /// Site -> average particle fraction; nonnegative, sums to 1.
    pub profile: BTreeMap<i64, f64>,
}

/// Seed for one trial, derived from the master seed by a SplitMix64 mix of
/// the trial index so that trials are independently addressable.
pub fn trial_seed(master_seed: u64, trial: u64) -> u64 {
    let mut z = master_seed.wrapping_add((trial + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Average `trials` independent runs. `jobs` caps the worker threads; the
/// result is identical at any job count because trials use index-derived
/// seeds and the reduction sums exact particle counts per site.
pub fn frw_average(
    n: u64,
    alpha: f64,
    steps: u64,
    trials: u64,
    master_seed: u64,
    jobs: usize,
) -> Result<AveragedProfile> {
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    if jobs == 0 {
        return Err(Error::Domain("need at least one worker".into()));
    }
    let run = |trial: u64| -> Result<BTreeMap<i64, u64>> {
        Ok(frw_run(n, alpha, steps, trial_seed(master_seed, trial))?.counts.clone())
    };
    let per_trial: Vec<BTreeMap<i64, u64>> = if jobs == 1 {
        (0..trials).map(run).collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Domain(format!("worker pool: {e}")))?;
        pool.install(|| (0..trials).into_par_iter().map(run).collect::<Result<_>>())?
    };
    let mut totals: BTreeMap<i64, u64> = BTreeMap::new();
    for counts in per_trial {
        for (site, count) in counts {
            *totals.entry(site).or_insert(0) += count;
        }
    }
    let mass = (n * trials) as f64;
    let profile = totals.into_iter().map(|(site, count)| (site, count as f64 / mass)).collect();
    Ok(AveragedProfile { n, alpha, t: steps, trials, master_seed, profile })
}

/// Total variation distance between an averaged particle profile and a mass
/// state at the same t: half the summed absolute site differences.
pub fn total_variation(profile: &AveragedProfile, state: &MassState) -> f64 {
    let mut acc = NeumaierSum::new();
    for (&site, &fraction) in &profile.profile {
        acc.add((fraction - state.mass_at(site)).abs());
    }
    let max = state.max_site() as i64;
    for site in -max..=max {
        let mass = state.mass_at(site);
        if mass > 0.0 && !profile.profile.contains_key(&site) {
            acc.add(mass);
        }
    }
    0.5 * acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_fbd;

    fn total(ens: &ParticleEnsemble) -> u64 {
        ens.counts().values().sum()
    }

    #[test]
    fn four_particles_freeze_one_per_side() {
        let mut ens = ParticleEnsemble::new(4, 0.5, 11).unwrap();
        frw_step(&mut ens);
        assert_eq!(ens.counts().get(&0).copied().unwrap_or(0), 2);
        let moved: u64 = [-1i64, 1]
            .iter()
            .map(|s| ens.counts().get(s).copied().unwrap_or(0))
            .sum();
        assert_eq!(moved, 2);
        assert_eq!(total(&ens), 4);
    }

    #[test]
    fn zero_freeze_count_is_a_plain_walk_step() {
        let mut ens = ParticleEnsemble::new(3, 0.1, 5).unwrap();
        assert_eq!(ens.freeze_count(), 0);
        frw_step(&mut ens);
        assert_eq!(ens.counts().get(&0).copied().unwrap_or(0), 0);
        assert_eq!(total(&ens), 3);
    }

    #[test]
    fn zero_steps_leaves_everything_at_the_origin() {
        let ens = frw_run(1000, 0.5, 0, 3).unwrap();
        assert_eq!(ens.counts().get(&0).copied(), Some(1000));
        assert_eq!(ens.t(), 0);
    }

    #[test]
    fn particles_are_conserved_every_step() {
        let mut ens = ParticleEnsemble::new(137, 0.37, 29).unwrap();
        for _ in 0..200 {
            frw_step(&mut ens);
            assert_eq!(total(&ens), 137);
        }
    }

    #[test]
    fn free_particles_stay_inside_the_frozen_cut() {
        let mut ens = ParticleEnsemble::new(64, 0.5, 17).unwrap();
        for _ in 0..100 {
            // Expand to sorted positions and locate the cut before stepping.
            let mut sorted = Vec::new();
            for (&site, &count) in ens.counts() {
                sorted.extend(std::iter::repeat_n(site, count as usize));
            }
            let k = ens.freeze_count() as usize;
            let cut_left = sorted[k - 1];
            let cut_right = sorted[sorted.len() - k];
            for &p in &sorted[k..sorted.len() - k] {
                assert!(cut_left <= p && p <= cut_right);
            }
            frw_step(&mut ens);
        }
    }

    #[test]
    fn second_moment_grows_at_the_free_rate_on_average() {
        // E[sum of x^2] gains exactly (n - 2k) per step; check the Monte
        // Carlo mean over many independent step-5 -> step-6 transitions.
        let n = 50u64;
        let trials = 3000u64;
        let k = ParticleEnsemble::new(n, 0.5, 0).unwrap().freeze_count();
        let mut acc = NeumaierSum::new();
        for trial in 0..trials {
            let mut ens = frw_run(n, 0.5, 5, trial_seed(999, trial)).unwrap();
            let before = ens.second_moment();
            frw_step(&mut ens);
            acc.add(n as f64 * (ens.second_moment() - before));
        }
        let mean = acc.value() / trials as f64;
        let expected = (n - 2 * k) as f64;
        assert!(
            (mean - expected).abs() < 2.0,
            "mean step gain {mean}, expected {expected}"
        );
    }

    #[test]
    fn empirical_boundary_tracks_the_fixed_point() {
        let ens = frw_run(10_000, 0.5, 25_000, 1).unwrap();
        let scaled = ens.boundary() as f64 / (25_000f64).sqrt();
        assert!(
            (scaled - 0.876_900_985_552_862).abs() <= 0.05,
            "beta/sqrt(t) = {scaled}"
        );
    }

    #[test]
    fn fixed_seed_regression() {
        let ens = frw_run(100, 0.5, 10, 42).unwrap();
        let first = ens.first_positions(5);
        assert_eq!(first.len(), 5);
        assert!(first.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(first, vec![-3, -3, -3, -3, -3]);
    }

    #[test]
    fn same_seed_reruns_identically() {
        let a = frw_run(500, 0.3, 40, 77).unwrap();
        let b = frw_run(500, 0.3, 40, 77).unwrap();
        assert_eq!(a.counts(), b.counts());
        let c = frw_run(500, 0.3, 40, 78).unwrap();
        assert_ne!(a.counts(), c.counts());
    }

    #[test]
    fn averaged_profile_is_normalized_and_single_trial_reduces() {
        let avg = frw_average(1000, 0.5, 20, 7, 123, 1).unwrap();
        let sum: f64 = avg.profile.values().sum();
        assert!((sum - 1.0).abs() <= 1e-12);
        assert!(avg.profile.values().all(|&v| v >= 0.0));

        let single = frw_average(1000, 0.5, 20, 1, 123, 1).unwrap();
        let run = frw_run(1000, 0.5, 20, trial_seed(123, 0)).unwrap();
        assert_eq!(single.profile, run.profile());
    }

    #[test]
    fn averaging_is_invariant_to_worker_count() {
        let sequential = frw_average(2000, 0.5, 30, 8, 42, 1).unwrap();
        let parallel = frw_average(2000, 0.5, 30, 8, 42, 4).unwrap();
        assert_eq!(sequential.profile, parallel.profile);
    }

    #[test]
    fn averaged_profile_is_symmetric_within_noise() {
        let avg = frw_average(10_000, 0.5, 50, 20, 6, 2).unwrap();
        for (&site, &fraction) in &avg.profile {
            let mirrored = avg.profile.get(&-site).copied().unwrap_or(0.0);
            assert!(
                (fraction - mirrored).abs() <= 0.01,
                "site {site}: {fraction} vs {mirrored}"
            );
        }
    }

    #[test]
    fn averaged_profile_approaches_the_deterministic_process() {
        let avg = frw_average(20_000, 0.5, 50, 10, 31, 2).unwrap();
        let fbd = run_fbd(0.5, 50, &[]).unwrap();
        let tv = total_variation(&avg, &fbd.final_state);
        assert!(tv <= 0.05, "total variation {tv}");
    }

    #[test]
    fn bad_arguments_are_rejected() {
        assert!(ParticleEnsemble::new(0, 0.5, 1).is_err());
        assert!(ParticleEnsemble::new(10, 1.0, 1).is_err());
        assert!(frw_average(10, 0.5, 1, 0, 1, 1).is_err());
        assert!(frw_average(10, 0.5, 1, 1, 1, 0).is_err());
    }
}
