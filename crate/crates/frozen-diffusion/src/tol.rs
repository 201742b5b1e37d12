//! Pinned numeric tolerances.
//!
//! Every threshold the library or the check suite enforces lives here, with
//! its origin. Tests and the `check` subcommand import these constants rather
//! than restating numbers, so a tolerance can only be loosened in one visible
//! place.

/// Tie tolerance when comparing one-sided suffix masses against `alpha/2` in
/// the boundary quantile. Suffix sums are accumulated outside-in from exact
/// per-site values; representation error after ~1e6 steps stays orders below
/// this, while genuine ties (dyadic alpha) sit exactly on the threshold.
pub const BOUNDARY_TIE: f64 = 1e-14;

/// Per-step mass conservation for the 1D heat step: each site's update is two
/// adds and one halving, so one step moves the total by at most a few ulps.
pub const MASS_CONSERVATION_PER_STEP: f64 = 1e-15;

/// Accumulated drift of total mass from 1, scaled by `t + 1`.
pub const MASS_DRIFT_PER_T: f64 = 1e-12;

/// Total frozen mass must equal `alpha` after every split (it is `alpha` by
/// construction; the tolerance covers the subtraction chain).
pub const FROZEN_TOTAL: f64 = 1e-12;

/// Sampled diagnostics rows enforce `|M_2(t) - t(1-alpha)| <= REL * max(1, t)`.
pub const ROW_M2_REL: f64 = 1e-10;

/// Slack on the closed-form boundary bounds checked per sampled row, covering
/// only the float evaluation of the square roots.
pub const BOUNDARY_BOUND_SLACK: f64 = 1e-12;

/// One-step moment-change identity, relative to the moment scale `t^k`.
pub const MOMENT_CHANGE_REL: f64 = 1e-9;

/// Telescoped moment identity at sampled times, relative.
pub const TELESCOPE_REL: f64 = 1e-8;

/// Fixed point residual `|q g(q) - (1-alpha)/alpha|` accepted when
/// constructing a limit measure. The `8 eps * target` floor keeps the check
/// meaningful for extreme alpha where the target itself is large.
pub const Q_SERIES_RESIDUAL: f64 = 1e-12;

/// Residual of the equivalent atom-balance form
/// `(alpha/2) q = (1-alpha) e^{-q^2/2} / (sqrt(2 pi) Phi[-q. q])`,
/// evaluated with the primary erf route.
pub const Q_ATOM_FORM_RESIDUAL: f64 = 1e-10;

/// Same residual evaluated with the independent quadrature route.
pub const Q_ATOM_FORM_RESIDUAL_QUAD: f64 = 1e-9;

/// Agreement between the series and closed-form evaluations of `g` on
/// `x in [0, 3]` (absolute; `g(3) ~ 112`, so this is ~1e-14 relative).
pub const G_AGREEMENT_ABS: f64 = 1e-12;

/// Agreement between the recursion and closed-form moment polynomials in the
/// normalized scale `P_k / (2k-1)!!`.
pub const POLY_SCALED_AGREEMENT: f64 = 1e-12;

/// Truncated-Gaussian moments against the independent quadrature, relative.
pub const TRUNC_MOMENT_QUAD_REL: f64 = 1e-10;

/// Inequality margins (normalized scale) may dip this far below zero before
/// counting as a failure.
pub const INEQUALITY_MARGIN: f64 = -1e-10;

/// Slack multiplier on the factorial growth bound `c^k k!`.
pub const GROWTH_BOUND_SLACK: f64 = 1e-12;

/// Averaged frozen-random-walk profiles must sum to 1 within this.
pub const PROFILE_NORMALIZATION: f64 = 1e-12;

/// Radial second-moment identity in 2D, relative to `t`.
pub const GRID2D_M2_REL: f64 = 1e-8;

/// Bisection interval width for the fixed-point solve, before Newton polish.
pub const Q_BISECTION_WIDTH: f64 = 1e-13;

/// Bisection width for the Levy metric search (the metric is bounded by 1).
pub const LEVY_BISECTION_WIDTH: f64 = 1e-11;

// Ordering relations between the tolerances, enforced at compile time.
const _: () = {
    assert!(BOUNDARY_TIE > 0.0);
    assert!(MASS_CONSERVATION_PER_STEP < MASS_DRIFT_PER_T);
    assert!(Q_SERIES_RESIDUAL < Q_ATOM_FORM_RESIDUAL);
    assert!(Q_ATOM_FORM_RESIDUAL < Q_ATOM_FORM_RESIDUAL_QUAD);
    assert!(ROW_M2_REL < TELESCOPE_REL);
    assert!(MOMENT_CHANGE_REL < TELESCOPE_REL);
    assert!(INEQUALITY_MARGIN < 0.0);
};
