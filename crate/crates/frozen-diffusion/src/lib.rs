//! Frozen-boundary diffusion on the integer lattice.
//!
//! A unit of mass starts at the origin. Each step the most extreme `alpha/2`
//! mass on each side freezes in place; the remaining `1 - alpha` mass takes one
//! discrete heat step, splitting every site's free mass evenly onto its two
//! neighbours. The process keeps the exact identity `M_2(t) = t * (1 - alpha)`
//! and, rescaled by `sqrt(t)`, converges to a limit measure made of a truncated
//! Gaussian plus two atoms of mass `alpha/2` at `+-q`, where `q` is the unique
//! positive root of `x * g(x) = (1 - alpha) / alpha` with
//! `g(x) = sum_{i>=1} x^(2i-1) / (2i-1)!!`.
//!
//! The crate is organised around that story:
//!
//! * [`lattice`] - mass states on `Z`, the boundary quantile, the
//!   freeze/diffuse split, and the heat step.
//! * [`engine`] - multi-step driver with sampled diagnostics rows.
//! * [`analysis`] - the moment polynomials, `g`, the fixed-point solve for
//!   `q`, truncated-Gaussian moments, the limit CDF, and the Levy metric.
//! * [`frw`] - the n-particle frozen random walk whose empirical profiles
//!   converge to the deterministic process.
//! * [`grid2d`] - the two-dimensional analogue with radial freezing.
//! * [`io`] - CSV / JSON / PGM writers for all of the above.
//! * [`cli`] - the `fbdsim` subcommand surface (`fbd`, `frw`, `solve-q`,
//!   `check`, `fbd2d`).
//!
//! Each capability has a runnable example:
//!
//! ```text
//! cargo run --example mass_profile       # mu_t profile CSV at t = 25000
//! cargo run --example boundary_scaling   # beta_t / sqrt(t) curves vs q_alpha
//! cargo run --example solve_fixed_point  # q_alpha table with residuals
//! cargo run --example moment_identities  # exact and limiting moment checks
//! cargo run --example particle_average   # frozen random walk vs the limit
//! cargo run --example limit_measure      # limit CDF, moments, Levy distance
//! cargo run --example heatmap_2d         # 2D free-mass heat map (CSV + PGM)
//! ```

pub mod analysis;
pub mod cli;
pub mod engine;
pub mod frw;
pub mod grid2d;
pub mod io;
pub mod lattice;
pub mod numeric;
pub mod quadrature;
pub mod tol;

pub use analysis::{solve_q, LimitMeasure};
pub use engine::{run_fbd, DiagnosticsRow, Schedule, Trajectory};
pub use frw::{frw_average, frw_run, AveragedProfile, ParticleEnsemble};
pub use lattice::{boundary, freeze_split, heat_step, FrozenSplit, MassState};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A mass state violated a structural invariant (negative mass, broken
    /// totals, an impossible freeze quota). Signals numeric corruption.
    #[error("invalid state: {0}")]
    InvalidState(String),
    /// Arguments outside an operation's documented domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// An iterative solver failed to reach its tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    /// Reading or writing an output stream failed.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn validate_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "alpha must lie strictly inside (0, 1), got {alpha}"
        )))
    }
}
