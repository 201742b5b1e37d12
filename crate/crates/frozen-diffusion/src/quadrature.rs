//! Adaptive Simpson integration.
//!
//! Deliberately self-contained: this module is the independent route used to
//! cross-check every erf-backed Gaussian integral in [`crate::analysis`], so it
//! must not share code with them. Accuracy is driven by a relative tolerance;
//! the integrands it serves (`x^{2k} e^{-x^2/2}` on bounded intervals) are
//! smooth and single-signed, where the classic error estimate is reliable.

/// Integrate `f` over `[a, b]` to relative tolerance `rel_tol`.
///
/// Uses recursive Simpson bisection with Richardson extrapolation. Depth is
/// capped at 60 bisection levels, far beyond what the smooth integrands here
/// ever need; hitting the cap silently returns the best estimate, which the
/// agreement tests would then expose.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(a, b, fa, fm, fb);
    // Floor the absolute budget so an exactly-zero first estimate still refines.
    let budget = rel_tol * whole.abs().max(1e-300);
    adapt(f, a, b, fa, fm, fb, whole, budget, 60)
}

#[inline]
fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adapt<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    budget: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * budget {
        return left + right + delta / 15.0;
    }
    adapt(f, a, m, fa, flm, fm, left, budget * 0.5, depth - 1)
        + adapt(f, m, b, fm, frm, fb, right, budget * 0.5, depth - 1)
}
