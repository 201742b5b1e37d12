//! Moment polynomials, the function `g`, the fixed point `q_alpha`, the limit
//! measure, and distribution distances.
//!
//! The scaled even moments of the process converge to values generated by the
//! recursion `P_k(l) = (2k-1) P_{k-1}(l) - alpha l^{2k}`, `P_0 = 1 - alpha`.
//! Requiring all `P_k` to stay nonnegative forces `l = q`, the unique positive
//! root of `x g(x) = (1-alpha)/alpha` where
//! `g(x) = sum_{i>=1} x^{2i-1}/(2i-1)!! = e^{x^2/2} integral_0^x e^{-y^2/2} dy`.
//! The limit measure is then two atoms of mass `alpha/2` at `+-q` plus
//! `(1-alpha)` times the Gaussian conditioned on `[-q, q]`.

use crate::numeric::{
    double_factorial, factorial, gauss_center_integral, gauss_interval_mass, NeumaierSum,
    MAX_DOUBLE_FACTORIAL_K,
};
use crate::lattice::MassState;
use crate::{quadrature, tol, validate_alpha, Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;

fn validate_order(k: usize) -> Result<()> {
    if k > MAX_DOUBLE_FACTORIAL_K {
        return Err(Error::Domain(format!(
            "order {k} beyond the double-factorial table (k <= {MAX_DOUBLE_FACTORIAL_K})"
        )));
    }
    Ok(())
}

/// Moment polynomial `P_k(l)` by the literal recursion
/// `P_k = (2k-1) P_{k-1} - alpha l^{2k}`, `P_0 = 1 - alpha`.
///
/// Float error scales with `(2k-1)!!`, so compare against
/// [`poly_p_tilde`] in the normalized scale `P_k / (2k-1)!!`.
pub fn poly_p(k: usize, ell: f64, alpha: f64) -> Result<f64> {
    validate_alpha(alpha)?;
    validate_order(k)?;
    if !ell.is_finite() {
        return Err(Error::Domain(format!("ell must be finite, got {ell}")));
    }
    let ell2 = ell * ell;
    let mut p = 1.0 - alpha;
    let mut pow = 1.0;
    for i in 1..=k {
        pow *= ell2;
        p = (2 * i - 1) as f64 * p - alpha * pow;
    }
    Ok(p)
}

/// Normalized moment polynomial by its closed form:
/// `P_k(l)/(2k-1)!! = 1 - alpha - sum_{i=1..k} alpha l^{2i} / (2i-1)!!`.
pub fn poly_p_tilde(k: usize, ell: f64, alpha: f64) -> Result<f64> {
    validate_alpha(alpha)?;
    validate_order(k)?;
    if !ell.is_finite() {
        return Err(Error::Domain(format!("ell must be finite, got {ell}")));
    }
    let ell2 = ell * ell;
    let mut acc = NeumaierSum::new();
    acc.add(1.0 - alpha);
    let mut term = 1.0;
    for i in 1..=k {
        term *= ell2 / (2 * i - 1) as f64;
        acc.add(-alpha * term);
    }
    Ok(acc.value())
}

/// Table of `P_k` and `P_k/(2k-1)!!` for `k = 0..=k_max`.
#[derive(Clone, Debug)]
pub struct MomentTable {
    pub alpha: f64,
    pub ell: f64,
    pub p: Vec<f64>,
    pub p_scaled: Vec<f64>,
}

impl MomentTable {
    pub fn build(alpha: f64, ell: f64, k_max: usize) -> Result<Self> {
        let mut p = Vec::with_capacity(k_max + 1);
        let mut p_scaled = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            p.push(poly_p(k, ell, alpha)?);
            p_scaled.push(poly_p_tilde(k, ell, alpha)?);
        }
        Ok(Self { alpha, ell, p, p_scaled })
    }
}

/// Truncated series `sum_{i=1..terms} x^{2i-1} / (2i-1)!!`.
pub fn g_series(x: f64, terms: usize) -> Result<f64> {
    if terms == 0 {
        return Err(Error::Domain("g_series needs at least one term".into()));
    }
    if !x.is_finite() {
        return Err(Error::Domain(format!("x must be finite, got {x}")));
    }
    let x2 = x * x;
    let mut acc = NeumaierSum::new();
    let mut term = x;
    for i in 1..=terms {
        acc.add(term);
        term *= x2 / (2 * i + 1) as f64;
    }
    Ok(acc.value())
}

/// Closed form `g(x) = e^{x^2/2} integral_0^x e^{-y^2/2} dy`, for `|x| <= 10`.
///
/// Odd in `x`. The integral goes through the erf primitive; the independent
/// cross-check route is [`quadrature`].
pub fn g_closed(x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() > 10.0 {
        return Err(Error::Domain(format!("g_closed domain is |x| <= 10, got {x}")));
    }
    Ok((0.5 * x * x).exp() * gauss_center_integral(x))
}

/// The rescaled limit of the process: atoms of mass `alpha/2` at `+-q` plus
/// `(1-alpha)` times the standard Gaussian conditioned on `[-q, q]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LimitMeasure {
    alpha: f64,
    q: f64,
}

impl LimitMeasure {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Atom location `q_alpha`.
    pub fn q(&self) -> f64 {
        self.q
    }
}

/// Solve `x g(x) = (1 - alpha) / alpha` for the unique positive root.
///
/// Bisection from a bracket capped at the `g_closed` domain bound, then two
/// Newton polish steps using `(x g)' = g (1 + x^2) + x`. `tol` bounds the
/// accepted residual `|q g(q) - (1-alpha)/alpha|` and must be `>= 1e-14`.
pub fn solve_q(alpha: f64, tolerance: f64) -> Result<LimitMeasure> {
    validate_alpha(alpha)?;
    if tolerance < 1e-14 || tolerance.is_nan() {
        return Err(Error::Domain(format!("tolerance must be >= 1e-14, got {tolerance}")));
    }
    let target = (1.0 - alpha) / alpha;
    let h = |x: f64| x * g_closed(x).unwrap() - target;

    let mut lo = 0.0f64;
    let mut hi = (2.0 * target.sqrt() + 1.0).min(10.0);
    let mut iterations = 0usize;
    while h(hi) <= 0.0 {
        if hi >= 10.0 {
            return Err(Error::NoConvergence { iterations, residual: h(10.0) });
        }
        hi = (hi * 1.5).min(10.0);
        iterations += 1;
    }
    while hi - lo > tol::Q_BISECTION_WIDTH && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let mut q = 0.5 * (lo + hi);
    for _ in 0..2 {
        let g = g_closed(q)?;
        let slope = g * (1.0 + q * q) + q;
        q -= (q * g - target) / slope;
        iterations += 1;
    }
    let residual = (q * g_closed(q)? - target).abs();
    let accept = tolerance.max(16.0 * f64::EPSILON * target.max(1.0));
    if !q.is_finite() || q <= 0.0 || residual > accept {
        return Err(Error::NoConvergence { iterations, residual });
    }
    Ok(LimitMeasure { alpha, q })
}

/// Signed residual of the series form, `q g(q) - (1-alpha)/alpha`.
pub fn fixed_point_residual(lm: &LimitMeasure) -> f64 {
    lm.q * g_closed(lm.q).unwrap() - (1.0 - lm.alpha) / lm.alpha
}

/// Signed residual of the atom-balance form
/// `(alpha/2) q - (1-alpha) e^{-q^2/2} / (sqrt(2 pi) Phi([-q, q]))`,
/// evaluated with the erf primitive.
pub fn atom_form_residual(lm: &LimitMeasure) -> f64 {
    let q = lm.q;
    let phi = gauss_interval_mass(q);
    lm.alpha / 2.0 * q
        - (1.0 - lm.alpha) * (-0.5 * q * q).exp() / ((2.0 * std::f64::consts::PI).sqrt() * phi)
}

/// The atom-balance residual with the interval mass integrated by the
/// independent quadrature route (no erf anywhere).
pub fn atom_form_residual_quadrature(lm: &LimitMeasure) -> f64 {
    let q = lm.q;
    let interval = quadrature::integrate(&|y: f64| (-0.5 * y * y).exp(), -q, q, 1e-13);
    lm.alpha / 2.0 * q - (1.0 - lm.alpha) * (-0.5 * q * q).exp() / interval
}

/// `2k`-th moment of the limit measure's continuous part, total mass `1-alpha`.
///
/// Uses the fixed-point form of the moment recursion
/// `m_k = (2k-1) m_{k-1} - alpha q^{2k}`: unrolled at the root it telescopes to
/// the tail `m_k = (2k-1)!! alpha sum_{i>k} q^{2i}/(2i-1)!!`, a positive series
/// that stays relatively accurate at every `k`, where the literal forward
/// recursion loses `(2k-1)!!`-scaled absolute precision.
pub fn trunc_gauss_moment(k: usize, lm: &LimitMeasure) -> Result<f64> {
    validate_order(k)?;
    let q2 = lm.q * lm.q;
    // term = q^{2i}/(2i-1)!! for i = k+1
    let mut term = q2;
    for i in 1..=k {
        term *= q2 / (2 * i + 1) as f64;
    }
    let mut acc = NeumaierSum::new();
    let mut i = k + 1;
    loop {
        acc.add(term);
        term *= q2 / (2 * i + 1) as f64;
        i += 1;
        if (term < 1e-18 * acc.value() && (2 * i + 1) as f64 > q2) || i > k + 2000 {
            break;
        }
    }
    Ok(double_factorial(k) * lm.alpha * acc.value())
}

/// Independent evaluation of the same moment by adaptive quadrature:
/// `(1-alpha) integral x^{2k} e^{-x^2/2} / integral e^{-x^2/2}` over `[-q, q]`.
pub fn trunc_gauss_moment_quadrature(k: usize, lm: &LimitMeasure) -> Result<f64> {
    validate_order(k)?;
    let q = lm.q;
    let num = quadrature::integrate(
        &|x: f64| x.powi(2 * k as i32) * (-0.5 * x * x).exp(),
        -q,
        q,
        1e-13,
    );
    let den = quadrature::integrate(&|x: f64| (-0.5 * x * x).exp(), -q, q, 1e-13);
    Ok((1.0 - lm.alpha) * num / den)
}

/// One row of an inequality check, in the normalized scale `P_k/(2k-1)!!`.
#[derive(Clone, Debug)]
pub struct InequalityRow {
    pub k: usize,
    /// `P_k(l) / (2k-1)!!`
    pub value_scaled: f64,
    /// `(1-alpha) l^{2k} / (2k-1)!!`
    pub upper_scaled: f64,
    pub lower_margin: f64,
    pub upper_margin: f64,
    pub pass: bool,
}

/// Verdict on `0 <= P_k(l) <= (1-alpha) l^{2k}` for `k = 0..=k_max`.
#[derive(Clone, Debug)]
pub struct InequalityReport {
    pub alpha: f64,
    pub ell: f64,
    pub rows: Vec<InequalityRow>,
    pub all_pass: bool,
}

/// Check the two-sided inequality family at `l = q`.
///
/// Margins are reported in the normalized scale, where the recursion's
/// `(2k-1)!!`-scaled float noise divides out and the +-1e-10 margin tolerance
/// is meaningful; dividing by `(2k-1)!! > 0` preserves the inequalities.
pub fn check_inequalities(lm: &LimitMeasure, k_max: usize) -> Result<InequalityReport> {
    check_inequalities_at(lm.alpha, lm.q, k_max)
}

/// The same check at an arbitrary evaluation point `l`.
pub fn check_inequalities_at(alpha: f64, ell: f64, k_max: usize) -> Result<InequalityReport> {
    validate_order(k_max)?;
    let ell2 = ell * ell;
    let mut rows = Vec::with_capacity(k_max + 1);
    let mut all_pass = true;
    // upper_term = l^{2k} / (2k-1)!!
    let mut upper_term = 1.0;
    for k in 0..=k_max {
        if k > 0 {
            upper_term *= ell2 / (2 * k - 1) as f64;
        }
        let value_scaled = poly_p_tilde(k, ell, alpha)?;
        let upper_scaled = (1.0 - alpha) * upper_term;
        let lower_margin = value_scaled;
        let upper_margin = upper_scaled - value_scaled;
        let pass = lower_margin >= tol::INEQUALITY_MARGIN && upper_margin >= tol::INEQUALITY_MARGIN;
        all_pass &= pass;
        rows.push(InequalityRow { k, value_scaled, upper_scaled, lower_margin, upper_margin, pass });
    }
    Ok(InequalityReport { alpha, ell, rows, all_pass })
}

/// One row of the factorial growth certificate.
#[derive(Clone, Debug)]
pub struct GrowthRow {
    pub k: usize,
    /// `2k`-th moment of the conditioned Gaussian, normalized to unit mass.
    pub normalized_moment: f64,
    /// `c^k k!`
    pub bound: f64,
    pub pass: bool,
}

/// Certificate that the conditioned Gaussian's moments satisfy the
/// determinacy bound `m_k <= c^k k!` with `c = max(1, q^2)`.
#[derive(Clone, Debug)]
pub struct GrowthReport {
    pub c: f64,
    pub rows: Vec<GrowthRow>,
    pub all_pass: bool,
}

/// Verify the factorial moment-growth bound for `k = 0..=k_max`.
pub fn moment_growth_check(lm: &LimitMeasure, k_max: usize) -> Result<GrowthReport> {
    validate_order(k_max)?;
    let c = (lm.q * lm.q).max(1.0);
    let mut rows = Vec::with_capacity(k_max + 1);
    let mut all_pass = true;
    for k in 0..=k_max {
        let normalized_moment = trunc_gauss_moment(k, lm)? / (1.0 - lm.alpha);
        let bound = c.powi(k as i32) * factorial(k);
        let pass = normalized_moment <= bound * (1.0 + tol::GROWTH_BOUND_SLACK);
        all_pass &= pass;
        rows.push(GrowthRow { k, normalized_moment, bound, pass });
    }
    Ok(GrowthReport { c, rows, all_pass })
}

/// CDF of the limit measure (right-continuous).
pub fn limit_cdf(lm: &LimitMeasure, x: f64) -> f64 {
    let q = lm.q;
    if x < -q {
        0.0
    } else if x >= q {
        1.0
    } else {
        lm.alpha / 2.0 + (1.0 - lm.alpha) * conditioned_gauss_cdf(lm, x)
    }
}

/// Left limit of the CDF (differs from `limit_cdf` only at the atoms).
fn limit_cdf_left(lm: &LimitMeasure, x: f64) -> f64 {
    let q = lm.q;
    if x <= -q {
        0.0
    } else if x > q {
        1.0
    } else {
        lm.alpha / 2.0 + (1.0 - lm.alpha) * conditioned_gauss_cdf(lm, x)
    }
}

fn conditioned_gauss_cdf(lm: &LimitMeasure, x: f64) -> f64 {
    let e = gauss_interval_mass(lm.q);
    (libm::erf(x / SQRT_2) + e) / (2.0 * e)
}

/// CDF jump points of a state rescaled by `sqrt(t)`:
/// `(position, value before, value after)` in ascending order.
fn rescaled_jumps(state: &MassState) -> Vec<(f64, f64, f64)> {
    let scale = 1.0 / (state.t() as f64).sqrt();
    let max = state.max_site() as i64;
    let mut jumps = Vec::new();
    let mut cum = NeumaierSum::new();
    for x in -max..=max {
        let m = state.mass_at(x);
        if m > 0.0 {
            let before = cum.value();
            cum.add(m);
            jumps.push((x as f64 * scale, before, cum.value()));
        }
    }
    jumps
}

/// Levy distance between a rescaled state and the limit measure.
///
/// Binary search on `eps` of the defining sandwich
/// `F(x - eps) - eps <= G(x) <= F(x + eps) + eps`; since the empirical CDF is
/// a step function and both CDFs are monotone, checking at the state's jump
/// points (values just before and after each jump) is exhaustive.
pub fn levy_distance(state: &MassState, lm: &LimitMeasure) -> Result<f64> {
    if state.t() == 0 {
        return Err(Error::Domain("levy distance needs t >= 1 to rescale".into()));
    }
    let jumps = rescaled_jumps(state);
    let feasible = |eps: f64| -> bool {
        jumps.iter().all(|&(p, before, after)| {
            after - eps <= limit_cdf(lm, p + eps) && limit_cdf_left(lm, p - eps) <= before + eps
        })
    };
    let mut lo = 0.0f64;
    let mut hi = 1.0f64;
    while hi - lo > tol::LEVY_BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Kolmogorov (sup) distance between a rescaled state and the limit measure.
/// Coarser than the Levy metric against atom location mismatch; offered as a
/// secondary diagnostic.
pub fn kolmogorov_distance(state: &MassState, lm: &LimitMeasure) -> Result<f64> {
    if state.t() == 0 {
        return Err(Error::Domain("kolmogorov distance needs t >= 1 to rescale".into()));
    }
    let mut sup = 0.0f64;
    for (p, before, after) in rescaled_jumps(state) {
        sup = sup.max((after - limit_cdf(lm, p)).abs());
        sup = sup.max((before - limit_cdf_left(lm, p)).abs());
    }
    Ok(sup)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lm(alpha: f64) -> LimitMeasure {
        solve_q(alpha, 1e-13).unwrap()
    }

    #[test]
    fn poly_p_matches_expanded_form() {
        // P_2(l) = 3(1-a) - 3 a l^2 - a l^4
        for (alpha, ell) in [(0.5, 1.0f64), (0.3, 1.7), (0.9, 0.4)] {
            let want = 3.0 * (1.0 - alpha) - 3.0 * alpha * ell * ell - alpha * ell.powi(4);
            let got = poly_p(2, ell, alpha).unwrap();
            assert!((got - want).abs() < 1e-14, "alpha={alpha} ell={ell}");
        }
    }

    #[test]
    fn poly_p_tilde_vanishes_at_unit_point() {
        // 1 - a - a * 1 = 0 at alpha = 1/2, l = 1, k = 1.
        assert_eq!(poly_p_tilde(1, 1.0, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn recursion_and_closed_form_agree_in_normalized_scale() {
        for alpha in [0.1, 0.5, 0.9] {
            for ell in [0.2, 0.877, 1.3, 2.9] {
                for k in 0..=20 {
                    let scaled = poly_p(k, ell, alpha).unwrap() / double_factorial(k);
                    let tilde = poly_p_tilde(k, ell, alpha).unwrap();
                    assert!(
                        (scaled - tilde).abs() <= tol::POLY_SCALED_AGREEMENT,
                        "k={k} ell={ell} alpha={alpha}: {scaled} vs {tilde}"
                    );
                }
            }
        }
    }

    #[test]
    fn moment_table_is_consistent() {
        let table = MomentTable::build(0.5, 0.9, 12).unwrap();
        assert_eq!(table.p.len(), 13);
        for k in 0..=12 {
            assert!(
                (table.p[k] / double_factorial(k) - table.p_scaled[k]).abs()
                    <= tol::POLY_SCALED_AGREEMENT
            );
        }
    }

    #[test]
    fn g_series_single_term() {
        assert_eq!(g_series(1.0, 1).unwrap(), 1.0);
    }

    #[test]
    fn g_closed_reference_values() {
        // Independently computed from the erf form.
        let cases = [
            (0.25, 0.255_274_022_846_965_65),
            (0.5, 0.543_826_519_452_150_5),
            (1.0, 1.410_686_134_642_448),
            (2.0, 8.839_439_240_919_049),
            (3.0, 112.515_152_960_819_49),
        ];
        for (x, want) in cases {
            let got = g_closed(x).unwrap();
            assert!(
                (got - want).abs() <= 1e-12 * want.max(1.0),
                "x={x}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn g_routes_agree_and_g_is_odd() {
        let mut x = 0.25;
        while x <= 3.0 + 1e-9 {
            let series = g_series(x, 60).unwrap();
            let closed = g_closed(x).unwrap();
            assert!(
                (series - closed).abs() <= tol::G_AGREEMENT_ABS,
                "x={x}: series {series} vs closed {closed}"
            );
            assert_eq!(g_closed(-x).unwrap(), -closed);
            x += 0.25;
        }
    }

    #[test]
    fn g_closed_domain_is_enforced() {
        assert!(g_closed(10.0).is_ok());
        assert!(g_closed(10.5).is_err());
        assert!(g_closed(f64::NAN).is_err());
        assert!(g_series(1.0, 0).is_err());
    }

    #[test]
    fn solve_q_reference_values() {
        // Brent solve of x g(x) = (1-alpha)/alpha in an independent stack.
        let cases = [
            (0.05, 2.027_504_492_620_901),
            (0.1, 1.735_670_176_143_942_6),
            (0.25, 1.292_239_438_630_302_9),
            (0.5, 0.876_900_985_552_862_1),
            (0.75, 0.548_809_505_658_242_4),
            (0.9, 0.327_409_981_734_263_67),
            (0.99, 0.100_335_235_176_549_33),
        ];
        for (alpha, want) in cases {
            let got = lm(alpha).q();
            assert!(
                (got - want).abs() <= 1e-10,
                "alpha={alpha}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn solve_q_residuals_both_forms() {
        for alpha in [0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99] {
            let m = lm(alpha);
            assert!(fixed_point_residual(&m).abs() <= tol::Q_SERIES_RESIDUAL, "alpha={alpha}");
            assert!(atom_form_residual(&m).abs() <= tol::Q_ATOM_FORM_RESIDUAL, "alpha={alpha}");
            assert!(
                atom_form_residual_quadrature(&m).abs() <= tol::Q_ATOM_FORM_RESIDUAL_QUAD,
                "alpha={alpha}"
            );
        }
    }

    #[test]
    fn q_decreases_with_alpha_and_vanishes_at_one() {
        let grid = [0.05, 0.2, 0.4, 0.6, 0.8, 0.95, 0.999];
        let qs: Vec<f64> = grid.iter().map(|&a| lm(a).q()).collect();
        for w in qs.windows(2) {
            assert!(w[0] > w[1]);
        }
        assert!(qs[qs.len() - 1] < 0.04);
        assert!(qs[qs.len() - 1] > 0.0);
    }

    #[test]
    fn solve_q_rejects_bad_arguments() {
        assert!(solve_q(0.5, 1e-15).is_err());
        assert!(solve_q(0.0, 1e-13).is_err());
        assert!(solve_q(1.0, 1e-13).is_err());
    }

    #[test]
    fn trunc_gauss_moment_reference_values() {
        // Adaptive quadrature in an independent stack, relative 1e-13.
        let cases = [
            (0.1, 1, 0.598_744_903_964_445_5),
            (0.1, 2, 0.888_688_383_019_425_1),
            (0.1, 3, 1.709_412_350_480_874_5),
            (0.1, 10, 1_014.556_229_755_762_7),
            (0.5, 1, 0.115_522_330_768_209_64),
            (0.5, 2, 0.050_920_836_028_808_83),
            (0.5, 3, 0.027_265_489_979_514_17),
            (0.5, 10, 0.001_368_957_025_024_655_4),
            (0.9, 1, 0.003_522_433_474_692_199_3),
            (0.9, 2, 0.000_225_166_154_470_832_5),
            (0.9, 3, 1.718_194_234_354_533_2e-5),
            (0.9, 10, 9.248_546_142_000_101e-13),
        ];
        for (alpha, k, want) in cases {
            let got = trunc_gauss_moment(k, &lm(alpha)).unwrap();
            assert!(
                ((got - want) / want).abs() <= 1e-9,
                "alpha={alpha} k={k}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn trunc_gauss_moment_agrees_with_quadrature() {
        for alpha in [0.1, 0.5, 0.9] {
            let m = lm(alpha);
            for k in 0..=10 {
                let a = trunc_gauss_moment(k, &m).unwrap();
                let b = trunc_gauss_moment_quadrature(k, &m).unwrap();
                assert!(
                    ((a - b) / b).abs() <= tol::TRUNC_MOMENT_QUAD_REL,
                    "alpha={alpha} k={k}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn trunc_gauss_moment_base_and_recursion() {
        for alpha in [0.1, 0.5, 0.9] {
            let m = lm(alpha);
            let m0 = trunc_gauss_moment(0, &m).unwrap();
            assert!(((m0 - (1.0 - alpha)) / (1.0 - alpha)).abs() <= 1e-12);
            // The values satisfy m_k = (2k-1) m_{k-1} - alpha q^{2k}.
            let q2 = m.q() * m.q();
            let mut pow = 1.0;
            for k in 1..=10usize {
                pow *= q2;
                let lhs = trunc_gauss_moment(k, &m).unwrap();
                let rhs = (2 * k - 1) as f64 * trunc_gauss_moment(k - 1, &m).unwrap()
                    - alpha * pow;
                let scale = (alpha * pow).max(lhs.abs());
                assert!(
                    (lhs - rhs).abs() <= 1e-12 * scale,
                    "alpha={alpha} k={k}: {lhs} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn trunc_gauss_moment_equals_poly_p_at_small_orders() {
        for alpha in [0.25, 0.5, 0.75] {
            let m = lm(alpha);
            for k in 0..=5 {
                let a = trunc_gauss_moment(k, &m).unwrap();
                let b = poly_p(k, m.q(), alpha).unwrap();
                assert!(
                    ((a - b) / a).abs() <= 1e-9,
                    "alpha={alpha} k={k}: {a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn inequalities_hold_at_q_and_fail_off_the_root() {
        for alpha in [0.1, 0.5, 0.9] {
            let m = lm(alpha);
            let report = check_inequalities(&m, 20).unwrap();
            assert!(report.all_pass, "alpha={alpha}");

            // Above the root the partial sums overshoot 1-alpha: lower side fails.
            let probe = check_inequalities_at(alpha, 1.1 * m.q(), 30).unwrap();
            assert!(!probe.all_pass, "alpha={alpha}");
            assert!(probe.rows.iter().any(|r| r.lower_margin < tol::INEQUALITY_MARGIN));
        }
    }

    #[test]
    fn inequalities_fail_upper_side_at_zero() {
        // P_k(0) = (2k-1)!!(1-alpha) > 0 = (1-alpha) * 0^{2k} for k >= 1.
        let report = check_inequalities_at(0.5, 0.0, 5).unwrap();
        assert!(report.rows[0].pass);
        for row in &report.rows[1..] {
            assert!(!row.pass);
            assert!(row.upper_margin < tol::INEQUALITY_MARGIN);
        }
    }

    #[test]
    fn growth_bound_certificate() {
        let half = moment_growth_check(&lm(0.5), 20).unwrap();
        assert_eq!(half.c, 1.0);
        assert!(half.all_pass);

        let small_alpha = moment_growth_check(&lm(0.1), 30).unwrap();
        assert!(small_alpha.c > 1.0);
        assert!(small_alpha.all_pass);

        // Why c = max(1, q^2) and k! rather than plain k!: the untruncated
        // Gaussian normalized moments (2k-1)!! already beat k! at k = 2.
        assert!(double_factorial(2) > factorial(2));
    }

    #[test]
    fn limit_cdf_reference_values() {
        let m = lm(0.5);
        let q = m.q();
        let cases = [
            (-1.0, 0.0),
            (-q, 0.25),
            (-0.5, 0.345_460_085_113_516_34),
            (0.0, 0.5),
            (0.5, 0.654_539_914_886_483_7),
            (0.8, 0.732_577_403_850_420_5),
            (q, 1.0),
        ];
        for (x, want) in cases {
            let got = limit_cdf(&m, x);
            assert!((got - want).abs() <= 1e-12, "x={x}: got {got}, want {want}");
        }
        // Right continuity at the atom: just below q the CDF is near 1 - alpha/2.
        assert!((limit_cdf(&m, q - 1e-9) - 0.75).abs() < 1e-6);
    }

    #[test]
    fn levy_distance_of_discretized_limit_is_within_lattice_resolution() {
        let m = lm(0.5);
        let t = 400u64;
        let scale = (t as f64).sqrt();
        let max = (m.q() * scale).ceil() as usize + 2;
        let mut half = vec![0.0; max + 1];
        half[0] = limit_cdf(&m, 0.5 / scale) - limit_cdf(&m, -0.5 / scale);
        for (x, h) in half.iter_mut().enumerate().skip(1) {
            *h = limit_cdf(&m, (x as f64 + 0.5) / scale)
                - limit_cdf(&m, (x as f64 - 0.5) / scale);
        }
        let state = MassState::from_half(0.5, t, half).unwrap();
        let d = levy_distance(&state, &m).unwrap();
        assert!(d <= 1.0 / scale + 1e-9, "d = {d}");
        assert!(d > 0.0);
    }

    #[test]
    fn levy_needs_positive_time() {
        let m = lm(0.5);
        let state = MassState::delta(0.5).unwrap();
        assert!(levy_distance(&state, &m).is_err());
        assert!(kolmogorov_distance(&state, &m).is_err());
    }

    #[test]
    fn kolmogorov_dominates_levy() {
        let m = lm(0.5);
        let state = MassState::from_half(0.5, 1, vec![0.5, 0.25]).unwrap();
        let levy = levy_distance(&state, &m).unwrap();
        let kol = kolmogorov_distance(&state, &m).unwrap();
        assert!(kol >= levy - 1e-12);
        // The origin atom of mu_1 is flat against the limit CDF's value there.
        assert!((kol - 0.25).abs() < 1e-12);
    }
}
