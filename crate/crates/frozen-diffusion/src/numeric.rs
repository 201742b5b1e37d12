//! Shared numeric helpers: compensated summation, double factorials, binomial
//! coefficients, and the erf-backed Gaussian integrals.

/// Neumaier's variant of Kahan summation.
///
/// Running moment accumulations add up to `1e6` terms spanning many orders of
/// magnitude; a compensated sum keeps the result within a few ulps of the
/// exact value independent of term order.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl std::iter::FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Largest `k` for which `(2k-1)!!` is provided.
pub const MAX_DOUBLE_FACTORIAL_K: usize = 30;

/// `(2k-1)!! = 1 * 3 * 5 * ... * (2k-1)`, with the empty product for `k = 0`.
///
/// Exact in f64 up to `k = 16`; beyond that correctly rounded products.
/// Callers enforce `k <= 30` before calling; the assert is a backstop.
pub fn double_factorial(k: usize) -> f64 {
    assert!(k <= MAX_DOUBLE_FACTORIAL_K, "double factorial limited to k <= 30");
    (1..=k).map(|i| (2 * i - 1) as f64).product()
}

/// `k!` as f64, for the factorial growth bounds (`k <= 30`).
pub fn factorial(k: usize) -> f64 {
    assert!(k <= MAX_DOUBLE_FACTORIAL_K, "factorial limited to k <= 30");
    (1..=k).map(|i| i as f64).product()
}

/// Binomial coefficient `C(n, k)` as f64, exact for the small orders used by
/// the moment identities (`n <= 12`).
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// `integral_0^x exp(-y^2/2) dy`, the centred Gaussian integral.
///
/// Evaluated through `erf`; odd in `x`.
#[inline]
pub fn gauss_center_integral(x: f64) -> f64 {
    (std::f64::consts::PI / 2.0).sqrt() * libm::erf(x / std::f64::consts::SQRT_2)
}

/// Standard Gaussian mass of the symmetric interval `[-q, q]`.
#[inline]
pub fn gauss_interval_mass(q: f64) -> f64 {
    libm::erf(q / std::f64::consts::SQRT_2)
}
