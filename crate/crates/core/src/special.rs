//! Scalar special functions: gamma, the `g_a` power kernels and the
//! two-parameter Mittag-Leffler function.
//!
//! The Mittag-Leffler series is summed directly with compensated
//! summation. That is only trustworthy when the argument is moderate, so
//! the evaluation domain `|z| <= z_max` is enforced rather than assumed.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Order `alpha` of a fractional cosine family, `1 < alpha <= 2`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 1.0 && alpha <= 2.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::Domain {
                what: "fractional order",
                value: alpha,
            })
        }
    }

    /// The classical order `alpha = 2`.
    pub fn classical() -> Self {
        Self(2.0)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_classical(self) -> bool {
        self.0 == 2.0
    }
}

/// Order `a >= 0` of the kernel `g_a`; `a = 0` is the zero kernel.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct KernelOrder(f64);

impl KernelOrder {
    pub fn new(a: f64) -> Result<Self> {
        if a.is_finite() && a >= 0.0 {
            Ok(Self(a))
        } else {
            Err(Error::Domain {
                what: "kernel order",
                value: a,
            })
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

// Lanczos coefficients, g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    // x is already shifted by -1
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    acc
}

/// Gamma function for `x > 0`.
pub fn gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            what: "gamma",
            value: x,
        });
    }
    Ok(gamma_unchecked(x))
}

pub(crate) fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma_unchecked(1.0 - x));
    }
    if x == x.floor() && x <= 23.0 {
        // exact factorials
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return f;
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    // split the power so t^(z+1/2) does not overflow before e^-t shrinks it
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * PI).sqrt() * half * ((-t).exp() * half) * lanczos_sum(z)
}

/// Natural logarithm of gamma for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            what: "ln_gamma",
            value: x,
        });
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        return (PI / (PI * x).sin()).ln() - ln_gamma_unchecked(1.0 - x);
    }
    if x < 100.0 {
        return gamma_unchecked(x).ln();
    }
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

/// `1 / Gamma(x)` for `x > 0`, returning 0 where gamma overflows.
pub(crate) fn inv_gamma(x: f64) -> f64 {
    if x > 171.0 {
        (-ln_gamma_unchecked(x)).exp()
    } else {
        1.0 / gamma_unchecked(x)
    }
}

/// `Gamma(x) / Gamma(x + a)` without intermediate overflow.
pub(crate) fn gamma_ratio(x: f64, a: f64) -> f64 {
    if x + a < 160.0 {
        gamma_unchecked(x) / gamma_unchecked(x + a)
    } else {
        (ln_gamma_unchecked(x) - ln_gamma_unchecked(x + a)).exp()
    }
}

/// The kernel `g_a(t) = t^(a-1) / Gamma(a)` for `t > 0`, zero otherwise.
pub fn g_kernel(a: KernelOrder, t: f64) -> f64 {
    g(a.value(), t)
}

/// `(g_a * g_b)(t) = int_0^t g_a(t-s) g_b(s) ds`, split at `t/2` so each
/// half is integrated in its own variable on panels graded towards zero,
/// where that half's singular factor sits.
pub fn g_convolution(a: KernelOrder, b: KernelOrder, t: f64) -> f64 {
    let (a, b) = (a.value(), b.value());
    if t <= 0.0 || a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let half = 0.5 * t;
    let graded = |p: f64| {
        let levels = ((45.0 / p.min(1.0)).ceil() as usize).min(400);
        let mut breaks = vec![0.0];
        breaks.extend((1..=levels).rev().map(|k| half * 0.5f64.powi(k as i32)));
        breaks.push(half);
        breaks
    };
    let gl = crate::quadrature::GaussLegendre::new(20);
    gl.integrate(&graded(b), |s| g(a, t - s) * g(b, s))
        + gl.integrate(&graded(a), |u| g(a, u) * g(b, t - u))
}

#[inline]
pub(crate) fn g(a: f64, t: f64) -> f64 {
    if t <= 0.0 || a == 0.0 {
        return 0.0;
    }
    if a == 1.0 {
        return 1.0;
    }
    if a == 2.0 {
        return t;
    }
    if a > 150.0 {
        return ((a - 1.0) * t.ln() - ln_gamma_unchecked(a)).exp();
    }
    t.powf(a - 1.0) * inv_gamma(a)
}

/// Settings for Mittag-Leffler series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlOptions {
    /// Largest admissible `|z|` (matrix: max-row-sum norm of the argument).
    pub z_max: f64,
    /// Maximum number of series terms before reporting non-convergence.
    pub term_cap: usize,
}

pub const DEFAULT_Z_MAX: f64 = 100.0;

impl Default for MlOptions {
    fn default() -> Self {
        Self {
            z_max: DEFAULT_Z_MAX,
            term_cap: 4000,
        }
    }
}

impl MlOptions {
    pub fn with_z_max(z_max: f64) -> Self {
        Self {
            z_max,
            ..Self::default()
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Value of a Mittag-Leffler evaluation together with a rounding-error
/// estimate driven by the largest partial terms (cancellation for `z < 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MlValue {
    pub value: f64,
    pub rounding_error: f64,
    pub terms: usize,
}

/// Two-parameter Mittag-Leffler function `E_{a,b}(z)` with default options.
pub fn ml_scalar(a: f64, b: f64, z: f64) -> Result<f64> {
    ml_scalar_with(a, b, z, &MlOptions::default()).map(|v| v.value)
}

/// `E_{a,b}(z) = sum_k z^k / Gamma(a k + b)` with explicit options.
pub fn ml_scalar_with(a: f64, b: f64, z: f64, opts: &MlOptions) -> Result<MlValue> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Mittag-Leffler parameters must be positive (a = {a}, b = {b})"
        )));
    }
    if !z.is_finite() || z.abs() > opts.z_max {
        return Err(Error::Domain {
            what: "Mittag-Leffler argument",
            value: z,
        });
    }
    let mut term = inv_gamma(b);
    let mut sum = CompensatedSum::default();
    let mut magnitude = 0.0;
    for k in 0..opts.term_cap {
        sum.add(term);
        magnitude += term.abs();
        let next = term * z * gamma_ratio(a * k as f64 + b, a);
        let acc = sum.value();
        if next.abs() < 1e-15 * (1.0 + acc.abs()) && next.abs() <= term.abs() {
            return Ok(MlValue {
                value: acc,
                rounding_error: 4.0 * f64::EPSILON * magnitude,
                terms: k + 1,
            });
        }
        term = next;
    }
    Err(Error::NonConvergence {
        what: "Mittag-Leffler series",
        terms: opts.term_cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gamma_small_values() {
        assert_eq!(gamma(1.0).unwrap(), 1.0);
        assert_eq!(gamma(2.0).unwrap(), 1.0);
        assert_relative_eq!(gamma(1.5).unwrap(), PI.sqrt() / 2.0, max_relative = 1e-14);
        assert_relative_eq!(gamma(0.5).unwrap(), PI.sqrt(), max_relative = 1e-14);
        assert!(gamma(0.0).is_err());
        assert!(gamma(-1.5).is_err());
    }

    #[test]
    fn gamma_matches_factorials_and_recurrence() {
        // Gamma(x+1) = x Gamma(x) over (0, 49]
        let mut x = 0.013;
        while x < 49.0 {
            let lhs = gamma(x + 1.0).unwrap();
            let rhs = x * gamma(x).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
            x += 0.377;
        }
        let mut fact = 1.0_f64;
        for n in 1..=40u32 {
            fact *= n as f64;
            assert_relative_eq!(gamma(n as f64 + 1.0).unwrap(), fact, max_relative = 1e-12);
        }
    }

    #[test]
    fn ln_gamma_consistent() {
        for &x in &[0.1, 0.7, 3.3, 50.0, 99.9, 100.1, 170.0] {
            assert_relative_eq!(
                ln_gamma(x).unwrap(),
                gamma(x).unwrap().ln(),
                max_relative = 1e-12
            );
        }
        assert_relative_eq!(gamma_ratio(200.0, 1.0), 1.0 / 200.0, max_relative = 1e-12);
    }

    #[test]
    fn g_kernel_values() {
        let k = |a| KernelOrder::new(a).unwrap();
        assert_eq!(g_kernel(k(1.0), 0.7), 1.0);
        assert_eq!(g_kernel(k(2.0), 0.5), 0.5);
        assert_relative_eq!(g_kernel(k(1.5), 1.0), 2.0 / PI.sqrt(), max_relative = 1e-14);
        assert_eq!(g_kernel(k(0.0), 3.0), 0.0);
        for a in [0.0, 0.3, 0.5, 1.0, 2.7] {
            assert_eq!(g_kernel(k(a), 0.0), 0.0);
            assert_eq!(g_kernel(k(a), -1.2), 0.0);
        }
        assert!(KernelOrder::new(-0.1).is_err());
    }

    #[test]
    fn fractional_order_bounds() {
        assert!(FractionalOrder::new(1.0).is_err());
        assert!(FractionalOrder::new(2.0).is_ok());
        assert!(FractionalOrder::new(2.01).is_err());
        assert!(FractionalOrder::new(f64::NAN).is_err());
        assert!(FractionalOrder::new(1.0001).is_ok());
    }

    #[test]
    fn ml_scalar_closed_forms() {
        assert_relative_eq!(ml_scalar(1.3, 2.5, 0.0).unwrap(), 1.0 / gamma(2.5).unwrap());
        assert_relative_eq!(
            ml_scalar(2.0, 1.0, 1.0).unwrap(),
            1f64.cosh(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            ml_scalar(1.0, 1.0, 1.0).unwrap(),
            1f64.exp(),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            ml_scalar(1.0, 1.0, 50.0).unwrap(),
            50f64.exp(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            ml_scalar(2.0, 1.0, -9.0).unwrap(),
            3f64.cos(),
            epsilon = 1e-13
        );
        assert_relative_eq!(
            ml_scalar(2.0, 2.0, -4.0).unwrap(),
            2f64.sin() / 2.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn ml_scalar_domain_errors() {
        assert!(matches!(
            ml_scalar(1.5, 1.0, 100.5),
            Err(Error::Domain { .. })
        ));
        assert!(ml_scalar(0.0, 1.0, 1.0).is_err());
        let tight = MlOptions {
            z_max: 100.0,
            term_cap: 5,
        };
        assert!(matches!(
            ml_scalar_with(1.0, 1.0, 10.0, &tight),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn ml_scalar_sinh_identity() {
        // t E_{2,2}(z t^2) = sinh(sqrt(z) t) / sqrt(z)
        for &z in &[0.01, 0.3, 1.0, 2.5, 9.0] {
            for &t in &[0.1, 0.5, 1.0, 2.0, 3.0] {
                let lhs = ml_scalar(2.0, 2.0, z * t * t).unwrap() * t;
                let rhs = (z.sqrt() * t).sinh() / z.sqrt();
                assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
            }
        }
    }
}
