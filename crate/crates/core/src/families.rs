//! Cosine, sine and Riemann-Liouville families of a matrix generator,
//! realized as matrix Mittag-Leffler functions:
//!
//! * `C(t) = E_{a,1}(t^a A)`
//! * `S(t) = t E_{a,2}(t^a A)`
//! * `T(t) = t^(a-1) E_{a,a}(t^a A)`
//!
//! plus numerical checks of the defining axioms.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{ml_matrix_with, norm, GeneratorMatrix, Matrix};
use crate::quadrature::{graded_breaks, refine_breaks, GaussLegendre, QuadratureConfig};
use crate::special::{g, gamma_unchecked, FractionalOrder, MlOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Cosine,
    Sine,
    RiemannLiouville,
}

impl FamilyKind {
    /// Second Mittag-Leffler parameter `b` in `t^(b-1) E_{a,b}(t^a A)`.
    pub fn ml_b(self, alpha: f64) -> f64 {
        match self {
            FamilyKind::Cosine => 1.0,
            FamilyKind::Sine => 2.0,
            FamilyKind::RiemannLiouville => alpha,
        }
    }
}

/// A sample of one family at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyEvaluation {
    pub t: f64,
    pub kind: FamilyKind,
    pub value: Matrix,
}

/// Constants with `||C(t)|| <= M e^(omega t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentialBound {
    pub m: f64,
    pub omega: f64,
}

impl ExponentialBound {
    pub fn new(m: f64, omega: f64) -> Result<Self> {
        if !(m >= 1.0) || !(omega >= 0.0) || !m.is_finite() || !omega.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "exponential bound needs M >= 1, omega >= 0 (got M = {m}, omega = {omega})"
            )));
        }
        Ok(Self { m, omega })
    }

    pub fn trivial() -> Self {
        Self { m: 1.0, omega: 0.0 }
    }

    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        self.m * (self.omega * t).exp()
    }
}

/// The three families generated by one matrix.
#[derive(Debug, Clone)]
pub struct Families<'a> {
    alpha: FractionalOrder,
    a: &'a GeneratorMatrix,
    opts: MlOptions,
}

impl<'a> Families<'a> {
    pub fn new(alpha: FractionalOrder, a: &'a GeneratorMatrix) -> Self {
        Self::with_options(alpha, a, MlOptions::default())
    }

    pub fn with_options(alpha: FractionalOrder, a: &'a GeneratorMatrix, opts: MlOptions) -> Self {
        Self { alpha, a, opts }
    }

    pub fn alpha(&self) -> FractionalOrder {
        self.alpha
    }

    pub fn generator(&self) -> &GeneratorMatrix {
        self.a
    }

    pub fn options(&self) -> &MlOptions {
        &self.opts
    }

    /// `E_{a,b}(t^a A)`, the analytic factor of every family.
    pub fn ml_factor(&self, b: f64, t: f64) -> Result<Matrix> {
        let d = self.a.dim();
        if t == 0.0 || self.a.is_zero() {
            return Ok(Matrix::identity(d, d) * crate::special::inv_gamma(b));
        }
        let x = self.a.matrix() * t.powf(self.alpha.value());
        Ok(ml_matrix_with(self.alpha.value(), b, &x, &self.opts)?.value)
    }

    fn check_time(t: f64) -> Result<()> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain {
                what: "family time",
                value: t,
            });
        }
        Ok(())
    }

    pub fn cosine(&self, t: f64) -> Result<Matrix> {
        Self::check_time(t)?;
        self.ml_factor(1.0, t)
    }

    pub fn sine(&self, t: f64) -> Result<Matrix> {
        Self::check_time(t)?;
        if t == 0.0 {
            let d = self.a.dim();
            return Ok(Matrix::zeros(d, d));
        }
        Ok(self.ml_factor(2.0, t)? * t)
    }

    pub fn riemann_liouville(&self, t: f64) -> Result<Matrix> {
        Self::check_time(t)?;
        let alpha = self.alpha.value();
        if t == 0.0 {
            let d = self.a.dim();
            return Ok(Matrix::zeros(d, d));
        }
        Ok(self.ml_factor(alpha, t)? * t.powf(alpha - 1.0))
    }

    pub fn value(&self, kind: FamilyKind, t: f64) -> Result<Matrix> {
        match kind {
            FamilyKind::Cosine => self.cosine(t),
            FamilyKind::Sine => self.sine(t),
            FamilyKind::RiemannLiouville => self.riemann_liouville(t),
        }
    }

    pub fn evaluate(&self, kind: FamilyKind, t: f64) -> Result<FamilyEvaluation> {
        Ok(FamilyEvaluation {
            t,
            kind,
            value: self.value(kind, t)?,
        })
    }

    /// `int_0^t g_order(t - r) C(r) dr` by Gauss-Legendre on a mesh graded
    /// towards both ends, refined until successive estimates agree.
    pub fn cosine_integral(&self, order: f64, t: f64, quad: &QuadratureConfig) -> Result<Matrix> {
        let d = self.a.dim();
        if t <= 0.0 {
            return Ok(Matrix::zeros(d, d));
        }
        let gl = GaussLegendre::new(quad.gauss_order());
        // Split at t/2. Near r = t the kernel is integrated in u = t - r so
        // its grading is not lost to cancellation in t - r.
        let half = 0.5 * t;
        let kernel_levels = if order < 1.0 {
            ((45.0 / order).ceil() as usize).clamp(quad.graded_levels, 400)
        } else {
            quad.graded_levels
        };
        let near_t = graded_breaks(half, quad.panels, kernel_levels);
        let near_0 = graded_breaks(half, quad.panels, quad.graded_levels);
        let rule = |(near_t, near_0): &(Vec<f64>, Vec<f64>)| -> Result<Matrix> {
            let mut acc = Matrix::zeros(d, d);
            let mut err = None;
            gl.for_each_node(near_t, |u, w| {
                if err.is_none() {
                    match self.cosine(t - u) {
                        Ok(c) => acc += c * (w * g(order, u)),
                        Err(e) => err = Some(e),
                    }
                }
            });
            gl.for_each_node(near_0, |r, w| {
                if err.is_none() {
                    match self.cosine(r) {
                        Ok(c) => acc += c * (w * g(order, t - r)),
                        Err(e) => err = Some(e),
                    }
                }
            });
            err.map_or(Ok(acc), Err)
        };
        let base = (near_t, near_0);
        let mut coarse = rule(&base)?;
        let mut breaks = base;
        let mut last_estimate = f64::INFINITY;
        for _ in 0..4 {
            breaks = (
                refine_breaks(&breaks.0, quad.refinement_factor),
                refine_breaks(&breaks.1, quad.refinement_factor),
            );
            let fine = rule(&breaks)?;
            let estimate = norm(&(&fine - &coarse));
            if estimate <= quad.target_tol {
                return Ok(fine);
            }
            if estimate >= last_estimate {
                return Err(Error::QuadratureStalled {
                    estimate,
                    target: quad.target_tol,
                });
            }
            last_estimate = estimate;
            coarse = fine;
        }
        Err(Error::QuadratureStalled {
            estimate: last_estimate,
            target: quad.target_tol,
        })
    }
}

pub fn cosine_family(
    alpha: FractionalOrder,
    t: f64,
    a: &GeneratorMatrix,
) -> Result<FamilyEvaluation> {
    Families::new(alpha, a).evaluate(FamilyKind::Cosine, t)
}

pub fn sine_family(
    alpha: FractionalOrder,
    t: f64,
    a: &GeneratorMatrix,
) -> Result<FamilyEvaluation> {
    Families::new(alpha, a).evaluate(FamilyKind::Sine, t)
}

pub fn rl_family(alpha: FractionalOrder, t: f64, a: &GeneratorMatrix) -> Result<FamilyEvaluation> {
    Families::new(alpha, a).evaluate(FamilyKind::RiemannLiouville, t)
}

/// Norm of `C(s) I_t C(t) - I_s C(s) C(t) - I_t C(t) + I_s C(s)`, where
/// `I_t C(t)` is the order-alpha fractional integral of the cosine family.
pub fn check_functional_equation(
    alpha: FractionalOrder,
    a: &GeneratorMatrix,
    s: f64,
    t: f64,
    quad: &QuadratureConfig,
) -> Result<f64> {
    quad.validate()?;
    let fam = Families::new(alpha, a);
    let order = alpha.value();
    let cs = fam.cosine(s)?;
    let ct = fam.cosine(t)?;
    let is = fam.cosine_integral(order, s, quad)?;
    let it = fam.cosine_integral(order, t, quad)?;
    let residual = &cs * &it - &is * &ct - &it + &is;
    Ok(norm(&residual))
}

/// `Gamma(alpha + 1) (C(t) x - x) / t^alpha` for each `t` of a decreasing
/// sequence; tends to `A x`.
pub fn generator_limit(
    alpha: FractionalOrder,
    a: &GeneratorMatrix,
    x: &DVector<f64>,
    t_sequence: &[f64],
) -> Result<Vec<DVector<f64>>> {
    if x.len() != a.dim() {
        return Err(Error::InvalidArgument("vector dimension mismatch".into()));
    }
    if t_sequence.iter().any(|&t| !(t > 0.0)) || t_sequence.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument(
            "time sequence must be positive and strictly decreasing".into(),
        ));
    }
    let fam = Families::new(alpha, a);
    let scale = gamma_unchecked(alpha.value() + 1.0);
    t_sequence
        .iter()
        .map(|&t| {
            let c = fam.cosine(t)?;
            Ok((c * x - x) * (scale / t.powf(alpha.value())))
        })
        .collect()
}

/// Grid estimate of `(M, omega)`: omega from the spectrum (largest growth
/// rate of the scalar Mittag-Leffler modes), then `M` as the largest
/// `||C(t)|| e^(-omega t)`, refined locally around the best grid point and
/// floored at 1.
pub fn estimate_exponential_bound(
    alpha: FractionalOrder,
    a: &GeneratorMatrix,
    grid: &[f64],
) -> Result<ExponentialBound> {
    estimate_exponential_bound_with(&Families::new(alpha, a), grid)
}

pub fn estimate_exponential_bound_with(
    fam: &Families<'_>,
    grid: &[f64],
) -> Result<ExponentialBound> {
    if grid.is_empty() || grid.iter().any(|&t| !(t >= 0.0)) {
        return Err(Error::InvalidArgument(
            "bound grid must be non-empty and non-negative".into(),
        ));
    }
    let omega = fam.generator().growth_rate(fam.alpha().value());
    let ratio = |t: f64| -> Result<f64> { Ok(norm(&fam.cosine(t)?) * (-omega * t).exp()) };
    let mut sorted = grid.to_vec();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sorted.dedup();
    let values: Vec<f64> = sorted.iter().map(|&t| ratio(t)).collect::<Result<_>>()?;
    let (imax, mut m) =
        values
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
            );
    // golden-section search on the bracket around the discrete maximum
    let lo = sorted[imax.saturating_sub(1)];
    let hi = sorted[(imax + 1).min(sorted.len() - 1)];
    if hi > lo {
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a0, mut b0) = (lo, hi);
        let mut c = b0 - phi * (b0 - a0);
        let mut dd = a0 + phi * (b0 - a0);
        let (mut fc, mut fd) = (ratio(c)?, ratio(dd)?);
        for _ in 0..40 {
            if fc > fd {
                b0 = dd;
                dd = c;
                fd = fc;
                c = b0 - phi * (b0 - a0);
                fc = ratio(c)?;
            } else {
                a0 = c;
                c = dd;
                fc = fd;
                dd = a0 + phi * (b0 - a0);
                fd = ratio(dd)?;
            }
        }
        m = m.max(fc).max(fd);
    }
    ExponentialBound::new(m.max(1.0), omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn order(a: f64) -> FractionalOrder {
        FractionalOrder::new(a).unwrap()
    }

    fn sym2() -> GeneratorMatrix {
        GeneratorMatrix::from_rows(&[vec![-1.2, 0.4], vec![0.4, 0.6]]).unwrap()
    }

    #[test]
    fn initial_values() {
        let a = sym2();
        for al in [1.25, 1.5, 2.0] {
            assert_eq!(
                cosine_family(order(al), 0.0, &a).unwrap().value,
                Matrix::identity(2, 2)
            );
            assert_eq!(
                sine_family(order(al), 0.0, &a).unwrap().value,
                Matrix::zeros(2, 2)
            );
            assert_eq!(
                rl_family(order(al), 0.0, &a).unwrap().value,
                Matrix::zeros(2, 2)
            );
        }
    }

    #[test]
    fn classical_scalar_reduction() {
        let a = GeneratorMatrix::scalar(-1.0);
        let two = FractionalOrder::classical();
        for &t in &[0.1, 0.7, 1.9, 3.0] {
            assert_relative_eq!(
                cosine_family(two, t, &a).unwrap().value[(0, 0)],
                t.cos(),
                epsilon = 1e-13
            );
            assert_relative_eq!(
                sine_family(two, t, &a).unwrap().value[(0, 0)],
                t.sin(),
                epsilon = 1e-13
            );
            assert_relative_eq!(
                rl_family(two, t, &a).unwrap().value[(0, 0)],
                t.sin(),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn zero_generator_families() {
        let z = GeneratorMatrix::zeros(2);
        let al = order(1.5);
        assert_eq!(
            cosine_family(al, 1.3, &z).unwrap().value,
            Matrix::identity(2, 2)
        );
        assert_relative_eq!(
            sine_family(al, 1.3, &z).unwrap().value[(1, 1)],
            1.3,
            max_relative = 1e-15
        );
        let rl = rl_family(al, 1.0, &z).unwrap().value;
        assert_relative_eq!(rl[(0, 0)], 1.0 / gamma_unchecked(1.5), max_relative = 1e-14);
        assert_eq!(rl[(0, 1)], 0.0);
    }

    #[test]
    fn commuting_family() {
        let a = sym2();
        let fam = Families::new(order(1.5), &a);
        let ns = GeneratorMatrix::from_rows(&[vec![0.3, 1.0], vec![-0.2, 0.1]]).unwrap();
        let fam2 = Families::new(order(1.25), &ns);
        for (s, t) in [(0.3, 1.7), (1.1, 0.2)] {
            for f in [&fam, &fam2] {
                let cs = f.cosine(s).unwrap();
                let ct = f.cosine(t).unwrap();
                assert!(norm(&(&cs * &ct - &ct * &cs)) < 1e-10);
            }
        }
    }

    #[test]
    fn functional_equation_residuals() {
        let quad = QuadratureConfig::default();
        let z = GeneratorMatrix::zeros(2);
        assert!(check_functional_equation(order(1.5), &z, 0.4, 1.3, &quad).unwrap() <= 1e-8);
        let a = sym2();
        assert!(check_functional_equation(order(1.5), &a, 0.8, 0.8, &quad).unwrap() <= 1e-8);
        assert!(check_functional_equation(order(1.5), &a, 0.5, 1.0, &quad).unwrap() <= 1e-6);
    }

    #[test]
    fn generator_limit_examples() {
        let x = DVector::from_vec(vec![1.0]);
        let z = GeneratorMatrix::zeros(1);
        for v in generator_limit(order(1.5), &z, &x, &[0.1, 0.01]).unwrap() {
            assert_eq!(v[0], 0.0);
        }
        let a = GeneratorMatrix::scalar(-1.0);
        let v = generator_limit(FractionalOrder::classical(), &a, &x, &[0.01]).unwrap();
        let t = 0.01f64;
        assert_relative_eq!(
            v[0][0],
            2.0 * (t.cos() - 1.0) / (t * t),
            max_relative = 1e-10
        );
        let a = GeneratorMatrix::scalar(2.0);
        let seq = generator_limit(order(1.5), &a, &x, &[1e-1, 1e-2, 1e-3]).unwrap();
        let errs: Vec<f64> = seq.iter().map(|v| (v[0] - 2.0).abs()).collect();
        assert!(errs[2] < errs[1] && errs[1] < errs[0]);
        assert!(generator_limit(order(1.5), &a, &x, &[0.1, 0.2]).is_err());
    }

    #[test]
    fn exponential_bound_examples() {
        let grid: Vec<f64> = (0..=100).map(|k| 0.04 * k as f64).collect();
        let b = estimate_exponential_bound(order(1.5), &GeneratorMatrix::zeros(2), &grid).unwrap();
        assert_eq!((b.m, b.omega), (1.0, 0.0));
        let a = GeneratorMatrix::diagonal(&[-1.0, -4.0]).unwrap();
        let b = estimate_exponential_bound(FractionalOrder::classical(), &a, &grid).unwrap();
        assert_eq!(b.omega, 0.0);
        assert!(b.m <= 1.0 + 1e-12);
        let a = GeneratorMatrix::diagonal(&[3.0, 0.5]).unwrap();
        let b = estimate_exponential_bound(FractionalOrder::classical(), &a, &grid).unwrap();
        assert_relative_eq!(b.omega, 3f64.sqrt(), max_relative = 1e-12);
        for &t in &grid {
            assert!(
                norm(
                    &cosine_family(FractionalOrder::classical(), t, &a)
                        .unwrap()
                        .value
                ) <= b.at(t) * (1.0 + 1e-12)
            );
        }
    }
}
