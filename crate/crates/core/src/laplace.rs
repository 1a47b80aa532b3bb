//! Numerical Laplace transforms of the families and of the perturbation
//! series, truncated to `[0, T_max]` with closed-form tail bounds, and the
//! transform identities they satisfy:
//!
//! * `L[C](l) = l^(a-1) R`, `L[S](l) = l^(a-2) R`, `L[T](l) = R` with
//!   `R = (l^a - A)^-1`
//! * per term: `L[S_n] = R B L[S_{n-1}] = l^(a-2) R (B R)^n`, and for the
//!   two cosine recursions `L[C_n] = l^(a-1) R B L[S_{n-1}]` (sine-fed) or
//!   `L[C_n] = R B L[C_{n-1}] = l^(a-1) R (B R)^n` (cosine-fed)
//! * summed: `L[S(A+B)] = l^(a-2) R(A+B)`, `L[C(A+B)] = l^(a-1) R(A+B)`
//!
//! Every transform integrand is bounded by `K e^(omega t) g_k(t)` for some
//! `K`, `k`, so the neglected tail is bounded through [`g_tail`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{ExponentialBound, FamilyKind};
use crate::linalg::{norm, GeneratorMatrix, Matrix};
use crate::quadrature::{graded_breaks, refine_breaks, GaussLegendre, QuadratureConfig};
use crate::resolvent::{neumann_resolvent, resolvent, ResolventPoint};
use crate::series::{bound_order, Chain, SeriesEngine};
use crate::special::{inv_gamma, FractionalOrder, MlOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct LaplaceQuadrature {
    pub t_max: f64,
    pub panels: usize,
    pub nodes_per_panel: usize,
    pub graded_levels: usize,
    /// Largest admissible tail bound.
    pub tolerance: f64,
}

impl Default for LaplaceQuadrature {
    fn default() -> Self {
        Self {
            t_max: 20.0,
            panels: 20,
            nodes_per_panel: 12,
            graded_levels: 24,
            tolerance: 1e-5,
        }
    }
}

impl LaplaceQuadrature {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_max > 0.0) || !self.t_max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "T_max must be positive, got {}",
                self.t_max
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Laplace tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        self.series_config().validate()
    }

    fn series_config(&self) -> QuadratureConfig {
        QuadratureConfig {
            panels: self.panels,
            nodes_per_panel: self.nodes_per_panel,
            graded_levels: self.graded_levels,
            ..QuadratureConfig::default()
        }
    }
}

/// Bound on `int_T^inf e^(-c t) g_k(t) dt`.
///
/// Past `t = (k-1)/c` the integrand decays at least like `e^(-(c-(k-1)/T) t)`;
/// before that point the full integral `c^-k` is returned.
pub fn g_tail(k: f64, c: f64, t_max: f64) -> f64 {
    let head = (-c * t_max).exp() * t_max.powf(k - 1.0) * inv_gamma(k);
    if k <= 1.0 {
        head / c
    } else if c > (k - 1.0) / t_max {
        head / (c - (k - 1.0) / t_max)
    } else {
        c.powf(-k)
    }
}

/// What to transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplaceKind {
    Cosine,
    Sine,
    RiemannLiouville,
    PerturbedCosine,
    PerturbedSine,
    Term { chain: Chain, n: usize },
}

/// A truncated transform and its error budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplaceValue {
    #[serde(skip)]
    pub value: Matrix,
    /// Bound on the transform of the integrand beyond `T_max`.
    pub tail_bound: f64,
    /// Difference between the quadrature and its panel-halved refinement.
    pub quadrature_error: f64,
    /// Weighted majorant of the series terms left out (sums only).
    pub truncation_bound: f64,
    pub n_terms: usize,
}

impl LaplaceValue {
    pub fn error_budget(&self) -> f64 {
        self.tail_bound + self.quadrature_error + self.truncation_bound
    }
}

/// A residual norm with the error budget of the transforms it compares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residual {
    pub measured: f64,
    pub error_budget: f64,
}

impl Residual {
    fn between(lhs: &LaplaceValue, target: &Matrix, extra_budget: f64) -> Self {
        Self {
            measured: norm(&(&lhs.value - target)),
            error_budget: lhs.error_budget() + extra_budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformResiduals {
    pub lambda: f64,
    pub cosine: Residual,
    pub sine: Residual,
    pub riemann_liouville: Residual,
}

impl TransformResiduals {
    pub fn max(&self) -> f64 {
        self.cosine
            .measured
            .max(self.sine.measured)
            .max(self.riemann_liouville.measured)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermRecursionResiduals {
    pub n: usize,
    pub lambda: f64,
    /// `L[S_n] - R B L[S_{n-1}]`
    pub sine_recursion: Residual,
    /// `L[S_n] - l^(a-2) R (B R)^n`
    pub sine_closed_form: Residual,
    /// `L[S_n] - R (B R)^n`; nonzero unless `alpha = 2`. Informational.
    pub sine_closed_form_without_scale: Residual,
    /// Sine-fed cosine terms: `L[C_n] - l^(a-1) R B L[S_{n-1}]`
    pub cosine_recursion: Residual,
    /// Cosine-fed terms: `L[C_n] - R B L[C_{n-1}]`
    pub cosine_fed_recursion: Residual,
    /// Cosine-fed terms: `L[C_n] - l^(a-1) R (B R)^n`
    pub cosine_fed_closed_form: Residual,
}

impl TermRecursionResiduals {
    /// Largest asserted residual.
    pub fn max(&self) -> f64 {
        [
            self.sine_recursion,
            self.sine_closed_form,
            self.cosine_recursion,
            self.cosine_fed_recursion,
            self.cosine_fed_closed_form,
        ]
        .iter()
        .map(|r| r.measured)
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbedResiduals {
    pub lambda: f64,
    pub theta: f64,
    pub neumann_terms: usize,
    /// `L[S(A+B)] - l^(a-2) R_neumann`
    pub sine_neumann: Residual,
    pub sine_direct: Residual,
    /// `L[C(A+B)] - l^(a-1) R_neumann`
    pub cosine_neumann: Residual,
    pub cosine_direct: Residual,
    /// `L[S(A+B)] - R_neumann`; informational.
    pub sine_without_scale: Residual,
    /// Sum of the sine-fed cosine series against `l^(a-1) R_neumann`;
    /// informational, zero only at `alpha = 2`.
    pub sine_fed_cosine: Residual,
}

impl PerturbedResiduals {
    pub fn max(&self) -> f64 {
        [
            self.sine_neumann,
            self.sine_direct,
            self.cosine_neumann,
            self.cosine_direct,
        ]
        .iter()
        .map(|r| r.measured)
        .fold(0.0, f64::max)
    }
}

/// Shared state for transforms of one `(alpha, A, B)` problem; series
/// terms are computed once and reused across `lambda`.
pub struct LaplaceVerifier {
    engine: SeriesEngine,
    lq: LaplaceQuadrature,
    gl: GaussLegendre,
    breaks: Vec<f64>,
    fine_breaks: Vec<f64>,
    series_tol: f64,
}

impl LaplaceVerifier {
    pub fn new(
        alpha: FractionalOrder,
        a: &GeneratorMatrix,
        b: &GeneratorMatrix,
        lq: &LaplaceQuadrature,
    ) -> Result<Self> {
        lq.validate()?;
        let reach = lq.t_max.powf(alpha.value()) * a.norm().max(a.add(b)?.norm());
        let opts = MlOptions::with_z_max((2.0 * reach + 1.0).max(MlOptions::default().z_max));
        let engine =
            SeriesEngine::with_options(alpha, &[lq.t_max], a, b, &lq.series_config(), opts)?;
        let breaks = graded_breaks(lq.t_max, lq.panels, lq.graded_levels);
        let fine_breaks = refine_breaks(&breaks, 2);
        Ok(Self {
            engine,
            lq: *lq,
            gl: GaussLegendre::new(lq.nodes_per_panel + 2),
            breaks,
            fine_breaks,
            series_tol: 1e-10,
        })
    }

    pub fn engine(&self) -> &SeriesEngine {
        &self.engine
    }

    pub fn bound(&self) -> Result<ExponentialBound> {
        self.engine.bound()
    }

    /// Replace the grid-estimated bound with a caller-supplied one.
    pub fn set_bound(&self, bound: ExponentialBound) {
        self.engine.set_bound(bound);
    }

    fn alpha(&self) -> f64 {
        self.engine.alpha().value()
    }

    fn shift(&self, lambda: f64) -> Result<(f64, ExponentialBound)> {
        let bound = self.bound()?;
        let c = lambda - bound.omega;
        if !(c > 0.0) {
            return Err(Error::Domain {
                what: "Laplace parameter at or below the growth bound",
                value: lambda,
            });
        }
        Ok((c, bound))
    }

    fn point(&self, lambda: f64) -> Result<ResolventPoint> {
        ResolventPoint::new(lambda, self.engine.alpha())
    }

    fn integrate<F: FnMut(f64) -> Result<Matrix>>(
        &self,
        lambda: f64,
        mut f: F,
    ) -> Result<(Matrix, f64)> {
        let d = self.engine.generator().dim();
        let mut run = |breaks: &[f64]| -> Result<Matrix> {
            let mut acc = Matrix::zeros(d, d);
            let mut err = None;
            self.gl.for_each_node(breaks, |t, w| {
                if err.is_some() {
                    return;
                }
                match f(t) {
                    Ok(m) => acc += m * (w * (-lambda * t).exp()),
                    Err(e) => err = Some(e),
                }
            });
            err.map_or(Ok(acc), Err)
        };
        let coarse = run(&self.breaks)?;
        let fine = run(&self.fine_breaks)?;
        let est = norm(&(&fine - &coarse));
        Ok((fine, est))
    }

    fn checked_tail(&self, tail: f64) -> Result<f64> {
        if tail > self.lq.tolerance {
            return Err(Error::TailTooLarge {
                tail,
                tolerance: self.lq.tolerance,
            });
        }
        Ok(tail)
    }

    /// Transform of an unperturbed family of `A`.
    pub fn family(&self, kind: FamilyKind, lambda: f64) -> Result<LaplaceValue> {
        let (c, bound) = self.shift(lambda)?;
        let k = match kind {
            FamilyKind::Cosine => 1.0,
            FamilyKind::Sine => 2.0,
            FamilyKind::RiemannLiouville => self.alpha(),
        };
        let tail = self.checked_tail(bound.m * g_tail(k, c, self.lq.t_max))?;
        let fam = self.engine.families();
        let (value, quadrature_error) = self.integrate(lambda, |t| fam.value(kind, t))?;
        Ok(LaplaceValue {
            value,
            tail_bound: tail,
            quadrature_error,
            truncation_bound: 0.0,
            n_terms: 1,
        })
    }

    fn term_weight(&self, n: usize, bound: &ExponentialBound) -> f64 {
        bound.m.powi(n as i32 + 1) * self.engine.b_norm().powi(n as i32)
    }

    /// Transform of term `n` of a series chain.
    pub fn term(&self, chain: Chain, n: usize, lambda: f64) -> Result<LaplaceValue> {
        let (c, bound) = self.shift(lambda)?;
        let k = bound_order(chain.kind(), self.alpha(), n);
        let tail = self.checked_tail(self.term_weight(n, &bound) * g_tail(k, c, self.lq.t_max))?;
        let term = self.engine.term(chain, n)?;
        let (value, quadrature_error) = self.integrate(lambda, |t| Ok(term.value_at(t)))?;
        Ok(LaplaceValue {
            value,
            tail_bound: tail,
            quadrature_error,
            truncation_bound: 0.0,
            n_terms: 1,
        })
    }

    /// Transform of a summed series; the number of terms comes from the
    /// Laplace-weighted term bounds `M^(n+1) ||B||^n c^-k_n`, a geometric
    /// sequence of ratio `M ||B|| / c^a`.
    pub fn series(&self, chain: Chain, lambda: f64) -> Result<LaplaceValue> {
        let (c, bound) = self.shift(lambda)?;
        let alpha = self.alpha();
        let ratio = bound.m * self.engine.b_norm() / c.powf(alpha);
        if ratio >= 1.0 {
            return Err(Error::HypothesisViolated { theta: ratio });
        }
        let weighted =
            |n: usize| self.term_weight(n, &bound) * c.powf(-bound_order(chain.kind(), alpha, n));
        let cap = self.engine.term_cap();
        let mut n_terms = 1;
        let truncation = loop {
            let rest = weighted(n_terms) / (1.0 - ratio);
            if rest < self.series_tol {
                break rest;
            }
            n_terms += 1;
            if n_terms >= cap {
                return Err(Error::TermCap {
                    terms: cap,
                    tail: rest,
                });
            }
        };
        let tail: f64 = (0..n_terms)
            .map(|n| {
                self.term_weight(n, &bound)
                    * g_tail(bound_order(chain.kind(), alpha, n), c, self.lq.t_max)
            })
            .sum();
        let tail = self.checked_tail(tail)?;
        let terms = (0..n_terms)
            .map(|n| self.engine.term(chain, n))
            .collect::<Result<Vec<_>>>()?;
        let d = self.engine.generator().dim();
        let (value, quadrature_error) = self.integrate(lambda, |t| {
            let mut acc = Matrix::zeros(d, d);
            for term in &terms {
                acc += term.value_at(t);
            }
            Ok(acc)
        })?;
        Ok(LaplaceValue {
            value,
            tail_bound: tail,
            quadrature_error,
            truncation_bound: truncation,
            n_terms,
        })
    }

    pub fn transform(&self, kind: LaplaceKind, lambda: f64) -> Result<LaplaceValue> {
        match kind {
            LaplaceKind::Cosine => self.family(FamilyKind::Cosine, lambda),
            LaplaceKind::Sine => self.family(FamilyKind::Sine, lambda),
            LaplaceKind::RiemannLiouville => self.family(FamilyKind::RiemannLiouville, lambda),
            LaplaceKind::PerturbedCosine => self.series(Chain::Cosine, lambda),
            LaplaceKind::PerturbedSine => self.series(Chain::Sine, lambda),
            LaplaceKind::Term { chain, n } => self.term(chain, n, lambda),
        }
    }

    /// Transforms of `C`, `S`, `T` against the scaled resolvents of `A`.
    pub fn transform_relations(&self, lambda: f64) -> Result<TransformResiduals> {
        let point = self.point(lambda)?;
        let r = resolvent(&point, self.engine.generator())?;
        let c = self.family(FamilyKind::Cosine, lambda)?;
        let s = self.family(FamilyKind::Sine, lambda)?;
        let t = self.family(FamilyKind::RiemannLiouville, lambda)?;
        Ok(TransformResiduals {
            lambda,
            cosine: Residual::between(&c, &(&r * point.cosine_scale()), 0.0),
            sine: Residual::between(&s, &(&r * point.sine_scale()), 0.0),
            riemann_liouville: Residual::between(&t, &r, 0.0),
        })
    }

    /// Per-term identities for term `n >= 1`.
    pub fn term_recursion(&self, n: usize, lambda: f64) -> Result<TermRecursionResiduals> {
        if n == 0 {
            return Err(Error::InvalidArgument("term recursion needs n >= 1".into()));
        }
        let point = self.point(lambda)?;
        let r = resolvent(&point, self.engine.generator())?;
        let b = self.engine.perturbation().matrix();
        let rb = &r * b;
        let rb_norm = norm(&rb);
        let br = b * &r;
        let br_n = br.pow(n as u32);
        let s_n = self.term(Chain::Sine, n, lambda)?;
        let s_prev = self.term(Chain::Sine, n - 1, lambda)?;
        let cs_n = self.term(Chain::SineFedCosine, n, lambda)?;
        let c_n = self.term(Chain::Cosine, n, lambda)?;
        let c_prev = self.term(Chain::Cosine, n - 1, lambda)?;
        let closed = &r * &br_n;
        let cscale = point.cosine_scale();
        Ok(TermRecursionResiduals {
            n,
            lambda,
            sine_recursion: Residual::between(
                &s_n,
                &(&rb * &s_prev.value),
                rb_norm * s_prev.error_budget(),
            ),
            sine_closed_form: Residual::between(&s_n, &(&closed * point.sine_scale()), 0.0),
            sine_closed_form_without_scale: Residual::between(&s_n, &closed, 0.0),
            cosine_recursion: Residual::between(
                &cs_n,
                &(&rb * &s_prev.value * cscale),
                cscale * rb_norm * s_prev.error_budget(),
            ),
            cosine_fed_recursion: Residual::between(
                &c_n,
                &(&rb * &c_prev.value),
                rb_norm * c_prev.error_budget(),
            ),
            cosine_fed_closed_form: Residual::between(&c_n, &(&closed * cscale), 0.0),
        })
    }

    /// Summed series against the Neumann and directly inverted resolvents of
    /// `A + B`.
    pub fn perturbed_transforms(&self, lambda: f64) -> Result<PerturbedResiduals> {
        let point = self.point(lambda)?;
        let a = self.engine.generator();
        let b = self.engine.perturbation();
        let (rn, report) = neumann_resolvent(&point, a, b, 1e-14)?;
        let rd = resolvent(&point, &a.add(b)?)?;
        let s = self.series(Chain::Sine, lambda)?;
        let c = self.series(Chain::Cosine, lambda)?;
        let cs = self.series(Chain::SineFedCosine, lambda)?;
        let ss = point.sine_scale();
        let cc = point.cosine_scale();
        Ok(PerturbedResiduals {
            lambda,
            theta: report.theta,
            neumann_terms: report.n_terms,
            sine_neumann: Residual::between(&s, &(&rn * ss), 0.0),
            sine_direct: Residual::between(&s, &(&rd * ss), 0.0),
            cosine_neumann: Residual::between(&c, &(&rn * cc), 0.0),
            cosine_direct: Residual::between(&c, &(&rd * cc), 0.0),
            sine_without_scale: Residual::between(&s, &rn, 0.0),
            sine_fed_cosine: Residual::between(&cs, &(&rn * cc), 0.0),
        })
    }
}

/// `int_0^T_max e^(-lambda t) F(t) dt` for one family kind.
pub fn laplace_of_family(
    kind: LaplaceKind,
    lambda: f64,
    alpha: FractionalOrder,
    a: &GeneratorMatrix,
    b: Option<&GeneratorMatrix>,
    lq: &LaplaceQuadrature,
) -> Result<LaplaceValue> {
    let zero = GeneratorMatrix::zeros(a.dim());
    LaplaceVerifier::new(alpha, a, b.unwrap_or(&zero), lq)?.transform(kind, lambda)
}

/// Transform relations of the unperturbed families under a given bound.
pub fn check_transform_relations(
    lambda: f64,
    alpha: FractionalOrder,
    a: &GeneratorMatrix,
    bound: &ExponentialBound,
    lq: &LaplaceQuadrature,
) -> Result<TransformResiduals> {
    let v = LaplaceVerifier::new(alpha, a, &GeneratorMatrix::zeros(a.dim()), lq)?;
    v.set_bound(*bound);
    v.transform_relations(lambda)
}

pub fn check_term_recursion_transform(
    n: usize,
    lambda: f64,
    alpha: FractionalOrder,
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
    lq: &LaplaceQuadrature,
) -> Result<TermRecursionResiduals> {
    LaplaceVerifier::new(alpha, a, b, lq)?.term_recursion(n, lambda)
}

pub fn check_perturbed_transforms(
    lambda: f64,
    alpha: FractionalOrder,
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
    lq: &LaplaceQuadrature,
) -> Result<PerturbedResiduals> {
    LaplaceVerifier::new(alpha, a, b, lq)?.perturbed_transforms(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;

    fn order(a: f64) -> FractionalOrder {
        FractionalOrder::new(a).unwrap()
    }

    #[test]
    fn zero_generator_transforms() {
        let a = GeneratorMatrix::zeros(1);
        let lq = LaplaceQuadrature::default();
        let v = LaplaceVerifier::new(order(1.5), &a, &a, &lq).unwrap();
        let c = v.family(FamilyKind::Cosine, 2.0).unwrap();
        assert!((c.value[(0, 0)] - 0.5).abs() < 1e-12);
        let s = v.family(FamilyKind::Sine, 2.0).unwrap();
        assert!((s.value[(0, 0)] - 0.25).abs() < 1e-12);
        let t = v.family(FamilyKind::RiemannLiouville, 2.0).unwrap();
        assert!((t.value[(0, 0)] - 2f64.powf(-1.5)).abs() < 1e-12);
        let res = v.transform_relations(2.0).unwrap();
        assert!(res.max() < 1e-12, "{res:?}");
    }

    #[test]
    fn classical_cosine_of_negative_one() {
        let a = GeneratorMatrix::scalar(-1.0);
        let lq = LaplaceQuadrature::default();
        let v = LaplaceVerifier::new(
            FractionalOrder::classical(),
            &a,
            &GeneratorMatrix::zeros(1),
            &lq,
        )
        .unwrap();
        let c = v.family(FamilyKind::Cosine, 1.0).unwrap();
        assert!((c.value[(0, 0)] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn tail_bound_dominates_true_tail() {
        // int_T^inf e^-ct t^(k-1)/Gamma(k) for k = 3, c = 1, T = 20
        let exact = (-20f64).exp() * (1.0 + 20.0 + 200.0);
        let b = g_tail(3.0, 1.0, 20.0);
        assert!(b >= exact && b < 2.0 * exact);
        assert!(g_tail(1.0, 2.0, 20.0) >= (-40f64).exp() / 2.0 * (1.0 - 1e-12));
    }

    #[test]
    fn first_sine_term_transform() {
        let beta = 0.2;
        let alpha = 1.5;
        let a = GeneratorMatrix::zeros(1);
        let b = GeneratorMatrix::scalar(beta);
        let lq = LaplaceQuadrature::default();
        let v = LaplaceVerifier::new(order(alpha), &a, &b, &lq).unwrap();
        let s1 = v.term(Chain::Sine, 1, 2.0).unwrap();
        let exact = beta * 2f64.powf(-alpha) * 0.25;
        assert!(
            (s1.value[(0, 0)] - exact).abs() < 1e-9,
            "{} vs {exact}",
            s1.value[(0, 0)]
        );
        let _ = gamma;
    }

    #[test]
    fn scalar_perturbed_sine_transform() {
        let a = GeneratorMatrix::zeros(1);
        let b = GeneratorMatrix::scalar(0.5);
        let lq = LaplaceQuadrature::default();
        let v = LaplaceVerifier::new(order(1.5), &a, &b, &lq).unwrap();
        let res = v.perturbed_transforms(2.0).unwrap();
        let target = 2f64.powf(-0.5) / (2f64.powf(1.5) - 0.5);
        let s = v.series(Chain::Sine, 2.0).unwrap();
        assert!((s.value[(0, 0)] - target).abs() < 1e-8);
        assert!(res.max() < 1e-8, "{res:?}");
        assert!(res.sine_without_scale.measured > 0.1);
    }

    #[test]
    fn too_small_lambda_is_rejected() {
        let a = GeneratorMatrix::scalar(1.0);
        let lq = LaplaceQuadrature::default();
        let v = LaplaceVerifier::new(
            FractionalOrder::classical(),
            &a,
            &GeneratorMatrix::zeros(1),
            &lq,
        )
        .unwrap();
        assert!(v.family(FamilyKind::Cosine, 0.5).is_err());
        // just above omega the tail cannot be certified at T_max = 20
        assert!(matches!(
            v.family(FamilyKind::Cosine, 1.05),
            Err(Error::TailTooLarge { .. })
        ));
    }
}
