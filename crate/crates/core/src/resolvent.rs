//! Resolvents `R(lambda^a; A) = (lambda^a I - A)^-1` and their Neumann
//! expansion under a bounded perturbation `B`:
//!
//! `R(lambda^a; A + B) = sum_n R(lambda^a; A) [B R(lambda^a; A)]^n`
//!
//! valid whenever `theta = ||B R(lambda^a; A)|| < 1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::ExponentialBound;
use crate::linalg::{inverse_checked, norm, GeneratorMatrix, Matrix};
use crate::special::FractionalOrder;

/// Condition-number cap beyond which `lambda^a` is treated as an eigenvalue.
pub const CONDITION_CAP: f64 = 1e12;

/// A real spectral parameter `lambda > 0` together with `lambda^alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolventPoint {
    pub lambda: f64,
    #[serde(skip)]
    pub alpha: FractionalOrder,
    pub value_lambda_alpha: f64,
}

impl ResolventPoint {
    pub fn new(lambda: f64, alpha: FractionalOrder) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Domain {
                what: "resolvent parameter",
                value: lambda,
            });
        }
        Ok(Self {
            lambda,
            alpha,
            value_lambda_alpha: lambda.powf(alpha.value()),
        })
    }

    /// Like [`ResolventPoint::new`] but also requires `lambda > omega`.
    pub fn above(lambda: f64, alpha: FractionalOrder, bound: &ExponentialBound) -> Result<Self> {
        if !(lambda > bound.omega) {
            return Err(Error::Domain {
                what: "resolvent parameter below growth bound",
                value: lambda,
            });
        }
        Self::new(lambda, alpha)
    }

    /// `lambda^(alpha - 1)`
    pub fn cosine_scale(&self) -> f64 {
        self.lambda.powf(self.alpha.value() - 1.0)
    }

    /// `lambda^(alpha - 2)`
    pub fn sine_scale(&self) -> f64 {
        self.lambda.powf(self.alpha.value() - 2.0)
    }
}

fn shifted(point: &ResolventPoint, m: &Matrix) -> Matrix {
    let d = m.nrows();
    Matrix::identity(d, d) * point.value_lambda_alpha - m
}

/// Direct inverse of `lambda^a I - A` by LU with partial pivoting.
pub fn resolvent(point: &ResolventPoint, a: &GeneratorMatrix) -> Result<Matrix> {
    let m = shifted(point, a.matrix());
    let (inv, _) = inverse_checked(&m, point.value_lambda_alpha, CONDITION_CAP)?;
    Ok(inv)
}

/// Output of a Neumann-series run.
#[derive(Debug, Clone, PartialEq)]
pub struct NeumannReport {
    pub theta: f64,
    pub n_terms: usize,
    pub partial_sums: Vec<Matrix>,
    pub term_norms: Vec<f64>,
    /// `||R(A)|| theta / (1 - theta)`
    pub bound_rhs: f64,
    /// `||R(A)||`
    pub resolvent_norm: f64,
}

const NEUMANN_TERM_CAP: usize = 10_000;

/// `theta = ||B R(lambda^a; A)||`.
pub fn theta(point: &ResolventPoint, a: &GeneratorMatrix, b: &GeneratorMatrix) -> Result<f64> {
    let r = resolvent(point, a)?;
    Ok(norm(&(b.matrix() * r)))
}

/// Perturbed resolvent by Neumann series, accumulated until the next
/// term's norm is below `tol`.
pub fn neumann_resolvent(
    point: &ResolventPoint,
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
    tol: f64,
) -> Result<(Matrix, NeumannReport)> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidArgument("A and B dimensions differ".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let r = resolvent(point, a)?;
    let br = b.matrix() * &r;
    let theta = norm(&br);
    if theta >= 1.0 {
        return Err(Error::HypothesisViolated { theta });
    }
    let r_norm = norm(&r);
    let mut term = r.clone();
    let mut sum = r.clone();
    let mut partial_sums = vec![sum.clone()];
    let mut term_norms = vec![r_norm];
    loop {
        let next = &term * &br;
        let next_norm = norm(&next);
        if next_norm < tol {
            break;
        }
        if partial_sums.len() >= NEUMANN_TERM_CAP {
            return Err(Error::NonConvergence {
                what: "Neumann series",
                terms: NEUMANN_TERM_CAP,
            });
        }
        sum += &next;
        partial_sums.push(sum.clone());
        term_norms.push(next_norm);
        term = next;
    }
    let report = NeumannReport {
        theta,
        n_terms: partial_sums.len(),
        partial_sums,
        term_norms,
        bound_rhs: r_norm * theta / (1.0 - theta),
        resolvent_norm: r_norm,
    };
    Ok((sum, report))
}

/// Measured resolvent difference against its perturbation bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub theta: f64,
}

impl BoundCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs + slack
    }
}

fn difference_and_theta(
    point: &ResolventPoint,
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
) -> Result<(Matrix, Matrix, f64)> {
    let r = resolvent(point, a)?;
    let theta = norm(&(b.matrix() * &r));
    if theta >= 1.0 {
        return Err(Error::HypothesisViolated { theta });
    }
    let perturbed = resolvent(point, &a.add(b)?)?;
    Ok((&perturbed - &r, r, theta))
}

/// `||R(A+B) - R(A)||` (direct inversion) against `||R(A)|| theta / (1 - theta)`.
pub fn lemma_bound_check(
    point: &ResolventPoint,
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
) -> Result<BoundCheck> {
    let (diff, r, theta) = difference_and_theta(point, a, b)?;
    Ok(BoundCheck {
        lhs: norm(&diff),
        rhs: norm(&r) * theta / (1.0 - theta),
        theta,
    })
}

/// The same bound after scaling both resolvents by `lambda^(alpha-1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaledBoundCheck {
    pub check: BoundCheck,
    /// Largest deviation between `lambda^(alpha-1)` times the Neumann
    /// partial sums and `lambda^(alpha-1) R(A+B)`, after the last term.
    pub series_residual: f64,
    pub n_terms: usize,
}

pub fn corollary_scaled_check(
    point: &ResolventPoint,
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
) -> Result<ScaledBoundCheck> {
    let (diff, r, theta) = difference_and_theta(point, a, b)?;
    let scale = point.cosine_scale();
    let check = BoundCheck {
        lhs: scale * norm(&diff),
        rhs: scale * norm(&r) * theta / (1.0 - theta),
        theta,
    };
    let perturbed_scaled = (&r + &diff) * scale;
    let (_, report) = neumann_resolvent(point, a, b, 1e-15 * norm(&r).max(1.0))?;
    let last = report.partial_sums.last().unwrap() * scale;
    Ok(ScaledBoundCheck {
        check,
        series_residual: norm(&(last - perturbed_scaled)),
        n_terms: report.n_terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pt(lambda: f64, alpha: f64) -> ResolventPoint {
        ResolventPoint::new(lambda, FractionalOrder::new(alpha).unwrap()).unwrap()
    }

    #[test]
    fn resolvent_examples() {
        let p = pt(2f64.powf(1.0 / 1.5), 1.5); // lambda^alpha = 2
        let r = resolvent(&p, &GeneratorMatrix::zeros(2)).unwrap();
        assert_relative_eq!(r[(0, 0)], 0.5, max_relative = 1e-14);
        assert_eq!(r[(0, 1)], 0.0);

        let p = pt(2.0, 1.5);
        let r = resolvent(&p, &GeneratorMatrix::scalar(1.0)).unwrap();
        assert_relative_eq!(
            r[(0, 0)],
            1.0 / (2f64.powf(1.5) - 1.0),
            max_relative = 1e-14
        );

        let p = pt(4f64.sqrt(), 2.0);
        let a = GeneratorMatrix::diagonal(&[4.0, 1.0]).unwrap();
        assert!(matches!(resolvent(&p, &a), Err(Error::Singular { .. })));
    }

    #[test]
    fn neumann_examples() {
        let p = pt(1.7, 1.5);
        let a = GeneratorMatrix::from_rows(&[vec![0.2, 0.1], vec![0.1, -0.5]]).unwrap();
        let (sum, rep) = neumann_resolvent(&p, &a, &GeneratorMatrix::zeros(2), 1e-12).unwrap();
        assert_eq!(rep.n_terms, 1);
        assert_eq!(sum, resolvent(&p, &a).unwrap());

        let p = pt(2.0, 1.5);
        let (sum, rep) = neumann_resolvent(
            &p,
            &GeneratorMatrix::scalar(0.3),
            &GeneratorMatrix::scalar(0.9),
            1e-14,
        )
        .unwrap();
        assert!(rep.theta < 1.0);
        assert_relative_eq!(
            sum[(0, 0)],
            1.0 / (2f64.powf(1.5) - 1.2),
            max_relative = 1e-12
        );
        // geometric decay of the terms
        for (n, tn) in rep.term_norms.iter().enumerate() {
            assert!(*tn <= rep.resolvent_norm * rep.theta.powi(n as i32) * (1.0 + 1e-12));
        }

        let big = neumann_resolvent(
            &p,
            &GeneratorMatrix::scalar(0.0),
            &GeneratorMatrix::scalar(3.0),
            1e-12,
        );
        assert!(matches!(big, Err(Error::HypothesisViolated { .. })));
    }

    #[test]
    fn lemma_tight_scalar_case() {
        let p = pt(1.0, 1.5);
        let c = lemma_bound_check(
            &p,
            &GeneratorMatrix::scalar(0.0),
            &GeneratorMatrix::scalar(0.5),
        )
        .unwrap();
        assert_relative_eq!(c.lhs, 1.0, max_relative = 1e-14);
        assert_relative_eq!(c.rhs, 1.0, max_relative = 1e-14);

        let c = lemma_bound_check(
            &p,
            &GeneratorMatrix::scalar(0.1),
            &GeneratorMatrix::zeros(1),
        )
        .unwrap();
        assert_eq!((c.lhs, c.rhs), (0.0, 0.0));
    }

    #[test]
    fn corollary_reduces_at_unit_lambda() {
        let a = GeneratorMatrix::from_rows(&[vec![-0.3, 0.2], vec![0.1, -0.8]]).unwrap();
        let b = GeneratorMatrix::from_rows(&[vec![0.1, -0.05], vec![0.2, 0.1]]).unwrap();
        let p = pt(1.0, 1.5);
        let l = lemma_bound_check(&p, &a, &b).unwrap();
        let c = corollary_scaled_check(&p, &a, &b).unwrap();
        assert_eq!(l, c.check);
        assert!(c.series_residual < 1e-12);
    }
}
