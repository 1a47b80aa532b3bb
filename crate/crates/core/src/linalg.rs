//! Small dense matrix helpers. Every operator norm in the crate is the
//! max-row-sum norm.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::special::{gamma_ratio, inv_gamma, MlOptions};

pub type Matrix = DMatrix<f64>;

/// Max-row-sum operator norm.
pub fn norm(m: &Matrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Max-row-sum norm of a row-major `d x d` slice.
pub(crate) fn norm_flat(m: &[f64], d: usize) -> f64 {
    m.chunks_exact(d)
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest entry-wise absolute difference.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn to_flat(m: &Matrix) -> Vec<f64> {
    let d = m.nrows();
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            out[i * d + j] = m[(i, j)];
        }
    }
    out
}

pub(crate) fn from_flat(v: &[f64], d: usize) -> Matrix {
    Matrix::from_row_slice(d, d, v)
}

/// `out += w * a * b` for row-major `d x d` slices.
#[inline]
pub(crate) fn gemm_acc(out: &mut [f64], w: f64, a: &[f64], b: &[f64], d: usize) {
    for i in 0..d {
        let row = &a[i * d..(i + 1) * d];
        let o = &mut out[i * d..(i + 1) * d];
        for (k, &aik) in row.iter().enumerate() {
            let s = w * aik;
            if s == 0.0 {
                continue;
            }
            let brow = &b[k * d..(k + 1) * d];
            for (oj, bj) in o.iter_mut().zip(brow) {
                *oj += s * bj;
            }
        }
    }
}

/// A real square matrix with finite entries, used as a generator `A` or a
/// bounded perturbation `B`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix(Matrix);

/// Bounded perturbations share the representation of generators.
pub type PerturbationMatrix = GeneratorMatrix;

impl GeneratorMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::InvalidArgument(format!(
                "matrix must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(
                "matrix has non-finite entries".into(),
            ));
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument(format!(
                "matrix literal is not square ({d} rows, row lengths {:?})",
                rows.iter().map(Vec::len).collect::<Vec<_>>()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(Matrix::from_row_slice(d, d, &flat))
    }

    pub fn zeros(d: usize) -> Self {
        Self(Matrix::zeros(d, d))
    }

    pub fn scalar(a: f64) -> Self {
        Self(Matrix::from_element(1, 1, a))
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(Matrix::from_diagonal(&nalgebra::DVector::from_row_slice(
            values,
        )))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    pub fn add(&self, other: &GeneratorMatrix) -> Result<GeneratorMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidArgument(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(Self(&self.0 + &other.0))
    }

    /// Exponential growth rate of `E_{alpha,1}(t^alpha A)` as `t -> inf`:
    /// the largest `Re(mu^(1/alpha))` over eigenvalues `mu` in the sector
    /// `|arg mu| < alpha pi / 2`, floored at zero.
    pub fn growth_rate(&self, alpha: f64) -> f64 {
        let eig = self.0.clone().complex_eigenvalues();
        let sector = alpha * std::f64::consts::FRAC_PI_2;
        eig.iter()
            .filter_map(|mu| {
                let r = mu.norm();
                if r == 0.0 {
                    return None;
                }
                let phi = mu.im.atan2(mu.re);
                (phi.abs() < sector).then(|| r.powf(1.0 / alpha) * (phi / alpha).cos())
            })
            .fold(0.0, f64::max)
    }
}

/// Matrix Mittag-Leffler value with its rounding-error estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct MlMatrix {
    pub value: Matrix,
    pub rounding_error: f64,
    pub terms: usize,
}

/// `E_{a,b}(X) = sum_k X^k / Gamma(a k + b)` with default options.
pub fn ml_matrix(a: f64, b: f64, x: &Matrix) -> Result<Matrix> {
    ml_matrix_with(a, b, x, &MlOptions::default()).map(|v| v.value)
}

/// Raw power-series matrix Mittag-Leffler function. The series is cut once
/// the next term's norm drops below `1e-15 (1 + ||sum||)` while terms are
/// decreasing.
pub fn ml_matrix_with(a: f64, b: f64, x: &Matrix, opts: &MlOptions) -> Result<MlMatrix> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Mittag-Leffler parameters must be positive (a = {a}, b = {b})"
        )));
    }
    let d = x.nrows();
    if d != x.ncols() {
        return Err(Error::InvalidArgument(
            "Mittag-Leffler argument must be square".into(),
        ));
    }
    let xn = norm(x);
    if !xn.is_finite() || xn > opts.z_max {
        return Err(Error::Domain {
            what: "matrix Mittag-Leffler argument norm",
            value: xn,
        });
    }
    let xf = to_flat(x);
    let mut term = vec![0.0; d * d];
    let c0 = inv_gamma(b);
    for i in 0..d {
        term[i * d + i] = c0;
    }
    let mut sum = vec![0.0; d * d];
    let mut carry = vec![0.0; d * d];
    let mut next = vec![0.0; d * d];
    let mut magnitude = 0.0;
    let mut term_norm = c0;
    for k in 0..opts.term_cap {
        for ((s, c), &t) in sum.iter_mut().zip(carry.iter_mut()).zip(&term) {
            let u = *s + t;
            if s.abs() >= t.abs() {
                *c += (*s - u) + t;
            } else {
                *c += (t - u) + *s;
            }
            *s = u;
        }
        magnitude += term_norm;
        next.iter_mut().for_each(|v| *v = 0.0);
        let r = gamma_ratio(a * k as f64 + b, a);
        gemm_acc(&mut next, r, &term, &xf, d);
        let next_norm = norm_flat(&next, d);
        let total: Vec<f64> = sum.iter().zip(&carry).map(|(s, c)| s + c).collect();
        let sum_norm = norm_flat(&total, d);
        if next_norm < 1e-15 * (1.0 + sum_norm) && next_norm <= term_norm {
            return Ok(MlMatrix {
                value: from_flat(&total, d),
                rounding_error: 4.0 * d as f64 * f64::EPSILON * magnitude,
                terms: k + 1,
            });
        }
        std::mem::swap(&mut term, &mut next);
        term_norm = next_norm;
    }
    Err(Error::NonConvergence {
        what: "matrix Mittag-Leffler series",
        terms: opts.term_cap,
    })
}

/// Inverse by LU with partial pivoting, refusing matrices whose condition
/// estimate exceeds `cond_cap`. Returns the inverse and the estimate.
pub fn inverse_checked(m: &Matrix, shift_label: f64, cond_cap: f64) -> Result<(Matrix, f64)> {
    let lu = m.clone().lu();
    let inv = lu.try_inverse().ok_or(Error::Singular {
        shift: shift_label,
        condition: f64::INFINITY,
    })?;
    let cond = norm(m) * norm(&inv);
    if !cond.is_finite() || cond > cond_cap {
        return Err(Error::Singular {
            shift: shift_label,
            condition: cond,
        });
    }
    Ok((inv, cond))
}
