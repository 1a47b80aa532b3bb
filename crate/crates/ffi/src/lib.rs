//! C ABI over `fracpert`.
//!
//! Matrices cross the boundary as opaque handles created from row-major
//! arrays. Every function returns a [`FracpertStatus`]; on failure the
//! message is kept per thread and read with [`fracpert_last_error`].
//! Handles are owned by the caller and released with the matching `_free`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, c_int};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fracpert::series::{Chain, SeriesEngine, TruncationReport};
use fracpert::{
    gamma, ml_scalar, neumann_resolvent, resolvent, Error, Families, FamilyKind, FractionalOrder,
    GeneratorMatrix, Matrix, QuadratureConfig, ResolventPoint,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracpertStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    NonConvergence = 4,
    Singular = 5,
    HypothesisViolated = 6,
    QuadratureStalled = 7,
    TailTooLarge = 8,
    TermCap = 9,
    Panic = 10,
}

/// Which unperturbed family to evaluate.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FracpertFamily {
    Cosine = 0,
    Sine = 1,
    RiemannLiouville = 2,
}

/// Square real matrix.
pub struct FracpertMatrix(Matrix);

/// Perturbed cosine and sine families sampled on a time grid.
pub struct FracpertSeries {
    cosine: Vec<Matrix>,
    sine: Vec<Matrix>,
    cosine_report: TruncationReport,
    sine_report: TruncationReport,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> FracpertStatus {
    match e {
        Error::Domain { .. } => FracpertStatus::Domain,
        Error::NonConvergence { .. } => FracpertStatus::NonConvergence,
        Error::InvalidArgument(_) => FracpertStatus::InvalidArgument,
        Error::Singular { .. } => FracpertStatus::Singular,
        Error::HypothesisViolated { .. } => FracpertStatus::HypothesisViolated,
        Error::QuadratureStalled { .. } => FracpertStatus::QuadratureStalled,
        Error::TailTooLarge { .. } => FracpertStatus::TailTooLarge,
        Error::TermCap { .. } => FracpertStatus::TermCap,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FracpertStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            FracpertStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            FracpertStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            FracpertStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(value);
    Ok(())
}

fn order(alpha: f64) -> Result<FractionalOrder, Fail> {
    Ok(FractionalOrder::new(alpha)?)
}

fn generator(m: &FracpertMatrix) -> Result<GeneratorMatrix, Fail> {
    Ok(GeneratorMatrix::new(m.0.clone())?)
}

fn boxed(m: Matrix) -> *mut FracpertMatrix {
    Box::into_raw(Box::new(FracpertMatrix(m)))
}

/// Copies the last error message of this thread into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn fracpert_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Static, NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn fracpert_status_name(status: c_int) -> *const c_char {
    let s: &'static [u8] = match status {
        0 => b"ok\0",
        1 => b"null_pointer\0",
        2 => b"invalid_argument\0",
        3 => b"domain_error\0",
        4 => b"non_convergence\0",
        5 => b"singular\0",
        6 => b"hypothesis_violated\0",
        7 => b"quadrature_stalled\0",
        8 => b"tail_too_large\0",
        9 => b"term_cap\0",
        10 => b"panic\0",
        _ => b"unknown\0",
    };
    s.as_ptr().cast()
}

/// New `dim x dim` matrix from `dim * dim` row-major values.
///
/// # Safety
/// `values` must point to `dim * dim` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fracpert_matrix_new(
    dim: usize,
    values: *const f64,
    out: *mut *mut FracpertMatrix,
) -> FracpertStatus {
    guard(|| {
        if values.is_null() {
            return Err(Fail::Null("values"));
        }
        if dim == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be positive".into()).into());
        }
        let vals = std::slice::from_raw_parts(values, dim * dim);
        let m = Matrix::from_row_slice(dim, dim, vals);
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("matrix entries must be finite".into()).into());
        }
        write(out, boxed(m), "out")
    })
}

/// # Safety
/// `m` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fracpert_matrix_free(m: *mut FracpertMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Dimension of a matrix, 0 for null.
///
/// # Safety
/// `m` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fracpert_matrix_dim(m: *const FracpertMatrix) -> usize {
    m.as_ref().map_or(0, |m| m.0.nrows())
}

/// Copies the entries row-major into `out`, which holds `len` doubles.
///
/// # Safety
/// `m` must be a live handle and `out` valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fracpert_matrix_read(
    m: *const FracpertMatrix,
    out: *mut f64,
    len: usize,
) -> FracpertStatus {
    guard(|| {
        let m = as_ref(m, "matrix")?;
        if out.is_null() {
            return Err(Fail::Null("out"));
        }
        let d = m.0.nrows();
        if len < d * d {
            return Err(Error::InvalidArgument(format!(
                "buffer holds {len} values, need {}",
                d * d
            ))
            .into());
        }
        let dst = std::slice::from_raw_parts_mut(out, d * d);
        for i in 0..d {
            for j in 0..d {
                dst[i * d + j] = m.0[(i, j)];
            }
        }
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fracpert_gamma(x: f64, out: *mut f64) -> FracpertStatus {
    guard(|| write(out, gamma(x)?, "out"))
}

/// Two-parameter Mittag-Leffler function `E_{a,b}(z)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fracpert_ml_scalar(
    a: f64,
    b: f64,
    z: f64,
    out: *mut f64,
) -> FracpertStatus {
    guard(|| write(out, ml_scalar(a, b, z)?, "out"))
}

/// Unperturbed family of `a` at time `t`.
///
/// # Safety
/// `a` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fracpert_family(
    family: FracpertFamily,
    alpha: f64,
    t: f64,
    a: *const FracpertMatrix,
    out: *mut *mut FracpertMatrix,
) -> FracpertStatus {
    guard(|| {
        let a = generator(as_ref(a, "a")?)?;
        let kind = match family {
            FracpertFamily::Cosine => FamilyKind::Cosine,
            FracpertFamily::Sine => FamilyKind::Sine,
            FracpertFamily::RiemannLiouville => FamilyKind::RiemannLiouville,
        };
        if !(t >= 0.0) {
            return Err(Error::Domain {
                what: "time",
                value: t,
            }
            .into());
        }
        let v = Families::new(order(alpha)?, &a).value(kind, t)?;
        write(out, boxed(v), "out")
    })
}

/// `(lambda^alpha I - a)^-1`.
///
/// # Safety
/// `a` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fracpert_resolvent(
    lambda: f64,
    alpha: f64,
    a: *const FracpertMatrix,
    out: *mut *mut FracpertMatrix,
) -> FracpertStatus {
    guard(|| {
        let a = generator(as_ref(a, "a")?)?;
        let p = ResolventPoint::new(lambda, order(alpha)?)?;
        write(out, boxed(resolvent(&p, &a)?), "out")
    })
}

/// Neumann series for `(lambda^alpha I - a - b)^-1`. `theta` and `n_terms`
/// may be null.
///
/// # Safety
/// Handles must be live; non-null output pointers must be writable.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn fracpert_neumann_resolvent(
    lambda: f64,
    alpha: f64,
    a: *const FracpertMatrix,
    b: *const FracpertMatrix,
    tol: f64,
    out: *mut *mut FracpertMatrix,
    theta: *mut f64,
    n_terms: *mut usize,
) -> FracpertStatus {
    guard(|| {
        let a = generator(as_ref(a, "a")?)?;
        let b = generator(as_ref(b, "b")?)?;
        let p = ResolventPoint::new(lambda, order(alpha)?)?;
        let (r, rep) = neumann_resolvent(&p, &a, &b, tol)?;
        if !theta.is_null() {
            *theta = rep.theta;
        }
        if !n_terms.is_null() {
            *n_terms = rep.n_terms;
        }
        write(out, boxed(r), "out")
    })
}

/// Perturbed families of `a + b` on `n_times` sample times, summed to
/// tolerance `tol` with the default quadrature.
///
/// # Safety
/// `times` must hold `n_times` doubles; handles must be live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fracpert_series_new(
    alpha: f64,
    times: *const f64,
    n_times: usize,
    a: *const FracpertMatrix,
    b: *const FracpertMatrix,
    tol: f64,
    out: *mut *mut FracpertSeries,
) -> FracpertStatus {
    guard(|| {
        if times.is_null() {
            return Err(Fail::Null("times"));
        }
        let a = generator(as_ref(a, "a")?)?;
        let b = generator(as_ref(b, "b")?)?;
        let ts = std::slice::from_raw_parts(times, n_times);
        let engine = SeriesEngine::new(order(alpha)?, ts, &a, &b, &QuadratureConfig::default())?;
        let (cosine, cosine_report) = engine.sum(Chain::Cosine, tol)?;
        let (sine, sine_report) = engine.sum(Chain::Sine, tol)?;
        let s = FracpertSeries {
            cosine,
            sine,
            cosine_report,
            sine_report,
        };
        write(out, Box::into_raw(Box::new(s)), "out")
    })
}

/// # Safety
/// `s` must be null or a live series handle.
#[no_mangle]
pub unsafe extern "C" fn fracpert_series_free(s: *mut FracpertSeries) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of sample times, 0 for null.
///
/// # Safety
/// `s` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fracpert_series_len(s: *const FracpertSeries) -> usize {
    s.as_ref().map_or(0, |s| s.sine.len())
}

/// Terms summed for the cosine and sine families.
///
/// # Safety
/// `s` must be a live handle; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn fracpert_series_terms(
    s: *const FracpertSeries,
    cosine_terms: *mut usize,
    sine_terms: *mut usize,
) -> FracpertStatus {
    guard(|| {
        let s = as_ref(s, "series")?;
        write(cosine_terms, s.cosine_report.n_used, "cosine_terms")?;
        write(sine_terms, s.sine_report.n_used, "sine_terms")
    })
}

unsafe fn series_sample(
    s: *const FracpertSeries,
    index: usize,
    cosine: bool,
    out: *mut *mut FracpertMatrix,
) -> FracpertStatus {
    guard(|| {
        let s = as_ref(s, "series")?;
        let v = if cosine { &s.cosine } else { &s.sine };
        let m = v.get(index).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "sample index {index} out of range ({} samples)",
                v.len()
            ))
        })?;
        write(out, boxed(m.clone()), "out")
    })
}

/// Copy of `C(t_index; A + B)`.
///
/// # Safety
/// `s` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fracpert_series_cosine(
    s: *const FracpertSeries,
    index: usize,
    out: *mut *mut FracpertMatrix,
) -> FracpertStatus {
    series_sample(s, index, true, out)
}

/// Copy of `S(t_index; A + B)`.
///
/// # Safety
/// `s` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fracpert_series_sine(
    s: *const FracpertSeries,
    index: usize,
    out: *mut *mut FracpertMatrix,
) -> FracpertStatus {
    series_sample(s, index, false, out)
}
