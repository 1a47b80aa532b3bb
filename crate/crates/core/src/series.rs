//! Perturbation series for the families generated by `A + B`.
//!
//! Every term is an iterated convolution of a kernel family of `A` against
//! `B` times the previous term:
//!
//! * sine terms: `S_n(t) = int_0^t T(t-s) B S_{n-1}(s) ds`, `S_0 = S`
//! * cosine terms, cosine-fed: `C_n(t) = int_0^t T(t-s) B C_{n-1}(s) ds`,
//!   `C_0 = C`. Their sum is `E_{a,1}(t^a (A+B))` for every order.
//! * cosine terms, sine-fed: `C_n(t) = int_0^t C(t-s) B S_{n-1}(s) ds`.
//!   This is the classical recursion; for `alpha < 2` its sum differs from
//!   the cosine family of `A + B` and is kept for the bound checks that
//!   are stated in terms of it.
//! * classical (`alpha = 2`) chains use the sine family `S` as kernel in
//!   place of `T`.
//!
//! Terms live on a panel mesh over `[0, max t_grid]` (graded towards 0) as
//! piecewise Chebyshev interpolants; each convolution is a composite
//! Gauss-Legendre rule on breakpoints graded towards both ends of `[0, t]`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{estimate_exponential_bound_with, ExponentialBound, Families, FamilyKind};
use crate::linalg::{from_flat, gemm_acc, norm, norm_flat, to_flat, GeneratorMatrix, Matrix};
use crate::quadrature::{
    graded_breaks, refine_breaks, two_sided_breaks, GaussLegendre, PanelInterp, QuadratureConfig,
};
use crate::special::{g, ml_scalar_with, FractionalOrder, MlOptions};

/// Environment variable overriding [`DEFAULT_TERM_CAP`].
pub const TERM_CAP_ENV: &str = "FRACPERT_TERM_CAP";
pub const DEFAULT_TERM_CAP: usize = 60;

/// Family used as the convolution kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFamily {
    Cosine,
    RiemannLiouville,
    /// Only meaningful at `alpha = 2`, where it coincides with `T`.
    Sine,
}

/// Which previous term feeds a cosine term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CosineFeed {
    Sine,
    Cosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Sine,
    Cosine(CosineFeed),
}

/// A recursion chain of series terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Chain {
    Sine,
    Cosine,
    SineFedCosine,
    ClassicalSine,
    ClassicalCosine,
}

impl Chain {
    fn kernel(self) -> KernelFamily {
        match self {
            Chain::Sine | Chain::Cosine => KernelFamily::RiemannLiouville,
            Chain::SineFedCosine | Chain::ClassicalCosine => KernelFamily::Cosine,
            Chain::ClassicalSine => KernelFamily::Sine,
        }
    }

    fn feed(self) -> Chain {
        match self {
            Chain::Sine | Chain::SineFedCosine => Chain::Sine,
            Chain::Cosine => Chain::Cosine,
            Chain::ClassicalSine | Chain::ClassicalCosine => Chain::ClassicalSine,
        }
    }

    fn base(self) -> FamilyKind {
        match self {
            Chain::Sine | Chain::ClassicalSine => FamilyKind::Sine,
            _ => FamilyKind::Cosine,
        }
    }

    pub fn kind(self) -> TermKind {
        match self {
            Chain::Sine | Chain::ClassicalSine => TermKind::Sine,
            Chain::Cosine => TermKind::Cosine(CosineFeed::Cosine),
            Chain::SineFedCosine | Chain::ClassicalCosine => TermKind::Cosine(CosineFeed::Sine),
        }
    }

    fn is_classical(self) -> bool {
        matches!(self, Chain::ClassicalSine | Chain::ClassicalCosine)
    }
}

/// Order `k` of `g_k` in the term bound `M^(n+1) ||B||^n e^(wt) g_k(t)`.
pub fn bound_order(kind: TermKind, alpha: f64, n: usize) -> f64 {
    let n = n as f64;
    match kind {
        TermKind::Sine => n * alpha + 2.0,
        TermKind::Cosine(CosineFeed::Cosine) => n * alpha + 1.0,
        TermKind::Cosine(CosineFeed::Sine) if n == 0.0 => 1.0,
        TermKind::Cosine(CosineFeed::Sine) => (n - 1.0) * alpha + 3.0,
    }
}

/// Induction bound `M^(n+1) ||B||^n e^(omega t) g_k(t)` for term `n`.
pub fn term_bound(
    kind: TermKind,
    alpha: f64,
    n: usize,
    bound: &ExponentialBound,
    b_norm: f64,
    t: f64,
) -> f64 {
    let k = bound_order(kind, alpha, n);
    let coeff = bound.m.powi(n as i32 + 1) * b_norm.powi(n as i32);
    if coeff == 0.0 {
        return 0.0;
    }
    coeff * (bound.omega * t).exp() * g(k, t)
}

/// One term of a perturbation series.
#[derive(Debug, Clone)]
pub struct SeriesTerm {
    pub n: usize,
    pub kind: TermKind,
    pub t_grid: Vec<f64>,
    pub values: Vec<Matrix>,
    pub term_norm: Vec<f64>,
    /// Refinement estimate of the convolution quadrature error.
    pub quadrature_error: f64,
    /// Largest deviation of the mesh interpolant from direct quadrature at
    /// panel midpoints.
    pub interpolation_error: f64,
    pub(crate) profile: PanelInterp,
}

impl SeriesTerm {
    /// Interpolated value anywhere in `[0, max t_grid]`.
    pub fn value_at(&self, t: f64) -> Matrix {
        let d = self.profile.dim();
        from_flat(&self.profile.eval(t.max(0.0)), d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ToleranceMet,
    TermCap,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationReport {
    /// Number of terms summed (indices `0..n_used`).
    pub n_used: usize,
    /// Per term, the largest norm over the output grid.
    pub per_term_norms: Vec<f64>,
    /// Per term, the largest induction bound over the output grid.
    pub majorant_values: Vec<f64>,
    /// Majorant tail beyond the last summed term at the largest grid time.
    pub tail_bound: f64,
    pub stop_reason: StopReason,
    pub quadrature_error: f64,
    pub interpolation_error: f64,
    pub bound: ExponentialBound,
}

struct KernelTable {
    interp: PanelInterp,
    power: f64,
    interpolation_error: f64,
}

/// Term cap from the environment override or the default.
pub fn term_cap_from_env() -> usize {
    std::env::var(TERM_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
        .unwrap_or(DEFAULT_TERM_CAP)
}

/// Shared state for computing and caching series terms of one problem.
pub struct SeriesEngine {
    alpha: FractionalOrder,
    a: GeneratorMatrix,
    b: GeneratorMatrix,
    b_flat: Vec<f64>,
    quad: QuadratureConfig,
    opts: MlOptions,
    t_grid: Vec<f64>,
    breaks: Vec<f64>,
    nodes: Vec<f64>,
    gl: GaussLegendre,
    term_cap: usize,
    bound: RefCell<Option<ExponentialBound>>,
    kernels: RefCell<HashMap<KernelFamily, Rc<KernelTable>>>,
    terms: RefCell<HashMap<(Chain, usize), Rc<SeriesTerm>>>,
}

impl SeriesEngine {
    pub fn new(
        alpha: FractionalOrder,
        t_grid: &[f64],
        a: &GeneratorMatrix,
        b: &GeneratorMatrix,
        quad: &QuadratureConfig,
    ) -> Result<Self> {
        Self::with_options(alpha, t_grid, a, b, quad, MlOptions::default())
    }

    pub fn with_options(
        alpha: FractionalOrder,
        t_grid: &[f64],
        a: &GeneratorMatrix,
        b: &GeneratorMatrix,
        quad: &QuadratureConfig,
        opts: MlOptions,
    ) -> Result<Self> {
        quad.validate()?;
        if a.dim() != b.dim() {
            return Err(Error::InvalidArgument(format!(
                "A is {}x{} but B is {}x{}",
                a.dim(),
                a.dim(),
                b.dim(),
                b.dim()
            )));
        }
        if t_grid.is_empty() || t_grid.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
            return Err(Error::InvalidArgument(
                "time grid must be non-empty and non-negative".into(),
            ));
        }
        let t_max = t_grid.iter().copied().fold(0.0, f64::max);
        let t_max = if t_max > 0.0 { t_max } else { 1.0 };
        let breaks = graded_breaks(t_max, quad.panels, quad.graded_levels);
        let nodes = PanelInterp::nodes(&breaks, quad.nodes_per_panel);
        Ok(Self {
            alpha,
            a: a.clone(),
            b: b.clone(),
            b_flat: to_flat(b.matrix()),
            quad: *quad,
            opts,
            t_grid: t_grid.to_vec(),
            breaks,
            nodes,
            gl: GaussLegendre::new(quad.gauss_order()),
            term_cap: term_cap_from_env(),
            bound: RefCell::new(None),
            kernels: RefCell::new(HashMap::new()),
            terms: RefCell::new(HashMap::new()),
        })
    }

    pub fn set_term_cap(&mut self, cap: usize) {
        self.term_cap = cap.max(1);
    }

    pub fn term_cap(&self) -> usize {
        self.term_cap
    }

    pub fn alpha(&self) -> FractionalOrder {
        self.alpha
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn t_max(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn b_norm(&self) -> f64 {
        self.b.norm()
    }

    pub fn generator(&self) -> &GeneratorMatrix {
        &self.a
    }

    pub fn perturbation(&self) -> &GeneratorMatrix {
        &self.b
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.quad
    }

    pub fn families(&self) -> Families<'_> {
        Families::with_options(self.alpha, &self.a, self.opts)
    }

    fn d(&self) -> usize {
        self.a.dim()
    }

    /// `(M, omega)` estimated on the mesh nodes and output grid.
    pub fn bound(&self) -> Result<ExponentialBound> {
        if let Some(b) = *self.bound.borrow() {
            return Ok(b);
        }
        let mut grid = self.nodes.clone();
        grid.extend_from_slice(&self.t_grid);
        grid.extend_from_slice(&self.breaks);
        let b = estimate_exponential_bound_with(&self.families(), &grid)?;
        *self.bound.borrow_mut() = Some(b);
        Ok(b)
    }

    /// Override the governing bound used by truncation and majorants.
    pub fn set_bound(&self, bound: ExponentialBound) {
        *self.bound.borrow_mut() = Some(bound);
    }

    fn kernel(&self, kind: KernelFamily) -> Result<Rc<KernelTable>> {
        if let Some(k) = self.kernels.borrow().get(&kind) {
            return Ok(k.clone());
        }
        let alpha = self.alpha.value();
        let (b_param, power) = match kind {
            KernelFamily::Cosine => (1.0, 0.0),
            KernelFamily::RiemannLiouville => (alpha, alpha - 1.0),
            KernelFamily::Sine => (2.0, 1.0),
        };
        let fam = self.families();
        let d = self.d();
        let p = self.quad.nodes_per_panel;
        let mut values = Vec::with_capacity(self.nodes.len() * d * d);
        for &u in &self.nodes {
            values.extend(to_flat(&fam.ml_factor(b_param, u)?));
        }
        let interp = PanelInterp::from_values(self.breaks.clone(), p, d, values);
        let mut err: f64 = 0.0;
        for w in self.breaks.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let exact = to_flat(&fam.ml_factor(b_param, mid)?);
            let approx = interp.eval(mid);
            let diff: Vec<f64> = exact.iter().zip(&approx).map(|(x, y)| x - y).collect();
            err = err.max(norm_flat(&diff, d) * mid.powf(power));
        }
        let table = Rc::new(KernelTable {
            interp,
            power,
            interpolation_error: err,
        });
        self.kernels.borrow_mut().insert(kind, table.clone());
        Ok(table)
    }

    /// Interpolation error of the kernel tables built so far.
    pub fn kernel_interpolation_error(&self) -> f64 {
        self.kernels
            .borrow()
            .values()
            .map(|k| k.interpolation_error)
            .fold(0.0, f64::max)
    }

    fn base_term(&self, chain: Chain) -> Result<SeriesTerm> {
        let fam = self.families();
        let kind = chain.base();
        let d = self.d();
        let mut values = Vec::with_capacity(self.nodes.len() * d * d);
        for &t in &self.nodes {
            values.extend(to_flat(&fam.value(kind, t)?));
        }
        let profile =
            PanelInterp::from_values(self.breaks.clone(), self.quad.nodes_per_panel, d, values);
        let grid_values: Vec<Matrix> = self
            .t_grid
            .iter()
            .map(|&t| fam.value(kind, t))
            .collect::<Result<_>>()?;
        Ok(SeriesTerm {
            n: 0,
            kind: chain.kind(),
            t_grid: self.t_grid.clone(),
            term_norm: grid_values.iter().map(norm).collect(),
            values: grid_values,
            quadrature_error: 0.0,
            interpolation_error: 0.0,
            profile,
        })
    }

    /// `int_0^t K(t-s) G(s) ds` with `K` from a kernel table and `G` an
    /// interpolated feed, on the two-sided graded breakpoints refined
    /// `level` times.
    fn convolve_at(
        &self,
        kernel: &KernelTable,
        feed: &PanelInterp,
        t: f64,
        level: usize,
    ) -> Vec<f64> {
        let d = self.d();
        let dd = d * d;
        let mut out = vec![0.0; dd];
        if t <= 0.0 {
            return out;
        }
        let mut breaks = two_sided_breaks(&self.breaks, t);
        for _ in 0..level {
            breaks = refine_breaks(&breaks, self.quad.refinement_factor);
        }
        let mut kbuf = vec![0.0; dd];
        let mut gbuf = vec![0.0; dd];
        let power = kernel.power;
        self.gl.for_each_node(&breaks, |s, w| {
            let u = t - s;
            kernel.interp.eval_into(u, &mut kbuf);
            feed.eval_into(s, &mut gbuf);
            let scale = if power == 0.0 { w } else { w * u.powf(power) };
            gemm_acc(&mut out, scale, &kbuf, &gbuf, d);
        });
        out
    }

    /// Next term of a recursion from `prev` using the given kernel family.
    pub fn convolve(&self, kernel: KernelFamily, prev: &SeriesTerm) -> Result<SeriesTerm> {
        let kind = match (kernel, prev.kind) {
            (KernelFamily::RiemannLiouville, TermKind::Sine) => TermKind::Sine,
            (KernelFamily::RiemannLiouville, TermKind::Cosine(CosineFeed::Cosine)) => {
                TermKind::Cosine(CosineFeed::Cosine)
            }
            (KernelFamily::Cosine, TermKind::Sine) => TermKind::Cosine(CosineFeed::Sine),
            (KernelFamily::Sine, TermKind::Sine) if self.alpha.is_classical() => TermKind::Sine,
            (k, p) => {
                return Err(Error::InvalidArgument(format!(
                    "kernel {k:?} cannot be applied to a {p:?} term at order {}",
                    self.alpha.value()
                )))
            }
        };
        if prev.profile.breaks() != self.breaks.as_slice() || prev.profile.dim() != self.d() {
            return Err(Error::InvalidArgument(
                "previous term was computed on a different mesh".into(),
            ));
        }
        let table = self.kernel(kernel)?;
        let d = self.d();
        let dd = d * d;
        // feed G = B * prev on the mesh nodes
        let mut feed_vals = vec![0.0; prev.profile.node_values().len()];
        for (dst, src) in feed_vals
            .chunks_exact_mut(dd)
            .zip(prev.profile.node_values().chunks_exact(dd))
        {
            gemm_acc(dst, 1.0, &self.b_flat, src, d);
        }
        let feed =
            PanelInterp::from_values(self.breaks.clone(), self.quad.nodes_per_panel, d, feed_vals);

        // refinement estimate at the right end of every panel
        let p = self.quad.nodes_per_panel;
        let checks: Vec<f64> = (1..self.breaks.len())
            .map(|k| self.nodes[k * p - 1])
            .collect();
        let mut level = 0;
        let mut estimate;
        let mut last = f64::INFINITY;
        loop {
            estimate = 0.0f64;
            let mut scale = 1.0f64;
            for &t in &checks {
                let coarse = self.convolve_at(&table, &feed, t, level);
                let fine = self.convolve_at(&table, &feed, t, level + 1);
                let diff: Vec<f64> = coarse.iter().zip(&fine).map(|(x, y)| x - y).collect();
                estimate = estimate.max(norm_flat(&diff, d));
                scale = scale.max(norm_flat(&fine, d));
            }
            // absolute below unit size, relative above
            if estimate <= self.quad.target_tol * scale {
                break;
            }
            if estimate >= last || level >= 3 {
                return Err(Error::QuadratureStalled {
                    estimate,
                    target: self.quad.target_tol,
                });
            }
            last = estimate;
            level += 1;
        }

        let mut values = Vec::with_capacity(self.nodes.len() * dd);
        for &t in &self.nodes {
            values.extend(self.convolve_at(&table, &feed, t, level));
        }
        let profile = PanelInterp::from_values(self.breaks.clone(), p, d, values);
        let mut interpolation_error: f64 = 0.0;
        for w in self.breaks.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let direct = self.convolve_at(&table, &feed, mid, level);
            let interp = profile.eval(mid);
            let diff: Vec<f64> = direct.iter().zip(&interp).map(|(x, y)| x - y).collect();
            interpolation_error = interpolation_error.max(norm_flat(&diff, d));
        }
        let values: Vec<Matrix> = self
            .t_grid
            .iter()
            .map(|&t| from_flat(&self.convolve_at(&table, &feed, t, level), d))
            .collect();
        Ok(SeriesTerm {
            n: prev.n + 1,
            kind,
            t_grid: self.t_grid.clone(),
            term_norm: values.iter().map(norm).collect(),
            values,
            quadrature_error: estimate,
            interpolation_error,
            profile,
        })
    }

    /// Term `n` of a chain, computed recursively and cached.
    pub fn term(&self, chain: Chain, n: usize) -> Result<Rc<SeriesTerm>> {
        if chain.is_classical() && !self.alpha.is_classical() {
            return Err(Error::InvalidArgument(
                "classical chains require alpha = 2".into(),
            ));
        }
        if let Some(t) = self.terms.borrow().get(&(chain, n)) {
            return Ok(t.clone());
        }
        let term = if n == 0 {
            self.base_term(chain)?
        } else {
            let prev = self.term(chain.feed(), n - 1)?;
            self.convolve(chain.kernel(), &prev)?
        };
        let term = Rc::new(term);
        self.terms.borrow_mut().insert((chain, n), term.clone());
        Ok(term)
    }

    /// Bound for term `n` of `chain` at time `t`.
    pub fn term_bound(&self, chain: Chain, n: usize, t: f64) -> Result<f64> {
        Ok(term_bound(
            chain.kind(),
            self.alpha.value(),
            n,
            &self.bound()?,
            self.b_norm(),
            t,
        ))
    }

    /// Smallest `N` with majorant tail `sum_{n > N} bound_n(t) < tol`, where
    /// `t` is the largest grid time. Returns `(N, tail)`.
    pub fn truncation_index(&self, chain: Chain, tol: f64) -> Result<(usize, f64, StopReason)> {
        let t = self.t_max();
        let bounds = self.majorant_terms(chain, t)?;
        for n in 0..self.term_cap {
            let tail: f64 = bounds[n + 1..].iter().sum();
            if tail < tol {
                return Ok((n, tail, StopReason::ToleranceMet));
            }
        }
        let n = self.term_cap - 1;
        Ok((n, bounds[n + 1..].iter().sum(), StopReason::TermCap))
    }

    fn majorant_terms(&self, chain: Chain, t: f64) -> Result<Vec<f64>> {
        // enough extra terms that the neglected remainder is far below tol
        let mut out = Vec::with_capacity(self.term_cap + 64);
        let mut n = 0;
        loop {
            let v = self.term_bound(chain, n, t)?;
            out.push(v);
            n += 1;
            if n > self.term_cap + 1 {
                let len = out.len();
                let last = out[len - 1];
                if last == 0.0 || (last < 1e-30 && last <= out[len - 2]) || n > self.term_cap + 400
                {
                    break;
                }
            }
        }
        Ok(out)
    }

    /// Sum of a chain truncated from its majorant tail.
    pub fn sum(&self, chain: Chain, tol: f64) -> Result<(Vec<Matrix>, TruncationReport)> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        let (n_max, tail, stop) = self.truncation_index(chain, tol)?;
        if stop == StopReason::TermCap {
            return Err(Error::TermCap {
                terms: self.term_cap,
                tail,
            });
        }
        self.sum_terms(chain, n_max + 1, tail, stop)
    }

    /// Sum of the first `n_terms` terms of a chain.
    pub fn sum_terms(
        &self,
        chain: Chain,
        n_terms: usize,
        tail_bound: f64,
        stop_reason: StopReason,
    ) -> Result<(Vec<Matrix>, TruncationReport)> {
        let d = self.d();
        let bound = self.bound()?;
        let mut sums = vec![Matrix::zeros(d, d); self.t_grid.len()];
        let mut per_term_norms = Vec::with_capacity(n_terms);
        let mut majorant_values = Vec::with_capacity(n_terms);
        let mut quadrature_error: f64 = 0.0;
        let mut interpolation_error: f64 = 0.0;
        for n in 0..n_terms {
            let term = self.term(chain, n)?;
            for (s, v) in sums.iter_mut().zip(&term.values) {
                *s += v;
            }
            per_term_norms.push(term.term_norm.iter().copied().fold(0.0, f64::max));
            let maj = self
                .t_grid
                .iter()
                .map(|&t| {
                    term_bound(
                        chain.kind(),
                        self.alpha.value(),
                        n,
                        &bound,
                        self.b_norm(),
                        t,
                    )
                })
                .fold(0.0, f64::max);
            majorant_values.push(maj);
            quadrature_error = quadrature_error.max(term.quadrature_error);
            interpolation_error = interpolation_error.max(term.interpolation_error);
        }
        Ok((
            sums,
            TruncationReport {
                n_used: n_terms,
                per_term_norms,
                majorant_values,
                tail_bound,
                stop_reason,
                quadrature_error,
                interpolation_error,
                bound,
            },
        ))
    }

    /// Interpolated partial sum of a chain at an arbitrary time.
    pub fn partial_sum_at(&self, chain: Chain, n_terms: usize, t: f64) -> Result<Matrix> {
        let d = self.d();
        let mut acc = Matrix::zeros(d, d);
        for n in 0..n_terms {
            acc += self.term(chain, n)?.value_at(t);
        }
        Ok(acc)
    }
}

/// Next series term: `kernel` family of `A` convolved with `B prev`.
pub fn convolve_family(
    kernel: KernelFamily,
    alpha: FractionalOrder,
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
    prev: &SeriesTerm,
    quad: &QuadratureConfig,
) -> Result<SeriesTerm> {
    let engine = SeriesEngine::new(alpha, &prev.t_grid, a, b, quad)?;
    engine.convolve(kernel, prev)
}

/// Unperturbed term `n = 0` of the requested kind on `t_grid`.
pub fn base_term(
    kind: TermKind,
    alpha: FractionalOrder,
    t_grid: &[f64],
    a: &GeneratorMatrix,
    quad: &QuadratureConfig,
) -> Result<SeriesTerm> {
    let zero = GeneratorMatrix::zeros(a.dim());
    let engine = SeriesEngine::new(alpha, t_grid, a, &zero, quad)?;
    let chain = match kind {
        TermKind::Sine => Chain::Sine,
        TermKind::Cosine(CosineFeed::Cosine) => Chain::Cosine,
        TermKind::Cosine(CosineFeed::Sine) => Chain::SineFedCosine,
    };
    engine.base_term(chain)
}

/// `C(t; A + B)` on `t_grid` from the cosine-fed series.
pub fn perturbed_cosine(
    alpha: FractionalOrder,
    t_grid: &[f64],
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
    tol: f64,
    quad: &QuadratureConfig,
) -> Result<(Vec<Matrix>, TruncationReport)> {
    SeriesEngine::new(alpha, t_grid, a, b, quad)?.sum(Chain::Cosine, tol)
}

/// `S(t; A + B)` on `t_grid` from the sine series.
pub fn perturbed_sine(
    alpha: FractionalOrder,
    t_grid: &[f64],
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
    tol: f64,
    quad: &QuadratureConfig,
) -> Result<(Vec<Matrix>, TruncationReport)> {
    SeriesEngine::new(alpha, t_grid, a, b, quad)?.sum(Chain::Sine, tol)
}

/// Classical (`alpha = 2`) perturbed cosine and sine with the sine family
/// as convolution kernel.
pub fn classical_perturbed_families(
    t_grid: &[f64],
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
    tol: f64,
    quad: &QuadratureConfig,
) -> Result<(Vec<Matrix>, Vec<Matrix>)> {
    let engine = SeriesEngine::new(FractionalOrder::classical(), t_grid, a, b, quad)?;
    let (c, _) = engine.sum(Chain::ClassicalCosine, tol)?;
    let (s, _) = engine.sum(Chain::ClassicalSine, tol)?;
    Ok((c, s))
}

/// `bound - ||term(t)||` per grid point for the term's induction bound.
pub fn induction_bound_check(
    alpha: FractionalOrder,
    term: &SeriesTerm,
    bound: &ExponentialBound,
    b_norm: f64,
) -> Vec<f64> {
    term.t_grid
        .iter()
        .zip(&term.term_norm)
        .map(|(&t, &nrm)| term_bound(term.kind, alpha.value(), term.n, bound, b_norm, t) - nrm)
        .collect()
}

/// Mild solution `v(t) = C(t; A+B) v0 + S(t; A+B) v1`.
#[allow(clippy::too_many_arguments)]
pub fn solve_cauchy(
    alpha: FractionalOrder,
    t_grid: &[f64],
    a: &GeneratorMatrix,
    b: &GeneratorMatrix,
    v0: &DVector<f64>,
    v1: &DVector<f64>,
    tol: f64,
    quad: &QuadratureConfig,
) -> Result<Vec<DVector<f64>>> {
    if v0.len() != a.dim() || v1.len() != a.dim() {
        return Err(Error::InvalidArgument(
            "initial data dimension mismatch".into(),
        ));
    }
    let engine = SeriesEngine::new(alpha, t_grid, a, b, quad)?;
    let (c, _) = engine.sum(Chain::Cosine, tol)?;
    let (s, _) = engine.sum(Chain::Sine, tol)?;
    Ok(c.iter().zip(&s).map(|(c, s)| c * v0 + s * v1).collect())
}

/// Per-time majorant comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorantRow {
    pub t: f64,
    pub sine_norm: f64,
    /// `M e^(wt) t E_{a,2}(M ||B|| t^a)`
    pub sine_majorant: f64,
    pub cosine_norm: f64,
    /// `M e^(wt) t^(2-a) E_{a,3-a}(M ||B|| t^a)` as stated for the cosine family.
    pub stated_cosine_majorant: f64,
    /// `M e^(wt) E_{a,1}(M ||B|| t^a)`, the bound implied by the cosine-fed terms.
    pub cosine_majorant: f64,
    /// Norm of the sine-fed cosine series sum, when supplied.
    pub sine_fed_cosine_norm: Option<f64>,
    /// `M e^(wt) (1 + M ||B|| t^2 E_{a,3}(M ||B|| t^a))`, the sum of the
    /// sine-fed term bounds.
    pub corrected_cosine_majorant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorantReport {
    pub rows: Vec<MajorantRow>,
    pub min_sine_slack: f64,
    pub min_cosine_slack: f64,
    pub min_corrected_slack: Option<f64>,
    /// Smallest slack of the stated cosine majorant; informational.
    pub min_stated_cosine_slack: f64,
    pub stated_cosine_violations: Vec<f64>,
}

impl MajorantReport {
    pub fn asserted_hold(&self, slack: f64) -> bool {
        self.min_sine_slack >= -slack
            && self.min_cosine_slack >= -slack
            && self.min_corrected_slack.is_none_or(|s| s >= -slack)
    }
}

/// Compare computed perturbed families with their Mittag-Leffler majorants.
pub fn majorant_check(
    alpha: FractionalOrder,
    t_grid: &[f64],
    b_norm: f64,
    bound: &ExponentialBound,
    sine: &[Matrix],
    cosine: &[Matrix],
    sine_fed_cosine: Option<&[Matrix]>,
) -> Result<MajorantReport> {
    if sine.len() != t_grid.len() || cosine.len() != t_grid.len() {
        return Err(Error::InvalidArgument(
            "family samples do not match the grid".into(),
        ));
    }
    let al = alpha.value();
    let x = bound.m * b_norm;
    let opts = MlOptions::default();
    let ml = |b: f64, z: f64| ml_scalar_with(al, b, z, &opts).map(|v| v.value);
    let mut rows = Vec::with_capacity(t_grid.len());
    for (i, &t) in t_grid.iter().enumerate() {
        let growth = bound.at(t);
        let z = x * t.powf(al);
        rows.push(MajorantRow {
            t,
            sine_norm: norm(&sine[i]),
            sine_majorant: growth * t * ml(2.0, z)?,
            cosine_norm: norm(&cosine[i]),
            stated_cosine_majorant: growth * t.powf(2.0 - al) * ml(3.0 - al, z)?,
            cosine_majorant: growth * ml(1.0, z)?,
            sine_fed_cosine_norm: sine_fed_cosine.map(|c| norm(&c[i])),
            corrected_cosine_majorant: growth * (1.0 + x * t * t * ml(3.0, z)?),
        });
    }
    let min = |f: &dyn Fn(&MajorantRow) -> f64| rows.iter().map(f).fold(f64::INFINITY, f64::min);
    let min_sine_slack = min(&|r| r.sine_majorant - r.sine_norm);
    let min_cosine_slack = min(&|r| r.cosine_majorant - r.cosine_norm);
    let min_stated_cosine_slack = min(&|r| r.stated_cosine_majorant - r.cosine_norm);
    let min_corrected_slack = sine_fed_cosine
        .map(|_| min(&|r| r.corrected_cosine_majorant - r.sine_fed_cosine_norm.unwrap()));
    let stated_cosine_violations = rows
        .iter()
        .filter(|r| r.stated_cosine_majorant < r.cosine_norm)
        .map(|r| r.t)
        .collect();
    Ok(MajorantReport {
        rows,
        min_sine_slack,
        min_cosine_slack,
        min_corrected_slack,
        min_stated_cosine_slack,
        stated_cosine_violations,
    })
}
