//! Gauss-Legendre rules, geometrically graded panel meshes and piecewise
//! Chebyshev interpolation of matrix-valued functions.
//!
//! The families and series terms behave like `t^p F(t^alpha)` near the
//! origin, so meshes are graded geometrically towards 0 and uniform
//! elsewhere.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Discretization controls for every convolution and Laplace integral.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    /// Uniform panels covering `[0, T]`.
    pub panels: usize,
    /// Interpolation nodes per panel; Gauss rules use `nodes_per_panel + 2`.
    pub nodes_per_panel: usize,
    /// Sub-panel split factor used for refinement estimates.
    pub refinement_factor: usize,
    /// Target for the estimated quadrature error.
    pub target_tol: f64,
    /// Geometric levels (ratio 1/2) inside the first uniform panel.
    pub graded_levels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            panels: 4,
            nodes_per_panel: 12,
            refinement_factor: 2,
            target_tol: 1e-10,
            graded_levels: 24,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.panels < 1
            || self.nodes_per_panel < 2
            || self.refinement_factor < 2
            || !(self.target_tol > 0.0)
        {
            return Err(Error::InvalidArgument(format!(
                "invalid quadrature configuration {self:?}"
            )));
        }
        Ok(())
    }

    pub(crate) fn gauss_order(&self) -> usize {
        self.nodes_per_panel + 2
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Composite rule over consecutive breakpoints.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, breaks: &[f64], mut f: F) -> f64 {
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            let mut acc = 0.0;
            for (x, wt) in self.nodes.iter().zip(&self.weights) {
                acc += wt * f(mid + half * x);
            }
            total += half * acc;
        }
        total
    }

    /// Visit every (node, weight) of the composite rule.
    pub fn for_each_node<F: FnMut(f64, f64)>(&self, breaks: &[f64], mut f: F) {
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, wt) in self.nodes.iter().zip(&self.weights) {
                f(mid + half * x, half * wt);
            }
        }
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Breakpoints `0 < h 2^-L < ... < h/2 < h < 2h < ... < T` with `h = T / panels`.
pub fn graded_breaks(t_max: f64, panels: usize, levels: usize) -> Vec<f64> {
    let h = t_max / panels as f64;
    let mut breaks = Vec::with_capacity(panels + levels + 1);
    breaks.push(0.0);
    for k in (1..=levels).rev() {
        breaks.push(h * 0.5f64.powi(k as i32));
    }
    for j in 1..=panels {
        breaks.push(if j == panels { t_max } else { h * j as f64 });
    }
    breaks
}

/// Breakpoints graded towards both ends of `[0, t]`, aligned with `base`.
pub(crate) fn two_sided_breaks(base: &[f64], t: f64) -> Vec<f64> {
    let mut pts: Vec<f64> = Vec::with_capacity(2 * base.len() + 2);
    for &b in base {
        if b < t {
            pts.push(b);
            if b > 0.0 {
                pts.push(t - b);
            }
        }
    }
    pts.push(t);
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let tiny = 1e-15 * t.max(1.0);
    let mut out: Vec<f64> = Vec::with_capacity(pts.len());
    for p in pts {
        match out.last() {
            Some(&last) if p - last <= tiny => {}
            _ => out.push(p),
        }
    }
    if let Some(last) = out.last_mut() {
        *last = t;
    }
    out
}

/// Split every interval into `factor` equal pieces.
pub(crate) fn refine_breaks(breaks: &[f64], factor: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity((breaks.len() - 1) * factor + 1);
    out.push(breaks[0]);
    for w in breaks.windows(2) {
        let step = (w[1] - w[0]) / factor as f64;
        for k in 1..factor {
            out.push(w[0] + step * k as f64);
        }
        out.push(w[1]);
    }
    out
}

/// Piecewise Chebyshev interpolant of a `d x d` matrix function, stored
/// row-major per node.
#[derive(Debug, Clone)]
pub struct PanelInterp {
    breaks: Vec<f64>,
    cheb: Vec<f64>,
    bary: Vec<f64>,
    d: usize,
    values: Vec<f64>,
}

impl PanelInterp {
    /// Nodes at which values must be supplied, in storage order.
    pub fn nodes(breaks: &[f64], p: usize) -> Vec<f64> {
        let cheb = chebyshev_nodes(p);
        let mut out = Vec::with_capacity((breaks.len() - 1) * p);
        for w in breaks.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let half = 0.5 * (w[1] - w[0]);
            out.extend(cheb.iter().map(|x| mid + half * x));
        }
        out
    }

    /// Build from row-major `d x d` values at [`PanelInterp::nodes`].
    pub fn from_values(breaks: Vec<f64>, p: usize, d: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), (breaks.len() - 1) * p * d * d);
        let cheb = chebyshev_nodes(p);
        let bary = (0..p)
            .map(|j| {
                let th = (2 * j + 1) as f64 * PI / (2 * p) as f64;
                if j % 2 == 0 {
                    th.sin()
                } else {
                    -th.sin()
                }
            })
            .collect();
        Self {
            breaks,
            cheb,
            bary,
            d,
            values,
        }
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn t_max(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn nodes_per_panel(&self) -> usize {
        self.cheb.len()
    }

    pub fn node_values(&self) -> &[f64] {
        &self.values
    }

    /// Evaluate at `t` into `out` (length `d*d`). Outside `[0, T]` the
    /// nearest panel polynomial is extrapolated; callers stay inside.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let dd = self.d * self.d;
        let p = self.cheb.len();
        let nb = self.breaks.len();
        let k = match self.breaks[1..nb - 1].binary_search_by(|b| b.partial_cmp(&t).unwrap()) {
            Ok(i) => i + 1,
            Err(i) => i,
        }
        .min(nb - 2);
        let (a, b) = (self.breaks[k], self.breaks[k + 1]);
        let x = (2.0 * t - a - b) / (b - a);
        let base = &self.values[k * p * dd..(k + 1) * p * dd];
        out.iter_mut().for_each(|v| *v = 0.0);
        let mut denom = 0.0;
        for j in 0..p {
            let diff = x - self.cheb[j];
            if diff == 0.0 {
                out.copy_from_slice(&base[j * dd..(j + 1) * dd]);
                return;
            }
            let c = self.bary[j] / diff;
            denom += c;
            for (o, v) in out.iter_mut().zip(&base[j * dd..(j + 1) * dd]) {
                *o += c * v;
            }
        }
        out.iter_mut().for_each(|v| *v /= denom);
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.d * self.d];
        self.eval_into(t, &mut out);
        out
    }
}

fn chebyshev_nodes(p: usize) -> Vec<f64> {
    (0..p)
        .map(|j| -((2 * j + 1) as f64 * PI / (2 * p) as f64).cos())
        .collect()
}
