//! Problem definitions read from TOML, and the seeded matrix builders they
//! can refer to.

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::laplace::LaplaceQuadrature;
use crate::linalg::{norm, GeneratorMatrix, Matrix};
use crate::quadrature::QuadratureConfig;
use crate::special::FractionalOrder;

/// Spec shipped with the binary and used when `--spec` is omitted.
pub const DEFAULT_SPEC: &str = include_str!("../specs/default.toml");

/// Matrix given as rows, or by a named builder.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Rows(Vec<Vec<f64>>),
    Builder(MatrixBuilder),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixBuilder {
    /// `scale * tridiag(1, -2, 1)`
    Laplacian {
        dim: usize,
        scale: f64,
    },
    Diagonal {
        values: Vec<f64>,
    },
    Zero {
        dim: usize,
    },
    /// Symmetric with the given spectral radius.
    RandomSymmetric {
        dim: usize,
        spectral_radius: f64,
    },
    /// Uniform entries rescaled to the given max-row-sum norm.
    Random {
        dim: usize,
        norm: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    /// Number of intervals; the grid has `steps + 1` points.
    pub steps: usize,
}

impl TimeGrid {
    pub fn points(&self) -> Vec<f64> {
        let h = (self.stop - self.start) / self.steps as f64;
        (0..=self.steps)
            .map(|k| {
                if k == self.steps {
                    self.stop
                } else {
                    self.start + h * k as f64
                }
            })
            .collect()
    }
}

fn default_tol() -> f64 {
    1e-8
}

/// Raw spec as written in the file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub alpha: f64,
    #[serde(rename = "A")]
    pub a: MatrixSpec,
    #[serde(rename = "B")]
    pub b: MatrixSpec,
    pub t_grid: TimeGrid,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub quad: QuadratureConfig,
    #[serde(default)]
    pub laplace: LaplaceQuadrature,
    /// Laplace parameters; by default `omega + {1, 2, 5}`.
    #[serde(default)]
    pub lambda_list: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    pub v0: Option<Vec<f64>>,
    pub v1: Option<Vec<f64>>,
}

/// Validated problem with matrices built.
#[derive(Debug, Clone)]
pub struct Problem {
    pub alpha: FractionalOrder,
    pub a: GeneratorMatrix,
    pub b: GeneratorMatrix,
    pub t_grid: Vec<f64>,
    pub tol: f64,
    pub quad: QuadratureConfig,
    pub laplace: LaplaceQuadrature,
    pub lambda_list: Vec<f64>,
    pub seed: u64,
    pub v0: nalgebra::DVector<f64>,
    pub v1: nalgebra::DVector<f64>,
}

impl ProblemSpec {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidArgument(format!("spec: {}", e.message())))
    }

    /// Build the matrices and check the invariants. `seed` overrides the
    /// spec's own seed.
    pub fn build(&self, seed: Option<u64>) -> Result<Problem> {
        let alpha = FractionalOrder::new(self.alpha).map_err(|_| {
            Error::InvalidArgument(format!("alpha must lie in (1, 2], got {}", self.alpha))
        })?;
        let seed = seed.unwrap_or(self.seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = build_matrix(&self.a, &mut rng)?;
        let b = build_matrix(&self.b, &mut rng)?;
        if a.dim() != b.dim() {
            return Err(Error::InvalidArgument(format!(
                "A is {0}x{0} but B is {1}x{1}",
                a.dim(),
                b.dim()
            )));
        }
        let g = self.t_grid;
        if !(g.start >= 0.0) || !(g.stop > g.start) || g.steps == 0 || !g.stop.is_finite() {
            return Err(Error::InvalidArgument(
                "t_grid needs 0 <= start < stop and steps >= 1".into(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        self.quad.validate()?;
        self.laplace.validate()?;
        if self
            .lambda_list
            .iter()
            .any(|&l| !(l > 0.0) || !l.is_finite())
        {
            return Err(Error::InvalidArgument(
                "lambda_list entries must be positive".into(),
            ));
        }
        let d = a.dim();
        let vector =
            |v: &Option<Vec<f64>>, fill: f64, name: &str| -> Result<nalgebra::DVector<f64>> {
                match v {
                    None => Ok(nalgebra::DVector::from_element(d, fill)),
                    Some(v) if v.len() == d => Ok(nalgebra::DVector::from_column_slice(v)),
                    Some(v) => Err(Error::InvalidArgument(format!(
                        "{name} has length {} but the problem dimension is {d}",
                        v.len()
                    ))),
                }
            };
        Ok(Problem {
            alpha,
            v0: vector(&self.v0, 1.0, "v0")?,
            v1: vector(&self.v1, 0.0, "v1")?,
            a,
            b,
            t_grid: g.points(),
            tol: self.tol,
            quad: self.quad,
            laplace: self.laplace,
            lambda_list: self.lambda_list.clone(),
            seed,
        })
    }
}

pub fn build_matrix<R: Rng>(spec: &MatrixSpec, rng: &mut R) -> Result<GeneratorMatrix> {
    match spec {
        MatrixSpec::Rows(rows) => GeneratorMatrix::from_rows(rows),
        MatrixSpec::Builder(b) => match *b {
            MatrixBuilder::Laplacian { dim, scale } => laplacian(dim, scale),
            MatrixBuilder::Diagonal { ref values } => GeneratorMatrix::diagonal(values),
            MatrixBuilder::Zero { dim } => {
                check_dim(dim)?;
                Ok(GeneratorMatrix::zeros(dim))
            }
            MatrixBuilder::RandomSymmetric {
                dim,
                spectral_radius,
            } => random_symmetric(dim, spectral_radius, rng),
            MatrixBuilder::Random { dim, norm } => random_matrix(dim, norm, rng),
        },
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidArgument(
            "matrix dimension must be positive".into(),
        ));
    }
    Ok(())
}

fn check_scale(what: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "{what} must be finite and non-negative, got {v}"
        )));
    }
    Ok(())
}

pub fn laplacian(dim: usize, scale: f64) -> Result<GeneratorMatrix> {
    check_dim(dim)?;
    if !scale.is_finite() {
        return Err(Error::InvalidArgument(
            "laplacian scale must be finite".into(),
        ));
    }
    let m = Matrix::from_fn(dim, dim, |i, j| match i.abs_diff(j) {
        0 => -2.0 * scale,
        1 => scale,
        _ => 0.0,
    });
    GeneratorMatrix::new(m)
}

/// Random symmetric matrix rescaled to the given spectral radius.
pub fn random_symmetric<R: Rng>(
    dim: usize,
    spectral_radius: f64,
    rng: &mut R,
) -> Result<GeneratorMatrix> {
    check_dim(dim)?;
    check_scale("spectral_radius", spectral_radius)?;
    let raw = Matrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    let sym = (&raw + raw.transpose()) * 0.5;
    let rho = SymmetricEigen::new(sym.clone())
        .eigenvalues
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let m = if rho > 0.0 {
        sym * (spectral_radius / rho)
    } else {
        sym
    };
    GeneratorMatrix::new(m)
}

/// Random matrix rescaled to the given max-row-sum norm.
pub fn random_matrix<R: Rng>(dim: usize, target: f64, rng: &mut R) -> Result<GeneratorMatrix> {
    check_dim(dim)?;
    check_scale("norm", target)?;
    let raw = Matrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
    let n = norm(&raw);
    let m = if n > 0.0 { raw * (target / n) } else { raw };
    GeneratorMatrix::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_spec_builds() {
        let p = ProblemSpec::parse(DEFAULT_SPEC)
            .unwrap()
            .build(None)
            .unwrap();
        assert_eq!(p.a.dim(), p.b.dim());
        assert!(p.t_grid.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn literal_and_builder_matrices() {
        let text = r#"
            alpha = 2.0
            A = [[-1.0]]
            B = { builder = "zero", dim = 1 }
            t_grid = { start = 0.0, stop = 1.0, steps = 4 }
        "#;
        let p = ProblemSpec::parse(text).unwrap().build(None).unwrap();
        assert_eq!(p.a.matrix()[(0, 0)], -1.0);
        assert_eq!(p.t_grid, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn non_square_is_rejected() {
        let text = r#"
            alpha = 1.5
            A = [[1.0, 2.0]]
            B = [[0.0]]
            t_grid = { start = 0.0, stop = 1.0, steps = 4 }
        "#;
        assert!(ProblemSpec::parse(text).unwrap().build(None).is_err());
    }

    #[test]
    fn builders_hit_their_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_symmetric(4, 2.5, &mut rng).unwrap();
        let rho = SymmetricEigen::new(a.matrix().clone())
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((rho - 2.5).abs() < 1e-12);
        let b = random_matrix(3, 0.4, &mut rng).unwrap();
        assert!((b.norm() - 0.4).abs() < 1e-14);
        let l = laplacian(3, 2.0).unwrap();
        assert_eq!(l.matrix()[(1, 1)], -4.0);
        assert_eq!(l.matrix()[(0, 2)], 0.0);
    }

    #[test]
    fn same_seed_same_matrices() {
        let spec = ProblemSpec::parse(DEFAULT_SPEC).unwrap();
        let p = spec.build(Some(9)).unwrap();
        let q = spec.build(Some(9)).unwrap();
        assert_eq!(p.a.matrix(), q.a.matrix());
        assert_eq!(p.b.matrix(), q.b.matrix());
    }
}
