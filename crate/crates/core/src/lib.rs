//! Fractional cosine and sine families of matrix generators, their
//! resolvents, and perturbation series for `A + B`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod families;
pub mod laplace;
pub mod linalg;
pub mod problem;
pub mod quadrature;
pub mod resolvent;
pub mod series;
pub mod special;

pub use error::{Error, Result};
pub use families::{ExponentialBound, Families, FamilyKind};
pub use laplace::{LaplaceKind, LaplaceQuadrature, LaplaceVerifier};
pub use linalg::{GeneratorMatrix, Matrix, PerturbationMatrix};
pub use quadrature::QuadratureConfig;
pub use resolvent::{neumann_resolvent, resolvent, ResolventPoint};
pub use series::{
    perturbed_cosine, perturbed_sine, Chain, SeriesEngine, SeriesTerm, TruncationReport,
};
pub use special::{
    g_convolution, g_kernel, gamma, ml_scalar, FractionalOrder, KernelOrder, MlOptions,
};
