use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what}: argument {value} outside the evaluation domain")]
    Domain { what: &'static str, value: f64 },

    #[error("{what}: no convergence after {terms} terms")]
    NonConvergence { what: &'static str, terms: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shifted generator is singular at {shift} (condition estimate {condition:e})")]
    Singular { shift: f64, condition: f64 },

    #[error("perturbation hypothesis violated: theta = {theta} >= 1")]
    HypothesisViolated { theta: f64 },

    #[error("quadrature stalled: error estimate {estimate:e} above target {target:e}")]
    QuadratureStalled { estimate: f64, target: f64 },

    #[error("Laplace tail bound {tail:e} exceeds tolerance {tolerance:e}")]
    TailTooLarge { tail: f64, tolerance: f64 },

    #[error("series term cap {terms} reached with majorant tail {tail:e}")]
    TermCap { terms: usize, tail: f64 },
}

impl Error {
    /// Stable identifier used in diagnostic records.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain_error",
            Error::NonConvergence { .. } => "non_convergence",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Singular { .. } => "singular",
            Error::HypothesisViolated { .. } => "hypothesis_violated",
            Error::QuadratureStalled { .. } => "quadrature_stalled",
            Error::TailTooLarge { .. } => "tail_too_large",
            Error::TermCap { .. } => "term_cap",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
