use thiserror::Error;

/// Errors produced by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two operands (or an operand and a measure) live in different dimensions.
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// The input is not a square matrix with consistent row lengths.
    #[error("malformed matrix: {0}")]
    Malformed(String),

    /// A matrix expected to be positive definite is not (numerically).
    #[error("matrix is not positive definite: smallest eigenvalue {min_eigenvalue:e} (largest {max_eigenvalue:e})")]
    NotPositiveDefinite {
        min_eigenvalue: f64,
        max_eigenvalue: f64,
    },

    /// Jacobi sweeps did not reduce the off-diagonal mass below threshold.
    #[error("symmetric eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNotConverged { sweeps: usize, off_norm: f64 },

    /// A scalar function is not defined (finite) on the spectrum of its argument.
    #[error("function undefined on spectrum: f({eigenvalue:e}) is not finite")]
    Domain { eigenvalue: f64 },

    /// An argument is outside its admissible range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A measure was constructed without any atom of positive weight.
    #[error("measure has no atoms with positive weight")]
    EmptyMeasure,

    /// Weights could not be put over a common denominator for exact transport.
    #[error("cannot rationalize weights with a common denominator <= {max_denominator} (weight {weight:e})")]
    Rationalization { weight: f64, max_denominator: u64 },

    /// The Karcher fixed-point iteration ran out of iterations.
    #[error("Karcher solver did not converge in {iterations} iterations (normalized residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    /// An exponential-formula evaluation would need more resolvent steps than allowed.
    #[error("flow needs {required} resolvent steps (cap {cap}); achievable tolerance {achievable_tol:e}")]
    ResolventBudget {
        required: u64,
        cap: u64,
        achievable_tol: f64,
    },

    /// The hypothesis of a scheme (e.g. equal weights for nodice) is violated.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
