//! Error type shared by every analysis in the crate.

use thiserror::Error;

/// Failures raised by model construction and the numerical analyses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArboError {
    /// One or more parameter bounds are violated; every violation is listed.
    #[error("invalid parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),

    /// The total human population is zero, so forces of infection are undefined.
    #[error("total human population is zero")]
    ZeroPopulation,

    /// A quantity requested needs the vector population to persist (N > 1).
    #[error("net reproductive number {n} <= 1: biological disease-free equilibrium does not exist")]
    Threshold {
        /// Net reproductive number of the offending parameter set.
        n: f64,
    },

    /// A precondition on the inputs is not met.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A back-substituted equilibrium does not annihilate the vector field.
    #[error("equilibrium residual {residual:e} exceeds tolerance {tol:e}")]
    Residual {
        /// Infinity norm of the field at the candidate point.
        residual: f64,
        /// Tolerance that was exceeded.
        tol: f64,
    },

    /// The Jacobian kernel is not one-dimensional.
    #[error("Jacobian kernel is not one-dimensional (singular values {smallest:e}, {second:e})")]
    KernelDimension {
        /// Smallest singular value.
        smallest: f64,
        /// Second smallest singular value.
        second: f64,
    },

    /// An integration produced NaN or infinity.
    #[error("non-finite value at step {step}")]
    NonFinite {
        /// Index of the step that produced the value.
        step: usize,
    },

    /// Two trajectories or schedules do not share a time grid.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A parameter range cannot be sampled.
    #[error("invalid range for {name}: [{lo}, {hi}]")]
    InvalidRange {
        /// Parameter name.
        name: String,
        /// Lower bound.
        lo: f64,
        /// Upper bound.
        hi: f64,
    },

    /// A rank regression is singular.
    #[error("singular regression for parameter {0}")]
    SingularRegression(String),

    /// A ratio has a zero denominator.
    #[error("division by zero: {0}")]
    DivisionByZero(String),

    /// An unknown parameter name was supplied.
    #[error("unknown parameter: {0}")]
    UnknownParameter(String),
}

/// Crate result alias.
pub type Result<T> = std::result::Result<T, ArboError>;
