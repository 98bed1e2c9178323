//! Error types shared by the solver modules.

use thiserror::Error;

/// Errors raised by linear algebra, domain, and solver operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite: pivot {pivot:.3e} at index {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("matrix asymmetry {asymmetry:.3e} exceeds tolerance {tolerance:.1e}")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("non-finite entry at index {index}")]
    NonFiniteEntry { index: usize },

    #[error("iteration cap {iterations} reached with residual {residual:.3e}")]
    MaxIterationsExceeded {
        iterations: usize,
        residual: f64,
        /// Best iterate found before giving up.
        best: Vec<f64>,
    },

    #[error("domain is empty or infeasible")]
    InfeasibleDomain,

    #[error("budget {upsilon} cuts off the whole domain (minimum nominal cost {minimum})")]
    InfeasibleBudget { upsilon: f64, minimum: f64 },

    #[error("no feasible point at radius beta = {beta}")]
    InfeasibleAtBeta { beta: f64 },

    #[error("lambda schedule entry {index} must be positive, got {value}")]
    NonPositiveLambda { index: usize, value: f64 },

    #[error("iterate has zero Sigma-norm; the radius map is undefined")]
    ZeroIterate,

    #[error("multiplier norm {norm:.3e} exceeded the divergence guard")]
    DivergenceDetected { norm: f64 },

    #[error("non-finite gradient at iteration {iteration}")]
    NonFiniteGradient { iteration: usize },

    #[error("epsilon = {epsilon:.4} >= 1 at m = {m}; smallest admissible n is {min_n}")]
    EpsilonTooLarge { epsilon: f64, m: usize, min_n: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
