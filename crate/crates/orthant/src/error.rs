use thiserror::Error;

/// Errors produced by the orthant probability pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("covariance matrix is not symmetric: |S[{i}][{j}] - S[{j}][{i}]| = {delta:e} exceeds tolerance {tol:e}")]
    NotSymmetric {
        i: usize,
        j: usize,
        delta: f64,
        tol: f64,
    },

    #[error("matrix is not positive definite: leading minor of order {minor} is not positive")]
    NotPositiveDefinite { minor: usize },

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimensionTooLarge { dim: usize, cap: usize },

    #[error("principal submatrix for subset mask {mask:#b} is singular (minor {minor})")]
    SingularSubmatrix { mask: u32, minor: usize },

    #[error("diagonal entry x[{index}][{index}] = {value} is not negative")]
    NonNegativeDiagonal { index: usize, value: f64 },

    #[error("integrator exceeded {max_steps} steps at t = {t}")]
    MaxStepsExceeded { t: f64, max_steps: u64 },

    #[error("step size underflow at t = {t} (step {h:e}); the system appears stiff at this point")]
    StepUnderflow { t: f64, h: f64 },

    #[error("non-finite state encountered at t = {t}; the integral is too large for double precision (mean far from zero?)")]
    NonFiniteState { t: f64 },

    #[error("correlation {rho} outside the supported range {range}")]
    InvalidRho { rho: f64, range: &'static str },

    #[error("variance {var} must be positive")]
    InvalidVariance { var: f64 },

    #[error("direct quadrature supports at most 3 coordinates, got {size}")]
    TooHighDimension { size: usize },

    #[error("oracle not applicable: {reason}")]
    OracleInapplicable { reason: String },

    #[error("invalid integrator configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error("sum check limited to dimension {cap}, got {dim}")]
    SumCheckTooLarge { dim: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
