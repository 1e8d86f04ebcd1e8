//! Multivariate normal orthant probabilities by the holonomic gradient
//! method.
//!
//! The orthant probability P(X_1 >= 0, .., X_d >= 0) for X ~ N(mu, Sigma)
//! is proportional to the integral g(x, y) of exp(t' x t + y' t) over the
//! positive orthant, with x = -(1/2) Sigma^{-1} and y = Sigma^{-1} mu.
//! The 2^d subset-restricted integrals g_J satisfy a first-order linear
//! ODE system (a Pfaffian system) whose coefficients are rational in
//! (x, y); integrating it along a homotopy from a decoupled start point
//! with known closed-form values to the target parameters evaluates g,
//! and hence the probability, to near machine precision.
//!
//! ```
//! use orthant::linalg::Matrix;
//! use orthant::model::ProblemSpec;
//! use orthant::integrator::IntegratorConfig;
//! use orthant::probability::orthant_probability;
//!
//! let cov = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]);
//! let spec = ProblemSpec::new(vec![0.0, 0.0], cov).unwrap();
//! let r = orthant_probability(&spec, &IntegratorConfig::default()).unwrap();
//! assert!((r.probability - 1.0 / 3.0).abs() < 1e-9);
//! ```
//!
//! The `oracles` module holds independent reference computations (Monte
//! Carlo, the equicorrelated one-dimensional reduction, closed forms for
//! d <= 2, and direct quadrature of the defining integral) used to
//! cross-validate every result. See the `examples/` directory for one
//! runnable program per capability.

pub mod cli;
pub mod error;
pub mod integrator;
pub mod linalg;
pub mod model;
pub mod oracles;
pub mod pfaffian;
pub mod probability;
pub mod quad;

pub use error::{Error, Result};
pub use integrator::{integrate, initial_state, IntegratorConfig, Method, Trajectory};
pub use model::{build_path, natural_params, validate_problem, NaturalParams, PathSpec, ProblemSpec, SubsetIndex};
pub use pfaffian::{annihilator_residual, grad_y, hess_yy, subset_moments, tangent, StateVector, SubsetMoments};
pub use probability::{orthant_probability, orthant_probability_signed, orthant_sum_check, OrthantResult};
