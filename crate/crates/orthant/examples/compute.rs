//! Basic usage: the orthant probability of a correlated trivariate
//! normal with a nonzero mean.
//!
//!     cargo run --release --example compute

use orthant::integrator::IntegratorConfig;
use orthant::linalg::Matrix;
use orthant::model::ProblemSpec;
use orthant::probability::orthant_probability;

fn main() {
    let cov = Matrix::from_rows(&[
        vec![1.0, 0.5, 0.2],
        vec![0.5, 1.0, 0.3],
        vec![0.2, 0.3, 1.0],
    ]);
    let spec = ProblemSpec::new(vec![0.3, -0.1, 0.0], cov).unwrap();

    let result = orthant_probability(&spec, &IntegratorConfig::default()).unwrap();
    println!("P(X1 >= 0, X2 >= 0, X3 >= 0) = {:.12}", result.probability);
    println!("g value          = {:.12e}", result.g_value);
    println!("log prefactor    = {:.12e}", result.log_prefactor);
    println!(
        "steps            = {} accepted, {} rejected",
        result.steps, result.rejected_steps
    );
    println!("residual norm    = {:.3e}", result.residual_norm);
}
