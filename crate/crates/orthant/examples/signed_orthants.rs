//! Probabilities of all four quadrants of a correlated bivariate normal.
//! Flipping signs reduces each quadrant to the positive orthant of a
//! transformed problem, so the four values must sum to one.
//!
//!     cargo run --release --example signed_orthants

use orthant::integrator::IntegratorConfig;
use orthant::linalg::Matrix;
use orthant::model::ProblemSpec;
use orthant::probability::orthant_probability_signed;

fn main() {
    let cov = Matrix::from_rows(&[vec![1.0, 0.6], vec![0.6, 1.0]]);
    let spec = ProblemSpec::new(vec![0.4, -0.2], cov).unwrap();
    let config = IntegratorConfig::default();

    let mut total = 0.0;
    for signs in [[1, 1], [1, -1], [-1, 1], [-1, -1]] {
        let p = orthant_probability_signed(&spec, &signs, &config)
            .unwrap()
            .probability;
        total += p;
        println!("P(sign pattern {signs:?}) = {p:.12}");
    }
    println!("sum = {total:.12}  (|1 - sum| = {:.3e})", (1.0 - total).abs());
}
