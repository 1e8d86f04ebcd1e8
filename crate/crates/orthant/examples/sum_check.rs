//! The sum-to-one diagnostic: integrating all 2^d signed orthants of a
//! random correlation matrix and measuring how far the total drifts
//! from one. This bounds the accumulated integration error without any
//! external reference value.
//!
//!     cargo run --release --example sum_check

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use orthant::integrator::IntegratorConfig;
use orthant::model::ProblemSpec;
use orthant::oracles::random_correlation;
use orthant::probability::orthant_sum_check_detail;

fn main() {
    let d = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cov = random_correlation(d, &mut rng);
    let spec = ProblemSpec::new(vec![0.0; d], cov).unwrap();

    let (err, table) = orthant_sum_check_detail(&spec, &IntegratorConfig::default()).unwrap();
    for (signs, p) in &table {
        println!("{signs:?}  {p:.12}");
    }
    println!("\n|1 - sum over {} orthants| = {err:.3e}", table.len());
}
