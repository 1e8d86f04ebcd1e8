//! Cross-checking a five-dimensional problem against a seeded Monte
//! Carlo estimate. The ODE result should land within a few standard
//! errors of the sample frequency.
//!
//!     cargo run --release --example monte_carlo

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use orthant::integrator::IntegratorConfig;
use orthant::model::ProblemSpec;
use orthant::oracles::{mc_orthant, random_correlation};
use orthant::probability::orthant_probability;

fn main() {
    let d = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(123);
    let cov = random_correlation(d, &mut rng);
    let spec = ProblemSpec::new(vec![0.0; d], cov).unwrap();

    let hgm = orthant_probability(&spec, &IntegratorConfig::default()).unwrap();
    let mc = mc_orthant(&spec, 2_000_000, 42).unwrap();

    println!("hgm       = {:.10}", hgm.probability);
    println!("mc        = {:.10} +- {:.2e}", mc.estimate, mc.std_error);
    println!(
        "deviation = {:.2e} ({:.2} standard errors)",
        (hgm.probability - mc.estimate).abs(),
        (hgm.probability - mc.estimate).abs() / mc.std_error
    );
}
