//! Equicorrelated problems have a one-dimensional integral
//! representation, which gives an independent high-accuracy reference.
//! This sweeps rho at d = 10 and prints both values side by side.
//!
//!     cargo run --release --example equicorrelated

use orthant::integrator::IntegratorConfig;
use orthant::linalg::Matrix;
use orthant::model::ProblemSpec;
use orthant::oracles::equicorrelated_reference;
use orthant::probability::orthant_probability;

fn main() {
    let d = 10;
    let config = IntegratorConfig::default();
    println!("{:>5}  {:>18}  {:>18}  {:>10}", "rho", "hgm", "reference", "diff");
    for rho in [0.0, 0.1, 0.25, 0.5, 0.75] {
        let mut cov = Matrix::identity(d);
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    cov.set(i, j, rho);
                }
            }
        }
        let spec = ProblemSpec::new(vec![0.0; d], cov).unwrap();
        let p = orthant_probability(&spec, &config).unwrap().probability;
        let reference = equicorrelated_reference(d, rho, None).unwrap();
        println!(
            "{rho:>5}  {p:>18.12e}  {reference:>18.12e}  {:>10.2e}",
            (p - reference).abs()
        );
    }
}
