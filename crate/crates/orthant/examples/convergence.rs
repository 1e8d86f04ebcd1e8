//! Convergence behavior of the two integration schemes on a d = 3
//! problem: fixed-step RK4 errors shrink by about 2^4 per step halving,
//! and the adaptive scheme tracks its requested tolerance.
//!
//!     cargo run --release --example convergence

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use orthant::integrator::{integrate, IntegratorConfig, Method};
use orthant::model::{build_path, natural_params, ProblemSpec};
use orthant::oracles::random_correlation;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cov = random_correlation(3, &mut rng);
    let spec = ProblemSpec::new(vec![0.0; 3], cov).unwrap();
    let path = build_path(&natural_params(&spec).unwrap());

    let reference = integrate(
        &path,
        &IntegratorConfig {
            rtol: 1e-12,
            atol: 1e-14,
            ..Default::default()
        },
    )
    .unwrap()
    .final_state
    .full_value();
    println!("reference g (rkf45, rtol 1e-12) = {reference:.15e}\n");

    println!("fixed-step rk4:");
    let mut last_err = None;
    for h in [0.08, 0.04, 0.02, 0.01] {
        let g = integrate(
            &path,
            &IntegratorConfig {
                method: Method::Rk4Fixed,
                initial_step: h,
                ..Default::default()
            },
        )
        .unwrap()
        .final_state
        .full_value();
        let err = (g - reference).abs();
        let ratio = last_err
            .map(|e: f64| format!("{:.1}", e / err))
            .unwrap_or_default();
        println!("  h = {h:<5}  error = {err:.3e}  {ratio}");
        last_err = Some(err);
    }

    println!("\nadaptive rkf45:");
    for rtol in [1e-6, 1e-8, 1e-10] {
        let traj = integrate(
            &path,
            &IntegratorConfig {
                rtol,
                atol: rtol * 1e-2,
                ..Default::default()
            },
        )
        .unwrap();
        let err = (traj.final_state.full_value() - reference).abs();
        println!(
            "  rtol = {rtol:.0e}  error = {err:.3e}  steps = {} (+{} rejected)",
            traj.steps_taken, traj.rejected_steps
        );
    }
}
