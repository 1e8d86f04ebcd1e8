//! Drift control along the integration path. At any t the integrated
//! state must satisfy the annihilating operators of the integrand at
//! the current parameters; the normalized residuals measure how well
//! the trajectory stays on the solution manifold.
//!
//!     cargo run --release --example residuals

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use orthant::integrator::{integrate_to, IntegratorConfig};
use orthant::model::{build_path, natural_params, ProblemSpec};
use orthant::oracles::random_correlation;
use orthant::pfaffian::annihilator_residual;

fn main() {
    let d = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cov = random_correlation(d, &mut rng);
    let spec = ProblemSpec::new(vec![0.0; d], cov).unwrap();
    let path = build_path(&natural_params(&spec).unwrap());
    let config = IntegratorConfig::default();

    println!("{:>5}  {:>12}  {:>12}", "t", "g_full", "max residual");
    for k in 0..=10 {
        let t = k as f64 / 10.0;
        let traj = integrate_to(&path, &config, t).unwrap();
        let res = annihilator_residual(&traj.final_state, &path.x_at(t), &path.y_at(t)).unwrap();
        let g = traj.final_state.full_value();
        let worst = res.iter().fold(0.0_f64, |m, r| m.max(r.abs())) / g;
        println!("{t:>5.1}  {g:>12.6e}  {worst:>12.3e}");
    }
}
