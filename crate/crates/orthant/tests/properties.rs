//! Randomized invariants. Problem instances are derived from proptest
//! seeds through the deterministic correlation sampler, so every case
//! is reproducible from its seed.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use orthant::integrator::IntegratorConfig;
use orthant::linalg::{cholesky, spd_inverse, Matrix};
use orthant::model::{build_path, natural_params, ProblemSpec};
use orthant::oracles::random_correlation;
use orthant::pfaffian::{tangent, StateVector};
use orthant::probability::{orthant_probability, orthant_probability_signed};

fn problem(dim: usize, seed: u64) -> ProblemSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cov = random_correlation(dim, &mut rng);
    ProblemSpec::new(vec![0.0; dim], cov).unwrap()
}

/// Smallest eigenvalue of a symmetric matrix by bisection on the
/// predicate "A - lambda I admits a Cholesky factorization".
fn min_eigenvalue(a: &Matrix) -> f64 {
    let n = a.order();
    let bound = (0..n)
        .map(|i| (0..n).map(|j| a.get(i, j).abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let shifted_pd = |lambda: f64| {
        let mut s = a.clone();
        for i in 0..n {
            s.set(i, i, a.get(i, i) - lambda);
        }
        cholesky(&s).is_ok()
    };
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if shifted_pd(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn natural_params_round_trip(dim in 1usize..=4, seed in any::<u64>()) {
        let spec = problem(dim, seed);
        let p = natural_params(&spec).unwrap();
        let sigma = spd_inverse(&p.x.scale(-2.0)).unwrap();
        for i in 0..dim {
            for j in 0..dim {
                let delta = (sigma.get(i, j) - spec.cov().get(i, j)).abs();
                prop_assert!(delta < 1e-10, "({i},{j}) off by {delta:e}");
            }
        }
    }

    #[test]
    fn path_stays_uniformly_definite(dim in 2usize..=5, seed in any::<u64>()) {
        // -x(t) is a convex combination of -x(0) and -x(1), so its
        // smallest eigenvalue cannot dip below the endpoint minimum
        let spec = problem(dim, seed);
        let path = build_path(&natural_params(&spec).unwrap());
        let floor = min_eigenvalue(&path.x_at(0.0).scale(-1.0))
            .min(min_eigenvalue(&path.x_at(1.0).scale(-1.0)));
        prop_assert!(floor > 0.0);
        for k in 1..10 {
            let lam = min_eigenvalue(&path.x_at(k as f64 / 10.0).scale(-1.0));
            prop_assert!(lam >= floor - 1e-9, "t={} lambda {lam} < floor {floor}", k as f64 / 10.0);
        }
    }

    #[test]
    fn tangent_is_linear_in_state(
        dim in 1usize..=3,
        seed in any::<u64>(),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
        t in 0.0f64..=1.0,
    ) {
        let spec = problem(dim, seed);
        let path = build_path(&natural_params(&spec).unwrap());
        let n = 1usize << dim;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let g1 = StateVector::from_values(dim, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let g2 = StateVector::from_values(dim, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let combo = StateVector::from_values(
            dim,
            (0..n).map(|k| a * g1.values()[k] + b * g2.values()[k]).collect(),
        );
        let t1 = tangent(t, &g1, &path).unwrap();
        let t2 = tangent(t, &g2, &path).unwrap();
        let tc = tangent(t, &combo, &path).unwrap();
        for k in 0..n {
            let want = a * t1.values()[k] + b * t2.values()[k];
            let got = tc.values()[k];
            prop_assert!((got - want).abs() < 1e-9 * (1.0 + want.abs()));
        }
    }
}

proptest! {
    // full integrations per case: keep the case count small
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn probability_is_permutation_invariant(seed in any::<u64>(), swap in 0usize..3) {
        let spec = problem(3, seed);
        let perm: [usize; 3] = match swap {
            0 => [1, 0, 2],
            1 => [0, 2, 1],
            _ => [2, 1, 0],
        };
        let mut cov = Matrix::zeros(3);
        for i in 0..3 {
            for j in 0..3 {
                cov.set(i, j, spec.cov().get(perm[i], perm[j]));
            }
        }
        let permuted = ProblemSpec::new(vec![0.0; 3], cov).unwrap();
        let config = IntegratorConfig::default();
        let p1 = orthant_probability(&spec, &config).unwrap().probability;
        let p2 = orthant_probability(&permuted, &config).unwrap().probability;
        prop_assert!((p1 - p2).abs() < 1e-9, "{p1} vs {p2}");
    }

    #[test]
    fn univariate_halves_sum_to_one(mu in -2.0f64..2.0, var in 0.2f64..4.0) {
        let spec = ProblemSpec::new(vec![mu], Matrix::from_rows(&[vec![var]])).unwrap();
        let config = IntegratorConfig::default();
        let plus = orthant_probability(&spec, &config).unwrap().probability;
        let minus = orthant_probability_signed(&spec, &[-1], &config).unwrap().probability;
        prop_assert!((plus + minus - 1.0).abs() < 1e-8);
    }
}
