//! Assembly of the orthant probability from the integrated state.
//!
//! P(X >= 0) = (2 pi)^{-d/2} det(Sigma)^{-1/2} exp(-(1/2) mu' Sigma^{-1} mu) g(x, y),
//! where g comes out of the ODE integration. The prefactor follows from
//! completing the square in the normal density and is computed in log
//! space from the Cholesky factor of Sigma.

use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegratorConfig};
use crate::linalg::{cholesky, chol_solve, logdet_from_chol, Matrix};
use crate::model::{build_path, natural_params, ProblemSpec};
use crate::pfaffian::annihilator_residual;

#[derive(Debug, Clone)]
pub struct OrthantResult {
    pub probability: f64,
    /// The integral g(x, y) at the target parameters.
    pub g_value: f64,
    pub log_prefactor: f64,
    pub steps: u64,
    pub rejected_steps: u64,
    /// max_i |residual_i| / g_{[d]} of the annihilating operators at t = 1.
    pub residual_norm: f64,
}

fn log_prefactor(spec: &ProblemSpec) -> Result<f64> {
    let d = spec.dim() as f64;
    let l = cholesky(spec.cov()).map_err(|minor| Error::NotPositiveDefinite { minor })?;
    let y = chol_solve(&l, spec.mean());
    let quad: f64 = spec.mean().iter().zip(&y).map(|(m, v)| m * v).sum();
    Ok(-0.5 * d * (2.0 * std::f64::consts::PI).ln() - 0.5 * logdet_from_chol(&l) - 0.5 * quad)
}

/// Evaluates P(X_1 >= 0, .., X_d >= 0) for X ~ N(mean, cov).
pub fn orthant_probability(spec: &ProblemSpec, config: &IntegratorConfig) -> Result<OrthantResult> {
    let params = natural_params(spec)?;
    let path = build_path(&params);
    let traj = integrate(&path, config)?;
    let g_value = traj.final_state.full_value();

    let residuals = annihilator_residual(&traj.final_state, &params.x, &params.y)?;
    let residual_norm = residuals
        .iter()
        .fold(0.0_f64, |m, r| m.max(r.abs()))
        / g_value;

    let lp = log_prefactor(spec)?;
    Ok(OrthantResult {
        probability: lp.exp() * g_value,
        g_value,
        log_prefactor: lp,
        steps: traj.steps_taken,
        rejected_steps: traj.rejected_steps,
        residual_norm,
    })
}

/// P(X in E_eps) for the signed orthant eps in {+-1}^d, via the exact
/// reduction to the positive orthant of D X ~ N(D mu, D Sigma D) with
/// D = diag(eps).
pub fn orthant_probability_signed(
    spec: &ProblemSpec,
    signs: &[i8],
    config: &IntegratorConfig,
) -> Result<OrthantResult> {
    let d = spec.dim();
    assert_eq!(signs.len(), d);
    assert!(signs.iter().all(|s| *s == 1 || *s == -1));
    let mut cov = Matrix::zeros(d);
    let mut mean = vec![0.0; d];
    for i in 0..d {
        mean[i] = signs[i] as f64 * spec.mean()[i];
        for j in 0..d {
            cov.set(i, j, (signs[i] * signs[j]) as f64 * spec.cov().get(i, j));
        }
    }
    let flipped = ProblemSpec::with_cap(mean, cov, crate::model::HARD_DIM_CAP)?;
    orthant_probability(&flipped, config)
}

/// Cap on the dimension accepted by [`orthant_sum_check`] (2^d full
/// integrations).
pub const SUM_CHECK_DIM_CAP: usize = 14;

/// |1 - sum of all 2^d signed orthant probabilities|, the accuracy
/// diagnostic of the method.
pub fn orthant_sum_check(spec: &ProblemSpec, config: &IntegratorConfig) -> Result<f64> {
    let (err, _) = orthant_sum_check_detail(spec, config)?;
    Ok(err)
}

/// Like [`orthant_sum_check`] but also returns each signed probability
/// paired with its sign vector.
pub fn orthant_sum_check_detail(
    spec: &ProblemSpec,
    config: &IntegratorConfig,
) -> Result<(f64, Vec<(Vec<i8>, f64)>)> {
    let d = spec.dim();
    if d > SUM_CHECK_DIM_CAP {
        return Err(Error::SumCheckTooLarge {
            dim: d,
            cap: SUM_CHECK_DIM_CAP,
        });
    }
    let mut sum = 0.0;
    let mut table = Vec::with_capacity(1 << d);
    for bits in 0..(1u32 << d) {
        let signs: Vec<i8> = (0..d).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect();
        let p = orthant_probability_signed(spec, &signs, config)?.probability;
        sum += p;
        table.push((signs, p));
    }
    Ok(((1.0 - sum).abs(), table))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn config() -> IntegratorConfig {
        IntegratorConfig::default()
    }

    #[test]
    fn univariate_standard_normal_is_half() {
        let spec = ProblemSpec::new(vec![0.0], Matrix::identity(1)).unwrap();
        let r = orthant_probability(&spec, &config()).unwrap();
        assert_abs_diff_eq!(r.probability, 0.5, epsilon = 1e-10);
        assert!(r.probability > 0.0 && r.probability < 1.0);
        // consistency of the decomposition
        assert_abs_diff_eq!(
            r.probability,
            r.log_prefactor.exp() * r.g_value,
            epsilon = 1e-14 * r.probability
        );
    }

    #[test]
    fn bivariate_arcsine_value() {
        let cov = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]);
        let spec = ProblemSpec::new(vec![0.0; 2], cov).unwrap();
        let r = orthant_probability(&spec, &config()).unwrap();
        assert_abs_diff_eq!(r.probability, 1.0 / 3.0, epsilon = 1e-9);
        assert!(r.residual_norm < 1e-6);
    }

    #[test]
    fn signed_identity_transform_is_noop() {
        let cov = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]);
        let spec = ProblemSpec::new(vec![0.1, -0.2], cov).unwrap();
        let a = orthant_probability(&spec, &config()).unwrap().probability;
        let b = orthant_probability_signed(&spec, &[1, 1], &config())
            .unwrap()
            .probability;
        assert_abs_diff_eq!(a, b, epsilon = 1e-14);
    }

    #[test]
    fn univariate_complement() {
        let spec = ProblemSpec::new(vec![0.5], Matrix::identity(1)).unwrap();
        let tight = IntegratorConfig {
            rtol: 1e-11,
            atol: 1e-13,
            ..Default::default()
        };
        let plus = orthant_probability(&spec, &tight).unwrap().probability;
        let minus = orthant_probability_signed(&spec, &[-1], &tight)
            .unwrap()
            .probability;
        assert_abs_diff_eq!(plus + minus, 1.0, epsilon = 1e-10);
        // Phi(-0.5)
        assert_abs_diff_eq!(minus, 0.30853753872598694, epsilon = 1e-9);
    }

    #[test]
    fn independent_quadrants() {
        let spec = ProblemSpec::new(vec![0.0; 2], Matrix::identity(2)).unwrap();
        for signs in [[1, 1], [1, -1], [-1, 1], [-1, -1]] {
            let p = orthant_probability_signed(&spec, &signs, &config())
                .unwrap()
                .probability;
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn sum_check_identity_is_exact() {
        let spec = ProblemSpec::new(vec![0.0; 2], Matrix::identity(2)).unwrap();
        let err = orthant_sum_check(&spec, &config()).unwrap();
        assert!(err < 1e-12);
    }

    #[test]
    fn sum_check_refuses_large_dimension() {
        let spec =
            ProblemSpec::with_cap(vec![0.0; 15], Matrix::identity(15), 20).unwrap();
        assert!(matches!(
            orthant_sum_check(&spec, &config()),
            Err(Error::SumCheckTooLarge { dim: 15, cap: 14 })
        ));
    }

    #[test]
    fn block_diagonal_factorizes() {
        // 3 = 1 + 2 block structure: product of marginal probabilities
        let cov = Matrix::from_rows(&[
            vec![2.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.5],
            vec![0.0, 0.5, 1.0],
        ]);
        let spec = ProblemSpec::new(vec![0.3, 0.0, 0.0], cov).unwrap();
        let p3 = orthant_probability(&spec, &config()).unwrap().probability;

        let s1 = ProblemSpec::new(vec![0.3], Matrix::from_rows(&[vec![2.0]])).unwrap();
        let s2 = ProblemSpec::new(
            vec![0.0; 2],
            Matrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]),
        )
        .unwrap();
        let p1 = orthant_probability(&s1, &config()).unwrap().probability;
        let p2 = orthant_probability(&s2, &config()).unwrap().probability;
        assert!((p3 - p1 * p2).abs() / (p1 * p2) < 1e-9);
    }

    #[test]
    fn scale_invariance() {
        let cov = Matrix::from_rows(&[vec![1.0, 0.4], vec![0.4, 1.0]]);
        let spec = ProblemSpec::new(vec![0.2, -0.1], cov).unwrap();
        let p = orthant_probability(&spec, &config()).unwrap().probability;

        let d = [2.0, 0.5];
        let mut cov2 = Matrix::zeros(2);
        for i in 0..2 {
            for j in 0..2 {
                cov2.set(i, j, d[i] * d[j] * spec.cov().get(i, j));
            }
        }
        let mean2: Vec<f64> = spec.mean().iter().zip(&d).map(|(m, s)| m * s).collect();
        let spec2 = ProblemSpec::new(mean2, cov2).unwrap();
        let p2 = orthant_probability(&spec2, &config()).unwrap().probability;
        assert!((p - p2).abs() / p < 1e-9);
    }

    #[test]
    fn monotone_in_mean() {
        let cov = Matrix::from_rows(&[vec![1.0, 0.3], vec![0.3, 1.0]]);
        let mut last = 0.0;
        for m in [-1.0, -0.5, 0.0, 0.5, 1.0] {
            let spec = ProblemSpec::new(vec![m, 0.2], cov.clone()).unwrap();
            let p = orthant_probability(&spec, &config()).unwrap().probability;
            assert!(p > last, "probability must increase with the mean");
            last = p;
        }
    }
}
