//! Independent reference computations.
//!
//! Nothing in this module touches the Pfaffian engine: every value comes
//! from sampling, classical closed forms, or direct quadrature of the
//! defining integrals, so agreement with the ODE pipeline is a genuine
//! cross-check.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, spd_inverse, Matrix};
use crate::model::{ProblemSpec, SubsetIndex};
use crate::quad::{adaptive_simpson, composite_gauss_legendre};

/// Standard normal CDF, accurate to ~1e-15 (erfc based).
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Monte Carlo estimate of an orthant probability.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Hit-fraction Monte Carlo: X = mu + L Z with L the Cholesky factor of
/// the covariance. Deterministic for a given seed.
pub fn mc_orthant(spec: &ProblemSpec, samples: u64, seed: u64) -> Result<McEstimate> {
    assert!(samples >= 1000, "need at least 1000 samples");
    let d = spec.dim();
    let l = cholesky(spec.cov()).map_err(|minor| Error::NotPositiveDefinite { minor })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0u64;
    let mut z = vec![0.0_f64; d];
    for _ in 0..samples {
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        let mut inside = true;
        for i in 0..d {
            let mut xi = spec.mean()[i];
            for k in 0..=i {
                xi += l.get(i, k) * z[k];
            }
            if xi < 0.0 {
                inside = false;
                break;
            }
        }
        if inside {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    Ok(McEstimate {
        estimate: p,
        std_error: (p * (1.0 - p) / samples as f64).sqrt(),
        samples,
        seed,
    })
}

/// Orthant probability of the equicorrelated model (unit variances,
/// constant correlation rho >= 0) with optional per-coordinate means,
/// through the classical one-dimensional reduction
///   integral of phi(s) prod_i Phi((sqrt(rho) s + mu_i) / sqrt(1-rho)) ds.
pub fn equicorrelated_reference(d: usize, rho: f64, shifts: Option<&[f64]>) -> Result<f64> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::InvalidRho {
            rho,
            range: "[0, 1)",
        });
    }
    let zeros = vec![0.0; d];
    let mu = shifts.unwrap_or(&zeros);
    assert_eq!(mu.len(), d);
    if rho == 0.0 {
        return Ok(mu.iter().map(|m| normal_cdf(*m)).product());
    }
    let sq_rho = rho.sqrt();
    let sq_rest = (1.0 - rho).sqrt();
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let integrand = |s: f64| -> f64 {
        let mut prod = norm * (-0.5 * s * s).exp();
        for m in mu {
            prod *= normal_cdf((sq_rho * s + m) / sq_rest);
        }
        prod
    };
    Ok(adaptive_simpson(&integrand, -10.0, 10.0, 1e-13))
}

/// Zero-mean bivariate orthant probability 1/4 + arcsin(rho) / (2 pi).
pub fn bivariate_reference(rho: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&rho) || rho.abs() == 1.0 {
        return Err(Error::InvalidRho {
            rho,
            range: "(-1, 1)",
        });
    }
    Ok(0.25 + rho.asin() / (2.0 * std::f64::consts::PI))
}

/// Univariate orthant probability P(X >= 0) = Phi(mu / sqrt(var)).
pub fn univariate_reference(mu: f64, var: f64) -> Result<f64> {
    if !(var > 0.0) {
        return Err(Error::InvalidVariance { var });
    }
    Ok(normal_cdf(mu / var.sqrt()))
}

/// Direct quadrature of the defining integral
///   g_J = integral over the positive orthant of exp(t' x_J t + y_J' t),
/// for |J| <= 3. The box is truncated where the Gaussian envelope falls
/// below 1e-18 of its peak.
pub fn direct_g_quadrature(x: &Matrix, y: &[f64], subset: SubsetIndex) -> Result<f64> {
    let members: Vec<usize> = subset.members().collect();
    let s = members.len();
    if s == 0 {
        return Ok(1.0);
    }
    if s > 3 {
        return Err(Error::TooHighDimension { size: s });
    }
    let mut a = Matrix::zeros(s); // -2 x_J, positive definite
    let mut ysub = vec![0.0; s];
    for (p, &i) in members.iter().enumerate() {
        ysub[p] = y[i];
        for (q, &j) in members.iter().enumerate() {
            a.set(p, q, -2.0 * x.get(i, j));
        }
    }
    let sigma = spd_inverse(&a).map_err(|minor| Error::SingularSubmatrix {
        mask: subset.mask(),
        minor,
    })?;

    // crude but safe PD lower bound: lambda_min(-x_J) >= 1/(2 tr Sigma_J)
    let trace: f64 = (0..s).map(|p| sigma.get(p, p)).sum();
    let lam = 1.0 / (2.0 * trace);
    let ynorm = ysub.iter().map(|v| v * v).sum::<f64>().sqrt();
    // envelope exp(-lam r^2 + |y| r) below 1e-18 of the peak beyond r
    let ln_floor = 18.0 * std::f64::consts::LN_10 * 1.2;
    let radius = ((ynorm + (ynorm * ynorm + 4.0 * lam * ln_floor).sqrt()) / (2.0 * lam)) * 1.2;

    let (n, panels) = if s == 3 { (24, 3) } else { (40, 4) };
    let (nodes, weights) = composite_gauss_legendre(0.0, radius, n, panels);

    let exponent = |t: &[f64]| -> f64 {
        let mut h = 0.0;
        for p in 0..s {
            h += ysub[p] * t[p];
            for q in 0..s {
                // a = -2 x_J, so t' x t = -(1/2) t' a t
                h -= 0.5 * a.get(p, q) * t[p] * t[q];
            }
        }
        h
    };

    let mut total = 0.0;
    match s {
        1 => {
            for (t1, w1) in nodes.iter().zip(&weights) {
                total += w1 * exponent(&[*t1]).exp();
            }
        }
        2 => {
            for (t1, w1) in nodes.iter().zip(&weights) {
                for (t2, w2) in nodes.iter().zip(&weights) {
                    total += w1 * w2 * exponent(&[*t1, *t2]).exp();
                }
            }
        }
        _ => {
            for (t1, w1) in nodes.iter().zip(&weights) {
                for (t2, w2) in nodes.iter().zip(&weights) {
                    let mut inner = 0.0;
                    for (t3, w3) in nodes.iter().zip(&weights) {
                        inner += w3 * exponent(&[*t1, *t2, *t3]).exp();
                    }
                    total += w1 * w2 * inner;
                }
            }
        }
    }
    Ok(total)
}

/// Random correlation matrix: normalized Gram matrix of `dim` Gaussian
/// vectors in dimension `dim + 2`. Positive definite almost surely.
pub fn random_correlation(dim: usize, rng: &mut impl Rng) -> Matrix {
    let k = dim + 2;
    let rows: Vec<Vec<f64>> = (0..dim)
        .map(|_| (0..k).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
        .collect();
    let mut gram = Matrix::zeros(dim);
    for i in 0..dim {
        for j in i..dim {
            let dot: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
            gram.set_sym(i, j, dot);
        }
    }
    let mut corr = Matrix::identity(dim);
    for i in 0..dim {
        for j in (i + 1)..dim {
            let v = gram.get(i, j) / (gram.get(i, i) * gram.get(j, j)).sqrt();
            corr.set_sym(i, j, v);
        }
    }
    corr
}
