//! ODE integration of the Pfaffian system along the homotopy path.
//!
//! At t = 0 the coordinates are decoupled and every g_J is a product of
//! one-dimensional Gaussian integrals, so the initial state is known in
//! closed form. From there the state is advanced to t = 1 with an
//! embedded Runge-Kutta-Fehlberg 4(5) pair (default) or fixed-step RK4.

use crate::error::{Error, Result};
use crate::model::PathSpec;
use crate::pfaffian::{tangent, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Rk4Fixed,
    Rkf45Adaptive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub rtol: f64,
    pub atol: f64,
    /// Initial step for the adaptive scheme; fixed step size for RK4.
    pub initial_step: f64,
    pub max_steps: u64,
    /// Record (t, state) at every accepted step.
    pub record_samples: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rkf45Adaptive,
            rtol: 1e-10,
            atol: 1e-12,
            initial_step: 1e-3,
            max_steps: 1_000_000,
            record_samples: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.rtol < 1.0) {
            return Err(Error::InvalidConfig {
                reason: format!("rtol must be in (0,1), got {}", self.rtol),
            });
        }
        if !(self.atol > 0.0) {
            return Err(Error::InvalidConfig {
                reason: format!("atol must be positive, got {}", self.atol),
            });
        }
        if self.max_steps < 1 {
            return Err(Error::InvalidConfig {
                reason: "max_steps must be at least 1".into(),
            });
        }
        if !(self.initial_step > 0.0 && self.initial_step <= 1.0) {
            return Err(Error::InvalidConfig {
                reason: format!("initial_step must be in (0,1], got {}", self.initial_step),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub final_state: StateVector,
    pub steps_taken: u64,
    pub rejected_steps: u64,
    pub sample_points: Option<Vec<(f64, StateVector)>>,
}

/// Closed-form state at t = 0: g_J(x(0), 0) = prod_{j in J} sqrt(-pi / (4 x_jj)).
pub fn initial_state(path: &PathSpec) -> Result<StateVector> {
    let d = path.dim();
    let mut single = vec![0.0; d];
    for (j, &xjj) in path.x0_diag().iter().enumerate() {
        if xjj >= 0.0 {
            return Err(Error::NonNegativeDiagonal {
                index: j,
                value: xjj,
            });
        }
        single[j] = (-std::f64::consts::PI / (4.0 * xjj)).sqrt();
    }
    let mut state = StateVector::zeros(d);
    state.values_mut()[0] = 1.0;
    for mask in 1..(1usize << d) {
        let low = mask.trailing_zeros() as usize;
        let parent = mask & (mask - 1);
        let v = state.values()[parent] * single[low];
        state.values_mut()[mask] = v;
    }
    Ok(state)
}

/// Integrates the Pfaffian system from t = 0 to t = 1.
pub fn integrate(path: &PathSpec, config: &IntegratorConfig) -> Result<Trajectory> {
    integrate_to(path, config, 1.0)
}

/// Integrates from t = 0 to an arbitrary `t_end` in [0, 1].
pub fn integrate_to(path: &PathSpec, config: &IntegratorConfig, t_end: f64) -> Result<Trajectory> {
    config.validate()?;
    assert!((0.0..=1.0).contains(&t_end));
    match config.method {
        Method::Rkf45Adaptive => rkf45(path, config, t_end),
        Method::Rk4Fixed => rk4_fixed(path, config, t_end),
    }
}

fn axpy(state: &StateVector, terms: &[(f64, &StateVector)], h: f64) -> StateVector {
    let mut out = state.clone();
    for (c, k) in terms {
        let ch = c * h;
        for (o, v) in out.values_mut().iter_mut().zip(k.values()) {
            *o += ch * v;
        }
    }
    out
}

// Fehlberg 4(5) tableau
const A2: [f64; 1] = [1.0 / 4.0];
const A3: [f64; 2] = [3.0 / 32.0, 9.0 / 32.0];
const A4: [f64; 3] = [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0];
const A5: [f64; 4] = [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0];
const A6: [f64; 5] = [
    -8.0 / 27.0,
    2.0,
    -3544.0 / 2565.0,
    1859.0 / 4104.0,
    -11.0 / 40.0,
];
const C: [f64; 6] = [0.0, 1.0 / 4.0, 3.0 / 8.0, 12.0 / 13.0, 1.0, 1.0 / 2.0];
const B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];
const B4: [f64; 6] = [
    25.0 / 216.0,
    0.0,
    1408.0 / 2565.0,
    2197.0 / 4104.0,
    -1.0 / 5.0,
    0.0,
];

const MIN_STEP: f64 = 1e-14;
const SAFETY: f64 = 0.9;
const GROW_MAX: f64 = 5.0;
const SHRINK_MIN: f64 = 0.2;

fn rkf45(path: &PathSpec, config: &IntegratorConfig, t_end: f64) -> Result<Trajectory> {
    let mut state = initial_state(path)?;
    let mut t = 0.0_f64;
    let mut h = config.initial_step.min(t_end.max(MIN_STEP));
    let mut steps = 0u64;
    let mut rejected = 0u64;
    let mut samples = config.record_samples.then(|| vec![(0.0, state.clone())]);

    if t_end == 0.0 {
        return Ok(Trajectory {
            final_state: state,
            steps_taken: 0,
            rejected_steps: 0,
            sample_points: samples,
        });
    }

    while t < t_end {
        if steps + rejected >= config.max_steps {
            return Err(Error::MaxStepsExceeded {
                t,
                max_steps: config.max_steps,
            });
        }
        if h < MIN_STEP {
            return if state.values().iter().any(|v| v.abs() > 1e300) {
                Err(Error::NonFiniteState { t })
            } else {
                Err(Error::StepUnderflow { t, h })
            };
        }
        if t + h > t_end {
            h = t_end - t;
        }

        let k1 = tangent(t, &state, path)?;
        let k2 = tangent(t + C[1] * h, &axpy(&state, &[(A2[0], &k1)], h), path)?;
        let k3 = tangent(
            t + C[2] * h,
            &axpy(&state, &[(A3[0], &k1), (A3[1], &k2)], h),
            path,
        )?;
        let k4 = tangent(
            t + C[3] * h,
            &axpy(&state, &[(A4[0], &k1), (A4[1], &k2), (A4[2], &k3)], h),
            path,
        )?;
        let k5 = tangent(
            t + C[4] * h,
            &axpy(
                &state,
                &[(A5[0], &k1), (A5[1], &k2), (A5[2], &k3), (A5[3], &k4)],
                h,
            ),
            path,
        )?;
        let k6 = tangent(
            t + C[5] * h,
            &axpy(
                &state,
                &[
                    (A6[0], &k1),
                    (A6[1], &k2),
                    (A6[2], &k3),
                    (A6[3], &k4),
                    (A6[4], &k5),
                ],
                h,
            ),
            path,
        )?;

        let ks = [&k1, &k2, &k3, &k4, &k5, &k6];
        let mut new_state = state.clone();
        let mut err_norm = 0.0_f64;
        let mut finite = true;
        let mut positive = true;
        for idx in 0..state.values().len() {
            let old = state.values()[idx];
            let mut hi = 0.0;
            let mut lo = 0.0;
            for (s, k) in ks.iter().enumerate() {
                let kv = k.values()[idx];
                hi += B5[s] * kv;
                lo += B4[s] * kv;
            }
            let proposed = old + h * hi;
            let err = h * (hi - lo);
            new_state.values_mut()[idx] = proposed;
            if !proposed.is_finite() {
                finite = false;
                break;
            }
            if idx > 0 && proposed <= 0.0 {
                positive = false;
            }
            let scale = config.atol + config.rtol * old.abs().max(proposed.abs());
            err_norm = err_norm.max((err / scale).abs());
        }

        if !finite || !positive {
            rejected += 1;
            h *= 0.5;
            continue;
        }
        if err_norm <= 1.0 {
            // accepted: pin the inhomogeneous g_empty component
            new_state.values_mut()[0] = 1.0;
            state = new_state;
            t += h;
            steps += 1;
            if let Some(s) = samples.as_mut() {
                s.push((t, state.clone()));
            }
        } else {
            rejected += 1;
        }
        let factor = if err_norm > 0.0 {
            SAFETY * err_norm.powf(-0.2)
        } else {
            GROW_MAX
        };
        h *= factor.clamp(SHRINK_MIN, GROW_MAX);
    }

    Ok(Trajectory {
        final_state: state,
        steps_taken: steps,
        rejected_steps: rejected,
        sample_points: samples,
    })
}

fn rk4_fixed(path: &PathSpec, config: &IntegratorConfig, t_end: f64) -> Result<Trajectory> {
    let mut state = initial_state(path)?;
    let n = (t_end / config.initial_step).ceil().max(1.0) as u64;
    if n > config.max_steps {
        return Err(Error::MaxStepsExceeded {
            t: 0.0,
            max_steps: config.max_steps,
        });
    }
    let h = t_end / n as f64;
    let mut samples = config.record_samples.then(|| vec![(0.0, state.clone())]);
    for step in 0..n {
        let t = step as f64 * h;
        let k1 = tangent(t, &state, path)?;
        let k2 = tangent(t + 0.5 * h, &axpy(&state, &[(0.5, &k1)], h), path)?;
        let k3 = tangent(t + 0.5 * h, &axpy(&state, &[(0.5, &k2)], h), path)?;
        let k4 = tangent(t + h, &axpy(&state, &[(1.0, &k3)], h), path)?;
        state = axpy(
            &state,
            &[
                (1.0 / 6.0, &k1),
                (1.0 / 3.0, &k2),
                (1.0 / 3.0, &k3),
                (1.0 / 6.0, &k4),
            ],
            h,
        );
        if state.values().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t: t + h });
        }
        state.values_mut()[0] = 1.0;
        if let Some(s) = samples.as_mut() {
            s.push((t + h, state.clone()));
        }
    }
    Ok(Trajectory {
        final_state: state,
        steps_taken: n,
        rejected_steps: 0,
        sample_points: samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::model::{build_path, natural_params, ProblemSpec};
    use approx::assert_abs_diff_eq;

    const SQRT_PI_OVER_2: f64 = 1.2533141373155003;

    #[test]
    fn initial_state_identity_cov() {
        let spec = ProblemSpec::new(vec![0.0; 3], Matrix::identity(3)).unwrap();
        let path = build_path(&natural_params(&spec).unwrap());
        let s = initial_state(&path).unwrap();
        assert_eq!(s.values()[0], 1.0);
        for mask in 1..8usize {
            let size = mask.count_ones() as f64;
            assert_abs_diff_eq!(
                s.values()[mask],
                SQRT_PI_OVER_2.powf(size),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn initial_state_unit_when_diag_is_quarter_pi() {
        // x_jj = -pi/4 makes the singleton integrals exactly 1
        let params = crate::model::NaturalParams {
            x: Matrix::identity(2).scale(-std::f64::consts::PI / 4.0),
            y: vec![0.0, 0.0],
        };
        let path = build_path(&params);
        let s = initial_state(&path).unwrap();
        for v in s.values() {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn initial_state_rejects_nonnegative_diagonal() {
        let params = crate::model::NaturalParams {
            x: Matrix::from_rows(&[vec![0.5]]),
            y: vec![0.0],
        };
        let path = build_path(&params);
        assert!(matches!(
            initial_state(&path),
            Err(Error::NonNegativeDiagonal { index: 0, .. })
        ));
    }

    #[test]
    fn constant_path_returns_initial_state() {
        let spec = ProblemSpec::new(vec![0.0; 2], Matrix::identity(2)).unwrap();
        let path = build_path(&natural_params(&spec).unwrap());
        let traj = integrate(&path, &IntegratorConfig::default()).unwrap();
        let init = initial_state(&path).unwrap();
        assert_eq!(traj.final_state, init);
        assert!(traj.rejected_steps == 0);
    }

    #[test]
    fn empty_component_stays_pinned_and_positive() {
        let cov = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]);
        let spec = ProblemSpec::new(vec![0.3, -0.2], cov).unwrap();
        let path = build_path(&natural_params(&spec).unwrap());
        let mut config = IntegratorConfig::default();
        config.record_samples = true;
        let traj = integrate(&path, &config).unwrap();
        for (_, s) in traj.sample_points.as_ref().unwrap() {
            assert!(s.is_admissible());
        }
    }

    #[test]
    fn tolerance_refinement_converges() {
        let cov = Matrix::from_rows(&[
            vec![1.0, 0.4, 0.2],
            vec![0.4, 1.0, -0.3],
            vec![0.2, -0.3, 1.0],
        ]);
        let spec = ProblemSpec::new(vec![0.2, 0.0, -0.4], cov).unwrap();
        let path = build_path(&natural_params(&spec).unwrap());
        let coarse = IntegratorConfig {
            rtol: 1e-8,
            atol: 1e-10,
            ..Default::default()
        };
        let fine = IntegratorConfig {
            rtol: 5e-9,
            atol: 5e-11,
            ..Default::default()
        };
        let a = integrate(&path, &coarse).unwrap().final_state.full_value();
        let b = integrate(&path, &fine).unwrap().final_state.full_value();
        assert!((a - b).abs() / b.abs() < 10.0 * coarse.rtol);
    }

    #[test]
    fn max_steps_exceeded_is_reported() {
        let cov = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]);
        let spec = ProblemSpec::new(vec![0.3, -0.2], cov).unwrap();
        let path = build_path(&natural_params(&spec).unwrap());
        let config = IntegratorConfig {
            max_steps: 3,
            initial_step: 1e-6,
            ..Default::default()
        };
        assert!(matches!(
            integrate(&path, &config),
            Err(Error::MaxStepsExceeded { .. })
        ));
    }

    #[test]
    fn large_mean_overflows_to_nonfinite_state() {
        // tiny variance with a far-away mean: y is ~1e5 and the integral
        // overflows double precision along the path
        let spec = ProblemSpec::new(vec![10.0], Matrix::from_rows(&[vec![1e-4]])).unwrap();
        let path = build_path(&natural_params(&spec).unwrap());
        let err = integrate(&path, &IntegratorConfig::default()).unwrap_err();
        assert!(
            matches!(err, Error::NonFiniteState { .. } | Error::StepUnderflow { .. }),
            "got {err:?}"
        );
    }

    #[test]
    fn rk4_matches_adaptive_on_smooth_problem() {
        let cov = Matrix::from_rows(&[vec![1.0, 0.6], vec![0.6, 1.0]]);
        let spec = ProblemSpec::new(vec![0.0, 0.0], cov).unwrap();
        let path = build_path(&natural_params(&spec).unwrap());
        let rk4 = IntegratorConfig {
            method: Method::Rk4Fixed,
            initial_step: 1.0 / 400.0,
            ..Default::default()
        };
        let a = integrate(&path, &rk4).unwrap().final_state.full_value();
        let b = integrate(&path, &IntegratorConfig::default())
            .unwrap()
            .final_state
            .full_value();
        assert!((a - b).abs() / b < 1e-9);
    }

    #[test]
    fn config_validation() {
        let bad = IntegratorConfig {
            rtol: 2.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = IntegratorConfig {
            atol: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
