//! Right-hand side of the Pfaffian ODE.
//!
//! The state is the vector of subset integrals (g_J) for J over all 2^d
//! subsets, indexed by bitmask. Every partial derivative of g_J reduces to
//! a linear combination of state entries through the differential
//! recurrences:
//!
//!   d/dy_i g_J = mu_i^J g_J + sum_{j in J} sigma_ij^J g_{J\{j}}      (i in J)
//!   d/dx_ij g_J = 2 d/dy_i d/dy_j g_J                                (i<j in J)
//!
//! with coefficients Sigma_J = -(1/2) x_J^{-1} and mu^J = Sigma_J y_J.
//! Differentiating the first recurrence once more gives the second
//! y-derivative; note that mu^J is linear in y, so the product rule
//! contributes an extra sigma_ij^J g_J term:
//!
//!   d/dy_j d/dy_i g_J = sigma_ij^J g_J + mu_i^J (d/dy_j g_J)
//!                       + sum_{k in J} sigma_ik^J (d/dy_j g_{J\{k}}).
//!
//! The 2^d x 2^d coefficient matrices of the Pfaffian system are never
//! materialized; the recurrences are applied directly to the state.

use crate::error::{Error, Result};
use crate::linalg::{cholesky, chol_solve, spd_inverse, Matrix};
use crate::model::{PathSpec, SubsetIndex};

/// The 2^d subset integrals (g_J), ODE state of the Pfaffian system.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dim: usize,
    values: Vec<f64>,
}

impl StateVector {
    pub fn from_values(dim: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), 1 << dim);
        StateVector { dim, values }
    }

    pub fn zeros(dim: usize) -> Self {
        StateVector {
            dim,
            values: vec![0.0; 1 << dim],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, subset: SubsetIndex) -> f64 {
        self.values[subset.mask() as usize]
    }

    /// The entry for the full set [d], i.e. g itself.
    #[inline]
    pub fn full_value(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// g_empty = 1 and strict positivity of every entry.
    pub fn is_admissible(&self) -> bool {
        self.values[0] == 1.0 && self.values.iter().all(|v| *v > 0.0 && v.is_finite())
    }
}

/// Coefficients Sigma_J and mu^J of the recurrences for one subset,
/// indexed by position within the sorted members of J.
#[derive(Debug, Clone)]
pub struct SubsetMoments {
    pub subset: SubsetIndex,
    pub sigma: Matrix,
    pub mu: Vec<f64>,
}

/// Position of coordinate `i` among the sorted members of `mask`.
#[inline]
fn rank_in(mask: u32, i: usize) -> usize {
    (mask & ((1u32 << i) - 1)).count_ones() as usize
}

/// Computes Sigma_J = -(1/2) x_J^{-1} and mu^J = Sigma_J y_J via a
/// Cholesky factorization of -2 x_J.
pub fn subset_moments(x: &Matrix, y: &[f64], subset: SubsetIndex) -> Result<SubsetMoments> {
    let members: Vec<usize> = subset.members().collect();
    let s = members.len();
    assert!(s > 0, "subset must be nonempty");

    // a = -2 x_J; then Sigma_J = a^{-1}
    let mut a = Matrix::zeros(s);
    let mut y_sub = vec![0.0; s];
    for (p, &i) in members.iter().enumerate() {
        y_sub[p] = y[i];
        for (q, &j) in members.iter().enumerate() {
            a.set(p, q, -2.0 * x.get(i, j));
        }
    }
    let l = cholesky(&a).map_err(|minor| Error::SingularSubmatrix {
        mask: subset.mask(),
        minor,
    })?;
    let sigma = spd_inverse(&a).map_err(|minor| Error::SingularSubmatrix {
        mask: subset.mask(),
        minor,
    })?;
    let mu = chol_solve(&l, &y_sub);

    // moment consistency: -2 Sigma_J x_J = I
    debug_assert!({
        let prod = sigma.matmul(&a);
        let mut dev: f64 = 0.0;
        for p in 0..s {
            for q in 0..s {
                let expect = if p == q { 1.0 } else { 0.0 };
                dev = dev.max((prod.get(p, q) - expect).abs());
            }
        }
        dev < 1e-10
    });

    Ok(SubsetMoments {
        subset,
        sigma,
        mu,
    })
}

/// First derivative d/dy_i g_J expressed in the state; zero when i is not
/// in J.
pub fn grad_y(g: &StateVector, x: &Matrix, y: &[f64], i: usize, subset: SubsetIndex) -> Result<f64> {
    if !subset.contains(i) {
        return Ok(0.0);
    }
    let m = subset_moments(x, y, subset)?;
    Ok(grad_with_moments(g, &m, i))
}

fn grad_with_moments(g: &StateVector, m: &SubsetMoments, i: usize) -> f64 {
    let mask = m.subset.mask();
    let pi = rank_in(mask, i);
    let mut acc = m.mu[pi] * g.get(m.subset);
    for (pj, j) in m.subset.members().enumerate() {
        acc += m.sigma.get(pi, pj) * g.get(m.subset.without(j));
    }
    acc
}

/// Second derivative d/dy_i d/dy_j g_J; requires both i and j in J.
pub fn hess_yy(
    g: &StateVector,
    x: &Matrix,
    y: &[f64],
    i: usize,
    j: usize,
    subset: SubsetIndex,
) -> Result<f64> {
    assert!(
        subset.contains(i) && subset.contains(j),
        "hess_yy requires {{i,j}} within the subset"
    );
    let m = subset_moments(x, y, subset)?;
    let mask = m.subset.mask();
    let pi = rank_in(mask, i);
    let pj = rank_in(mask, j);
    let mut acc = m.sigma.get(pi, pj) * g.get(subset) + m.mu[pi] * grad_y(g, x, y, j, subset)?;
    for (pk, k) in subset.members().enumerate() {
        let child = subset.without(k);
        if child.contains(j) {
            acc += m.sigma.get(pi, pk) * grad_y(g, x, y, j, child)?;
        }
    }
    Ok(acc)
}

/// Residuals of the annihilating operators
/// 2 sum_k x_ik d/dy_i d/dy_k + y_i d/dy_i + 1 applied to g_{[d]},
/// one per coordinate. Vanishes identically on true solutions; the
/// normalized residual |r_i| / g_{[d]} is the scale-free consistency
/// diagnostic.
pub fn annihilator_residual(g: &StateVector, x: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    let d = g.dim();
    let full = SubsetIndex::full(d);
    let tables = DerivativeTables::build(g, x, y)?;
    let mut out = vec![0.0; d];
    for i in 0..d {
        let mut r = y[i] * tables.grad(full, i) + g.get(full);
        for k in 0..d {
            r += 2.0 * x.get(i, k) * tables.hess(g, full, i, k);
        }
        out[i] = r;
    }
    Ok(out)
}

/// All subset moments and first-derivative values at one path point.
/// Built once per tangent evaluation and dropped afterwards.
struct DerivativeTables {
    dim: usize,
    moments: Vec<Option<SubsetMoments>>,
    // grad[mask * d + i] = d/dy_i g_J for i in J, 0 otherwise
    grads: Vec<f64>,
}

impl DerivativeTables {
    fn build(g: &StateVector, x: &Matrix, y: &[f64]) -> Result<Self> {
        let d = g.dim();
        let n = 1usize << d;
        let mut moments = Vec::with_capacity(n);
        moments.push(None);
        for mask in 1..n as u32 {
            moments.push(Some(subset_moments(x, y, SubsetIndex(mask))?));
        }
        let mut grads = vec![0.0; n * d];
        for mask in 1..n as u32 {
            let m = moments[mask as usize].as_ref().unwrap();
            for i in SubsetIndex(mask).members() {
                grads[mask as usize * d + i] = grad_with_moments(g, m, i);
            }
        }
        Ok(DerivativeTables {
            dim: d,
            moments,
            grads,
        })
    }

    #[inline]
    fn grad(&self, subset: SubsetIndex, i: usize) -> f64 {
        self.grads[subset.mask() as usize * self.dim + i]
    }

    fn hess(&self, g: &StateVector, subset: SubsetIndex, i: usize, j: usize) -> f64 {
        let m = self.moments[subset.mask() as usize].as_ref().unwrap();
        let mask = subset.mask();
        let pi = rank_in(mask, i);
        let pj = rank_in(mask, j);
        let mut acc = m.sigma.get(pi, pj) * g.get(subset) + m.mu[pi] * self.grad(subset, j);
        for (pk, k) in subset.members().enumerate() {
            let child = subset.without(k);
            if child.contains(j) {
                acc += m.sigma.get(pi, pk) * self.grad(child, j);
            }
        }
        acc
    }
}

/// dG/dt along the path: chain rule over the moving coordinates,
///
///   dg_J/dt = sum_i (dy_i/dt) d/dy_i g_J
///           + sum_{i<j in J} (dx_ij/dt) 2 d/dy_i d/dy_j g_J.
///
/// Diagonal x terms vanish because the path keeps the diagonal fixed.
/// The entry for the empty subset is exactly zero.
pub fn tangent(t: f64, g: &StateVector, path: &PathSpec) -> Result<StateVector> {
    let d = g.dim();
    let x = path.x_at(t);
    let y = path.y_at(t);
    let tables = DerivativeTables::build(g, &x, &y)?;

    let mut out = StateVector::zeros(d);
    let n = 1usize << d;
    for mask in 1..n as u32 {
        let subset = SubsetIndex(mask);
        let mut dg = 0.0;
        for i in subset.members() {
            let v = path.dy_dt(i);
            if v != 0.0 {
                dg += v * tables.grad(subset, i);
            }
        }
        let members: Vec<usize> = subset.members().collect();
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                let v = path.dx_dt(i, j);
                if v != 0.0 {
                    dg += v * 2.0 * tables.hess(g, subset, i, j);
                }
            }
        }
        out.values_mut()[mask as usize] = dg;
    }
    Ok(out)
}
