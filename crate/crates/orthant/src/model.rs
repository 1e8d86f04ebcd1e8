//! Problem definition and the parameter transform.
//!
//! The user supplies a mean vector and covariance matrix; internally the
//! engine works in the natural parameters x = -(1/2) Σ⁻¹, y = Σ⁻¹ μ, where
//! the density exponent becomes tᵀ x t + yᵀ t.

use crate::error::{Error, Result};
use crate::linalg::{cholesky, chol_solve, spd_inverse, Matrix};

/// Default cap on the problem dimension; the state vector has 2^d entries.
pub const DEFAULT_DIM_CAP: usize = 12;
/// Hard ceiling regardless of configuration.
pub const HARD_DIM_CAP: usize = 20;
/// Relative tolerance for accepting a nearly-symmetric covariance.
pub const SYMMETRY_RTOL: f64 = 1e-12;

/// A subset of coordinate indices {0, .., d-1}, stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubsetIndex(pub u32);

impl SubsetIndex {
    pub const EMPTY: SubsetIndex = SubsetIndex(0);

    /// The full set [d].
    pub fn full(dim: usize) -> Self {
        SubsetIndex(((1u64 << dim) - 1) as u32)
    }

    pub fn singleton(i: usize) -> Self {
        SubsetIndex(1 << i)
    }

    #[inline]
    pub fn mask(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    #[inline]
    pub fn without(self, i: usize) -> Self {
        SubsetIndex(self.0 & !(1 << i))
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Member indices in increasing order.
    pub fn members(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }
        })
    }
}

/// Validated orthant probability problem: X ~ N(mean, cov), asking for
/// P(X_1 >= 0, .., X_d >= 0).
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    dim: usize,
    mean: Vec<f64>,
    cov: Matrix,
}

impl ProblemSpec {
    /// Validates and constructs a problem with the default dimension cap.
    pub fn new(mean: Vec<f64>, cov: Matrix) -> Result<Self> {
        Self::with_cap(mean, cov, DEFAULT_DIM_CAP)
    }

    /// Validates and constructs with an explicit dimension cap
    /// (clamped to [`HARD_DIM_CAP`]).
    pub fn with_cap(mean: Vec<f64>, cov: Matrix, cap: usize) -> Result<Self> {
        let dim = mean.len();
        let cap = cap.min(HARD_DIM_CAP);
        if dim == 0 || dim > cap {
            return Err(Error::DimensionTooLarge { dim, cap });
        }
        assert_eq!(cov.order(), dim, "covariance order must match mean length");

        let scale = cov.max_abs();
        let tol = SYMMETRY_RTOL * scale;
        let mut sym = cov.clone();
        for i in 0..dim {
            for j in (i + 1)..dim {
                let delta = (cov.get(i, j) - cov.get(j, i)).abs();
                if delta > tol {
                    return Err(Error::NotSymmetric { i, j, delta, tol });
                }
                // symmetrize within-tolerance inputs before use
                sym.set_sym(i, j, 0.5 * (cov.get(i, j) + cov.get(j, i)));
            }
        }
        cholesky(&sym).map_err(|minor| Error::NotPositiveDefinite { minor })?;
        Ok(ProblemSpec {
            dim,
            mean,
            cov: sym,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self) -> &Matrix {
        &self.cov
    }
}

/// Re-runs all [`ProblemSpec`] invariants; identity on success.
pub fn validate_problem(spec: ProblemSpec) -> Result<ProblemSpec> {
    ProblemSpec::with_cap(spec.mean, spec.cov, HARD_DIM_CAP)
}

/// Natural parameters x = -(1/2) Σ⁻¹ (symmetric, -x positive definite)
/// and y = Σ⁻¹ μ.
#[derive(Debug, Clone, PartialEq)]
pub struct NaturalParams {
    pub x: Matrix,
    pub y: Vec<f64>,
}

/// Transforms (Σ, μ) into the natural parameters.
pub fn natural_params(spec: &ProblemSpec) -> Result<NaturalParams> {
    let l = cholesky(spec.cov()).map_err(|minor| Error::NotPositiveDefinite { minor })?;
    let inv = spd_inverse(spec.cov()).map_err(|minor| Error::NotPositiveDefinite { minor })?;
    let x = inv.scale(-0.5);
    let y = chol_solve(&l, spec.mean());
    Ok(NaturalParams { x, y })
}

/// Straight-line homotopy from the decoupled start point to the target:
/// x(t) = (1-t) x0 + t x1 with x0 = diag(x1), and y(t) = t y1.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    x0_diag: Vec<f64>,
    x1: Matrix,
    y1: Vec<f64>,
}

impl PathSpec {
    pub fn dim(&self) -> usize {
        self.y1.len()
    }

    /// Diagonal of the start matrix x0 (equal to the diagonal of x1).
    pub fn x0_diag(&self) -> &[f64] {
        &self.x0_diag
    }

    pub fn x1(&self) -> &Matrix {
        &self.x1
    }

    pub fn y1(&self) -> &[f64] {
        &self.y1
    }

    pub fn x_at(&self, t: f64) -> Matrix {
        let d = self.dim();
        let mut x = Matrix::zeros(d);
        for i in 0..d {
            x.set(i, i, self.x0_diag[i]);
            for j in (i + 1)..d {
                x.set_sym(i, j, t * self.x1.get(i, j));
            }
        }
        x
    }

    pub fn y_at(&self, t: f64) -> Vec<f64> {
        self.y1.iter().map(|v| t * v).collect()
    }

    /// dx_ij/dt: the off-diagonal target entries; diagonal entries are
    /// constant along the path.
    #[inline]
    pub fn dx_dt(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            self.x1.get(i, j)
        }
    }

    #[inline]
    pub fn dy_dt(&self, i: usize) -> f64 {
        self.y1[i]
    }
}

/// Builds the integration path for a set of natural parameters.
pub fn build_path(params: &NaturalParams) -> PathSpec {
    let d = params.y.len();
    let x0_diag = (0..d).map(|i| params.x.get(i, i)).collect();
    PathSpec {
        x0_diag,
        x1: params.x.clone(),
        y1: params.y.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn identity_spec(d: usize) -> ProblemSpec {
        ProblemSpec::new(vec![0.0; d], Matrix::identity(d)).unwrap()
    }

    #[test]
    fn accepts_identity() {
        identity_spec(2);
    }

    #[test]
    fn rejects_indefinite() {
        let cov = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert_eq!(
            ProblemSpec::new(vec![0.0; 2], cov).unwrap_err(),
            Error::NotPositiveDefinite { minor: 2 }
        );
    }

    #[test]
    fn rejects_asymmetric() {
        let cov = Matrix::from_rows(&[vec![1.0, 0.1], vec![0.3, 1.0]]);
        assert!(matches!(
            ProblemSpec::new(vec![0.0; 2], cov).unwrap_err(),
            Error::NotSymmetric { .. }
        ));
    }

    #[test]
    fn rejects_over_cap() {
        let cov = Matrix::identity(5);
        assert_eq!(
            ProblemSpec::with_cap(vec![0.0; 5], cov, 4).unwrap_err(),
            Error::DimensionTooLarge { dim: 5, cap: 4 }
        );
    }

    #[test]
    fn natural_params_identity() {
        let p = natural_params(&identity_spec(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { -0.5 } else { 0.0 };
                assert_abs_diff_eq!(p.x.get(i, j), expect, epsilon = 1e-15);
            }
            assert_eq!(p.y[i], 0.0);
        }
    }

    #[test]
    fn natural_params_scalar() {
        let spec = ProblemSpec::new(vec![2.0], Matrix::from_rows(&[vec![2.0]])).unwrap();
        let p = natural_params(&spec).unwrap();
        assert_abs_diff_eq!(p.x.get(0, 0), -0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p.y[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn natural_params_correlated_pair() {
        // closed-form inverse of [[1, .5], [.5, 1]] scaled by -1/2
        let cov = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]);
        let spec = ProblemSpec::new(vec![0.0; 2], cov).unwrap();
        let p = natural_params(&spec).unwrap();
        assert_abs_diff_eq!(p.x.get(0, 0), -2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.x.get(0, 1), 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.x.get(1, 0), 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.x.get(1, 1), -2.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn path_derivatives_and_interpolation() {
        let cov = Matrix::from_rows(&[vec![1.0, 0.5], vec![0.5, 1.0]]);
        let spec = ProblemSpec::new(vec![0.0; 2], cov).unwrap();
        let p = natural_params(&spec).unwrap();
        let path = build_path(&p);
        assert_abs_diff_eq!(path.dx_dt(0, 1), 1.0 / 3.0, epsilon = 1e-14);
        assert_eq!(path.dx_dt(0, 0), 0.0);
        assert_eq!(path.dx_dt(1, 1), 0.0);
        // x(0) is the diagonal of x1, x(1) is x1
        assert_eq!(path.x_at(0.0).get(0, 1), 0.0);
        assert_abs_diff_eq!(path.x_at(1.0).get(0, 1), 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(path.x_at(0.5).get(0, 1), 1.0 / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn diagonal_target_gives_constant_path() {
        let spec = identity_spec(3);
        let p = natural_params(&spec).unwrap();
        let path = build_path(&p);
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(path.x_at(t), p.x);
        }
    }

    #[test]
    fn y_linear_interpolation() {
        let params = NaturalParams {
            x: Matrix::identity(2).scale(-0.5),
            y: vec![1.0, -2.0],
        };
        let path = build_path(&params);
        assert_eq!(path.y_at(0.5), vec![0.5, -1.0]);
    }

    #[test]
    fn roundtrip_reconstructs_cov() {
        let cov = Matrix::from_rows(&[
            vec![2.0, 0.3, -0.4],
            vec![0.3, 1.5, 0.2],
            vec![-0.4, 0.2, 1.0],
        ]);
        let spec = ProblemSpec::new(vec![0.1, -0.2, 0.3], cov.clone()).unwrap();
        let p = natural_params(&spec).unwrap();
        let minus2x = p.x.scale(-2.0);
        let back = spd_inverse(&minus2x).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let rel = (back.get(i, j) - cov.get(i, j)).abs() / cov.max_abs();
                assert!(rel < 1e-10, "entry ({i},{j}) off by {rel:e}");
            }
        }
    }

    #[test]
    fn subset_index_basics() {
        let s = SubsetIndex(0b1011);
        assert_eq!(s.len(), 3);
        assert!(s.contains(0) && s.contains(1) && s.contains(3));
        assert!(!s.contains(2));
        assert_eq!(s.without(1).mask(), 0b1001);
        assert_eq!(s.members().collect::<Vec<_>>(), vec![0, 1, 3]);
        assert_eq!(SubsetIndex::full(4).mask(), 0b1111);
        assert!(SubsetIndex::EMPTY.is_empty());
    }
}
