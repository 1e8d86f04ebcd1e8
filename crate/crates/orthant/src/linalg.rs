//! Small dense symmetric linear algebra.
//!
//! Everything here targets matrices of order at most ~20 (the subset
//! submatrices of the Pfaffian coefficients), so the routines are plain
//! unblocked loops over a row-major `Vec<f64>`.

/// Dense square matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            data.extend_from_slice(r);
        }
        Matrix { n, data }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Writes both (i,j) and (j,i) so symmetry holds structurally.
    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Cholesky factorization A = L Lᵀ of a symmetric positive definite matrix.
///
/// On failure returns the 1-based order of the leading minor whose pivot
/// was not positive.
pub fn cholesky(a: &Matrix) -> Result<Matrix, usize> {
    let n = a.n;
    let mut l = Matrix::zeros(n);
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            let v = l.get(j, k);
            d -= v * v;
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(j + 1);
        }
        let ljj = d.sqrt();
        l.set(j, j, ljj);
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / ljj);
        }
    }
    Ok(l)
}

/// Solves A z = b given the Cholesky factor L of A (forward then back
/// substitution).
pub fn chol_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.n;
    assert_eq!(b.len(), n);
    let mut z = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            z[i] -= l.get(i, k) * z[k];
        }
        z[i] /= l.get(i, i);
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            z[i] -= l.get(k, i) * z[k];
        }
        z[i] /= l.get(i, i);
    }
    z
}

/// Inverse of a symmetric positive definite matrix via its Cholesky factor.
pub fn spd_inverse(a: &Matrix) -> Result<Matrix, usize> {
    let l = cholesky(a)?;
    let n = a.n;
    let mut inv = Matrix::zeros(n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = chol_solve(&l, &e);
        e[j] = 0.0;
        for i in 0..n {
            inv.set(i, j, col[i]);
        }
    }
    // symmetrize to kill roundoff asymmetry from column-wise solves
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (inv.get(i, j) + inv.get(j, i));
            inv.set_sym(i, j, v);
        }
    }
    Ok(inv)
}

/// log det A from the Cholesky factor of A.
pub fn logdet_from_chol(l: &Matrix) -> f64 {
    (0..l.n).map(|i| l.get(i, i).ln()).sum::<f64>() * 2.0
}
