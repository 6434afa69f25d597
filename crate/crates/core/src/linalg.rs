//! Dense complex matrices and a cyclic Jacobi eigensolver for Hermitian
//! matrices.
//!
//! Everything in this crate works on small matrices (antenna counts, a
//! handful of eigenmodes), so the storage is a plain row-major `Vec` and the
//! eigensolver is the unconditionally robust Jacobi sweep rather than a
//! blocked QR. Eigenvalues come back sorted in descending order with the
//! eigenvector columns permuted to match.

use std::fmt;

use num_complex::Complex64;

/// Off-diagonal sweep threshold for the Jacobi iteration, relative to the
/// Frobenius norm of the input.
const JACOBI_TOL: f64 = 1e-12;

/// Maximum number of full Jacobi sweeps before giving up.
const JACOBI_MAX_SWEEPS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// Matrix is not square where a square one is required.
    NotSquare { rows: usize, cols: usize },
    /// Matrix is not Hermitian within the stated tolerance.
    NotHermitian { max_asym: f64 },
    /// Jacobi sweeps failed to reduce the off-diagonal mass.
    NoConvergence,
    /// Dimension mismatch in a binary operation.
    DimensionMismatch,
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::NotSquare { rows, cols } => {
                write!(f, "matrix is {rows}x{cols}, expected square")
            }
            LinalgError::NotHermitian { max_asym } => {
                write!(f, "matrix is not Hermitian (max asymmetry {max_asym:.3e})")
            }
            LinalgError::NoConvergence => write!(f, "Jacobi iteration did not converge"),
            LinalgError::DimensionMismatch => write!(f, "matrix dimension mismatch"),
        }
    }
}

impl std::error::Error for LinalgError {}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build from a row-major slice of entries.
    pub fn from_rows(rows: usize, cols: usize, entries: &[Complex64]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count mismatch");
        CMatrix {
            rows,
            cols,
            data: entries.to_vec(),
        }
    }

    /// Real diagonal matrix embedded as complex.
    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "inner dimension mismatch");
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> CMatrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= s;
        }
        out
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (v, w) in out.data.iter_mut().zip(other.data.iter()) {
            *v += *w;
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest |a_ij - conj(a_ji)| over all pairs.
    pub fn hermitian_defect(&self) -> f64 {
        debug_assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermitian_defect() <= tol
    }

    /// Re Tr(self * other) without forming the product.
    pub fn trace_of_product(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.cols, other.rows);
        assert_eq!(other.cols, self.rows);
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] * other[(j, i)]).re;
            }
        }
        acc
    }

    /// Rank-one matrix `scale * u * u^H` from a column vector.
    pub fn rank_one(u: &[Complex64], scale: f64) -> CMatrix {
        let n = u.len();
        let mut out = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = u[i] * u[j].conj() * scale;
            }
        }
        out
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Full eigendecomposition of a Hermitian matrix by cyclic Jacobi
    /// rotations. Returns eigenvalues in descending order and the unitary
    /// matrix whose columns are the matching eigenvectors.
    pub fn hermitian_eigen(&self) -> Result<HermitianEigen, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let fro = self.frobenius_norm();
        let herm_tol = 1e-10 * fro.max(1.0);
        let defect = self.hermitian_defect();
        if defect > herm_tol {
            return Err(LinalgError::NotHermitian { max_asym: defect });
        }

        let mut a = self.clone();
        // Symmetrize so accumulated asymmetry below tolerance cannot bias the sweep.
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (a[(i, j)] + a[(j, i)].conj());
                a[(i, j)] = avg;
                a[(j, i)] = avg.conj();
            }
            a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
        }
        let mut v = CMatrix::identity(n);
        let stop = JACOBI_TOL * fro.max(f64::MIN_POSITIVE);

        let mut converged = n <= 1;
        for _ in 0..JACOBI_MAX_SWEEPS {
            let mut off = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)].norm();
                }
            }
            if off <= stop {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    jacobi_rotate(&mut a, &mut v, p, q);
                }
            }
        }
        if !converged {
            return Err(LinalgError::NoConvergence);
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(j, j)].re.total_cmp(&a[(i, i)].re));
        let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
        let mut vectors = CMatrix::zeros(n, n);
        for (new_col, &old_col) in order.iter().enumerate() {
            for row in 0..n {
                vectors[(row, new_col)] = v[(row, old_col)];
            }
        }
        Ok(HermitianEigen { values, vectors })
    }

    /// Hermitian PSD square root `V diag(sqrt(max(l, 0))) V^H`.
    pub fn hermitian_sqrt(&self) -> Result<CMatrix, LinalgError> {
        let eig = self.hermitian_eigen()?;
        let n = self.rows;
        let mut out = CMatrix::zeros(n, n);
        for (k, &lam) in eig.values.iter().enumerate() {
            if lam <= 0.0 {
                continue;
            }
            let s = lam.sqrt();
            let u = eig.vectors.column(k);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += u[i] * u[j].conj() * s;
                }
            }
        }
        Ok(out)
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigendecomposition of a Hermitian matrix: `values` descending, column `k`
/// of `vectors` is the unit eigenvector for `values[k]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// Smallest eigenvalue (values are sorted descending).
    pub fn min_value(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }
}

/// One Jacobi rotation annihilating `a[(p, q)]`, applied in place to the
/// Hermitian matrix `a` and accumulated into `v`.
fn jacobi_rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let n = a.rows;
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    // Phase factor making the (p, q) entry real, then a real rotation.
    let ph = apq / r;
    let alpha = a[(p, p)].re;
    let beta = a[(q, q)].re;
    let theta = (beta - alpha) / (2.0 * r);
    let t = if theta >= 0.0 {
        1.0 / (theta + (1.0 + theta * theta).sqrt())
    } else {
        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // Column p of the rotation is (c*ph, -s), column q is (s*ph, c) in the
    // (p, q) plane; everything else is identity.
    let upp = ph * c;
    let upq = ph * s;

    for j in 0..n {
        if j == p || j == q {
            continue;
        }
        let ajp = a[(j, p)];
        let ajq = a[(j, q)];
        let new_jp = ajp * upp - ajq * s;
        let new_jq = ajp * upq + ajq * c;
        a[(j, p)] = new_jp;
        a[(p, j)] = new_jp.conj();
        a[(j, q)] = new_jq;
        a[(q, j)] = new_jq.conj();
    }
    a[(p, p)] = Complex64::new(alpha - t * r, 0.0);
    a[(q, q)] = Complex64::new(beta + t * r, 0.0);
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);

    for j in 0..n {
        let vjp = v[(j, p)];
        let vjq = v[(j, q)];
        v[(j, p)] = vjp * upp - vjq * s;
        v[(j, q)] = vjp * upq + vjq * c;
    }
}
