//! Small dense linear-algebra kernel.
//!
//! Everything here targets matrices of dimension at most a few dozen:
//! modified Gram–Schmidt with one reorthogonalization pass, orthonormal
//! complements by extension with canonical basis vectors, the complement
//! projector `I − uuᵀ`, and a cyclic Jacobi eigensolver for symmetric input.

use std::fmt;
use std::ops::{Index, IndexMut};

use thiserror::Error;

use crate::tol;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix must have at least one row and one column (got {rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("column {column} is linearly dependent on its predecessors (residual {residual:e})")]
    RankDeficient { column: usize, residual: f64 },

    #[error("columns are not orthonormal (max |QᵀQ − I| = {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("vector is not unit length (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("matrix is not symmetric (max |A − Aᵀ| = {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error(
        "Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal {off_diagonal:e})"
    )]
    NoConvergence { sweeps: usize, off_diagonal: f64 },
}

/// Dense real matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::EmptyMatrix { rows, cols });
        }
        Ok(Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        })
    }

    pub fn identity(n: usize) -> Result<Self, LinalgError> {
        let mut m = Self::zeros(n, n)?;
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        Ok(m)
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::EmptyMatrix { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(LinalgError::Shape(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LinalgError::Shape("ragged rows".into()));
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    /// Builds a matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(LinalgError::Shape("columns of unequal length".into()));
        }
        let mut m = Self::zeros(rows, columns.len())?;
        for (j, col) in columns.iter().enumerate() {
            for (i, &x) in col.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        Ok(m)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self, LinalgError> {
        let mut m = Self::zeros(diag.len(), diag.len())?;
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        Ok(m)
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix {
            rows: self.cols,
            cols: self.rows,
            data: vec![0.0; self.data.len()],
        };
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols)?;
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn mat_vec(&self, x: &[f64]) -> Result<Vec<f64>, LinalgError> {
        if x.len() != self.cols {
            return Err(LinalgError::Shape(format!(
                "vector of length {} against {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix, LinalgError> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix, LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    /// `‖self − other‖_max`; panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |acc, (a, b)| fmax(acc, (a - b).abs()))
    }

    /// `‖A − Aᵀ‖_max`, or infinity for a non-square matrix.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// `‖QᵀQ − I‖_max` over the columns of `self`.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for a in 0..self.cols {
            for b in a..self.cols {
                let g: f64 = (0..self.rows).map(|i| self[(i, a)] * self[(i, b)]).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((g - target).abs());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `max` that propagates NaN, so a poisoned residual never reads as zero.
pub fn fmax(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |acc, x| fmax(acc, x.abs()))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |acc, (x, y)| fmax(acc, (x - y).abs()))
}

pub(crate) fn check_unit(u: &[f64]) -> Result<(), LinalgError> {
    let nrm = norm(u);
    if (nrm - 1.0).abs() > tol::UNIT_NORM || !nrm.is_finite() {
        return Err(LinalgError::NotUnit { norm: nrm });
    }
    Ok(())
}

/// Subtracts from `v` its projection on each of `basis`, twice.
fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
    }
}

/// Orthonormalizes the columns of `vectors` (modified Gram–Schmidt with
/// one reorthogonalization pass). The result spans the same space.
pub fn gram_schmidt(vectors: &Matrix) -> Result<Matrix, LinalgError> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.cols());
    for j in 0..vectors.cols() {
        let mut v = vectors.column(j);
        project_out(&mut v, &basis);
        let nrm = norm(&v);
        if nrm.is_nan() || nrm < tol::RANK_DEFICIENT {
            return Err(LinalgError::RankDeficient {
                column: j,
                residual: nrm,
            });
        }
        v.iter_mut().for_each(|x| *x /= nrm);
        basis.push(v);
    }
    Matrix::from_columns(&basis)
}

/// Returns `n − r` orthonormal columns spanning the orthogonal complement
/// of the (orthonormal) columns of `basis`.
///
/// Canonical basis vectors are added one at a time; at each step the
/// candidate with the largest residual after projection is taken, so
/// nearly dependent candidates are skipped.
pub fn orthonormal_complement(basis: &Matrix) -> Result<Option<Matrix>, LinalgError> {
    let deviation = basis.orthonormality_error();
    if deviation > tol::ORTHONORMAL {
        return Err(LinalgError::NotOrthonormal { deviation });
    }
    let n = basis.rows();
    if basis.cols() > n {
        return Err(LinalgError::Shape(format!(
            "{} columns cannot be orthonormal in dimension {n}",
            basis.cols()
        )));
    }
    let mut span = basis.columns();
    let mut added = Vec::with_capacity(n - basis.cols());
    while span.len() < n {
        let (best, nrm) = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                project_out(&mut e, &span);
                let nrm = norm(&e);
                (e, nrm)
            })
            .fold(
                (Vec::new(), -1.0),
                |acc, cand| if cand.1 > acc.1 { cand } else { acc },
            );
        let mut v: Vec<f64> = best.iter().map(|x| x / nrm).collect();
        // one more pass against the (now normalized) candidate's rounding
        project_out(&mut v, &span);
        let nrm = norm(&v);
        v.iter_mut().for_each(|x| *x /= nrm);
        span.push(v.clone());
        added.push(v);
    }
    if added.is_empty() {
        Ok(None)
    } else {
        Matrix::from_columns(&added).map(Some)
    }
}

/// `I_n − uuᵀ`, the projector onto the orthogonal complement of unit `u`.
pub fn projector_complement(u: &[f64], n: usize) -> Result<Matrix, LinalgError> {
    if u.len() != n {
        return Err(LinalgError::Shape(format!(
            "vector of length {} for dimension {n}",
            u.len()
        )));
    }
    check_unit(u)?;
    let mut p = Matrix::identity(n)?;
    for i in 0..n {
        for j in 0..n {
            p[(i, j)] -= u[i] * u[j];
        }
    }
    Ok(p)
}

/// Eigendecomposition of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymEigResult {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Column `j` belongs to `eigenvalues[j]`.
    pub eigenvectors: Matrix,
    pub sweeps: usize,
}

impl SymEigResult {
    /// `V Λ Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        let mut out = Matrix::zeros(n, n).expect("nonempty");
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            for i in 0..n {
                let vik = lam * v[(i, k)];
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)];
                }
            }
        }
        out
    }
}

fn max_off_diagonal(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max(a[(i, j)].abs());
        }
    }
    worst
}

/// Full spectrum of a symmetric matrix by cyclic Jacobi rotations.
pub fn sym_eig(a: &Matrix) -> Result<SymEigResult, LinalgError> {
    let asymmetry = a.asymmetry();
    if asymmetry > tol::SYMMETRIC_INPUT {
        return Err(LinalgError::NotSymmetric { asymmetry });
    }
    let n = a.rows();
    // symmetrize so the rotations act on an exactly symmetric matrix
    let mut work = a.add(&a.transpose())?.scale(0.5);
    let mut v = Matrix::identity(n)?;
    let threshold = tol::JACOBI_OFF_DIAGONAL * work.max_abs().max(1.0);

    let mut sweeps = 0;
    loop {
        let off = max_off_diagonal(&work);
        if off <= threshold {
            break;
        }
        if sweeps == tol::JACOBI_MAX_SWEEPS {
            return Err(LinalgError::NoConvergence {
                sweeps,
                off_diagonal: off,
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = work[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (work[(q, q)] - work[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = work[(k, p)];
                    let akq = work[(k, q)];
                    work[(k, p)] = c * akp - s * akq;
                    work[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = work[(p, k)];
                    let aqk = work[(q, k)];
                    work[(p, k)] = c * apk - s * aqk;
                    work[(q, k)] = s * apk + c * aqk;
                }
                work[(p, q)] = 0.0;
                work[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| work[(j, j)].total_cmp(&work[(i, i)]));
    let eigenvalues = order.iter().map(|&i| work[(i, i)]).collect();
    let mut eigenvectors = Matrix::zeros(n, n)?;
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            eigenvectors[(k, dst)] = v[(k, src)];
        }
    }
    Ok(SymEigResult {
        eigenvalues,
        eigenvectors,
        sweeps,
    })
}
