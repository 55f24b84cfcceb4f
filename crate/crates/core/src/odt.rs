//! Orthogonally diagonalizable decompositions `S = Σᵢ λᵢ uᵢ^∘m`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{dot, fmax, gram_schmidt, LinalgError, Matrix, SymEigResult};
use crate::symtensor::SymTensor;
use crate::tol;

/// Default range for randomly drawn weights.
pub const DEFAULT_LAMBDA_RANGE: (f64, f64) = (0.5, 10.0);

const MAX_DRAW_ATTEMPTS: usize = 10;

/// `n × r` orthonormal columns `U` and weights `λ₁..λ_r` of a tensor of order `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoDiagDecomp {
    order: usize,
    u: Matrix,
    lambdas: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NotOrthonormal,
    NonPositiveLambda,
    RankExceedsDim,
}

/// A failed invariant of a decomposition together with its measured size.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Zero-based column for per-column violations.
    pub index: Option<usize>,
    pub magnitude: f64,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            ViolationKind::NotOrthonormal => write!(
                f,
                "columns of U not orthonormal: max |UᵀU − I| = {:e}",
                self.magnitude
            ),
            ViolationKind::NonPositiveLambda => write!(
                f,
                "nonpositive lambda at index {} (value {})",
                self.index.map_or(0, |i| i + 1),
                self.magnitude
            ),
            ViolationKind::RankExceedsDim => {
                write!(f, "rank exceeds dimension by {}", self.magnitude)
            }
        }
    }
}

impl OrthoDiagDecomp {
    /// Checks shapes only; the orthonormality and positivity invariants
    /// are reported by [`OrthoDiagDecomp::validate`].
    pub fn new(order: usize, u: Matrix, lambdas: Vec<f64>) -> Result<Self> {
        if order < 3 {
            return Err(Error::OrderTooSmall(order));
        }
        if lambdas.len() != u.cols() {
            return Err(Error::DimensionMismatch(format!(
                "{} lambdas for {} columns of U",
                lambdas.len(),
                u.cols()
            )));
        }
        Ok(Self { order, u, lambdas })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.u.rows()
    }

    pub fn rank(&self) -> usize {
        self.u.cols()
    }

    pub fn u_matrix(&self) -> &Matrix {
        &self.u
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.u.column(i)
    }

    pub fn max_lambda(&self) -> f64 {
        self.lambdas
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Every violated invariant; empty iff the decomposition is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.rank() > self.dim() {
            out.push(Violation {
                kind: ViolationKind::RankExceedsDim,
                index: None,
                magnitude: (self.rank() - self.dim()) as f64,
            });
        }
        let deviation = self.u.orthonormality_error();
        if !(deviation <= tol::ORTHONORMAL) {
            out.push(Violation {
                kind: ViolationKind::NotOrthonormal,
                index: None,
                magnitude: deviation,
            });
        }
        for (i, &l) in self.lambdas.iter().enumerate() {
            if !(l > 0.0) {
                out.push(Violation {
                    kind: ViolationKind::NonPositiveLambda,
                    index: Some(i),
                    magnitude: l,
                });
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidDecomposition(violations))
        }
    }

    /// The dense tensor `Σ λᵢ uᵢ^∘m`.
    pub fn materialize(&self) -> Result<SymTensor> {
        self.ensure_valid()?;
        SymTensor::from_rank_one_sum(&self.lambdas, &self.u, self.order)
    }

    /// Projections `uᵢᵀx` of `x` onto the decomposition columns.
    fn projections(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok((0..self.rank())
            .map(|i| dot(&self.u.column(i), x))
            .collect())
    }

    /// `S x^m = Σ λᵢ (uᵢᵀx)^m` without materializing `S`.
    pub fn contract_full(&self, x: &[f64]) -> Result<f64> {
        let m = self.order as i32;
        Ok(self
            .projections(x)?
            .iter()
            .zip(&self.lambdas)
            .map(|(p, l)| l * p.powi(m))
            .sum())
    }

    /// `S x^{m−1} = Σ λᵢ (uᵢᵀx)^{m−1} uᵢ`.
    pub fn contract_grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        let m = self.order as i32;
        let proj = self.projections(x)?;
        let mut out = vec![0.0; self.dim()];
        for (i, (p, l)) in proj.iter().zip(&self.lambdas).enumerate() {
            let w = l * p.powi(m - 1);
            for (k, o) in out.iter_mut().enumerate() {
                *o += w * self.u[(k, i)];
            }
        }
        Ok(out)
    }

    /// `S x^{m−2} = Σ λᵢ (uᵢᵀx)^{m−2} uᵢuᵢᵀ`.
    pub fn contract_hess(&self, x: &[f64]) -> Result<Matrix> {
        let m = self.order as i32;
        let n = self.dim();
        let proj = self.projections(x)?;
        let mut out = Matrix::zeros(n, n)?;
        for (i, (p, l)) in proj.iter().zip(&self.lambdas).enumerate() {
            let w = l * p.powi(m - 2);
            for a in 0..n {
                for b in 0..n {
                    out[(a, b)] += w * self.u[(a, i)] * self.u[(b, i)];
                }
            }
        }
        Ok(out)
    }

    /// `‖S x^{m−1} − λx‖_max` through the rank-one form.
    pub fn eigen_residual(&self, eigenvalue: f64, x: &[f64]) -> Result<f64> {
        let g = self.contract_grad(x)?;
        Ok(g.iter()
            .zip(x)
            .fold(0.0, |acc, (gi, xi)| fmax(acc, (gi - eigenvalue * xi).abs())))
    }

    /// Jacobi spectrum of the Gram matrix `UᵀU`; all ones for a valid decomposition.
    pub fn gram_spectrum(&self) -> Result<SymEigResult> {
        let gram = self.u.transpose().matmul(&self.u)?;
        Ok(crate::linalg::sym_eig(&gram)?)
    }
}

/// Random decomposition: `U` orthonormalizes an `n × r` standard-normal
/// draw and each `λᵢ` is uniform in `lambda_range`. Deterministic per seed.
pub fn random_decomp(
    n: usize,
    r: usize,
    m: usize,
    lambda_range: (f64, f64),
    seed: u64,
) -> Result<OrthoDiagDecomp> {
    if m < 3 {
        return Err(Error::OrderTooSmall(m));
    }
    if r == 0 || r > n {
        return Err(Error::InvalidArgument(format!(
            "rank must satisfy 1 <= r <= n (got r = {r}, n = {n})"
        )));
    }
    let (lo, hi) = lambda_range;
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "lambda range must satisfy 0 < lo <= hi (got [{lo}, {hi}])"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last_err = None;
    for _ in 0..MAX_DRAW_ATTEMPTS {
        let draw: Vec<f64> = (0..n * r).map(|_| rng.sample(StandardNormal)).collect();
        let raw = Matrix::from_row_major(n, r, draw)?;
        match gram_schmidt(&raw) {
            Ok(u) => {
                let lambdas = (0..r).map(|_| rng.random_range(lo..=hi)).collect();
                return OrthoDiagDecomp::new(m, u, lambdas);
            }
            Err(e @ LinalgError::RankDeficient { .. }) => last_err = Some(e),
            Err(e) => return Err(e.into()),
        }
    }
    Err(last_err.expect("at least one attempt").into())
}
