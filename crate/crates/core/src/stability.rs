//! Second-order analysis of eigenpairs as stationary points of
//! `max S u^m  s.t. uᵀu = 1`.
//!
//! The Lagrangian `L(u, λ) = S u^m / m − λ(uᵀu − 1)/2` has Hessian
//! `H = (m−1) S u^{m−2} − λI`. Its restriction to the tangent space
//! `{w : uᵀw = 0}` decides local optimality. Two equivalent realizations
//! are provided: `M = P⊥ H P⊥` with `P⊥ = I − uuᵀ`, which has the tangent
//! spectrum plus one structural zero, and `Q₂ᵀ H Q₂` with `Q₂` an
//! orthonormal basis of the tangent space.
//!
//! For an eigenpair built from `k` basic vectors the spectrum of `M` is
//! `−λ` (`n−k` times), `(m−2)λ` (`k−1` times) and `0`, so `k = 1` gives an
//! isolated local maximum, `k = n` an isolated local minimum, and any other
//! `k` a saddle.

use std::fmt;

use crate::enumerate::Eigenpair;
use crate::error::{Error, Result};
use crate::linalg::{
    self, check_unit, fmax, max_abs, orthonormal_complement, Matrix, SymEigResult,
};
use crate::symtensor::SymTensor;
use crate::tol;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    IsolatedLocalMax,
    Saddle,
    IsolatedLocalMin,
}

impl Classification {
    pub fn label(self) -> &'static str {
        match self {
            Self::IsolatedLocalMax => "isolated-local-max",
            Self::Saddle => "saddle",
            Self::IsolatedLocalMin => "isolated-local-min",
        }
    }

    /// Stability vocabulary of the shifted power method literature:
    /// maxima are negative-stable, minima positive-stable.
    pub fn stability_alias(self) -> &'static str {
        match self {
            Self::IsolatedLocalMax => "negative-stable",
            Self::Saddle => "unstable",
            Self::IsolatedLocalMin => "positive-stable",
        }
    }

    /// Label predicted from the selection size alone.
    pub fn from_selection_size(k: usize, n: usize) -> Self {
        if k == 1 {
            Self::IsolatedLocalMax
        } else if k == n {
            Self::IsolatedLocalMin
        } else {
            Self::Saddle
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Closed-form spectrum of `M`: `−λ` × (n−k), `(m−2)λ` × (k−1), `0` × 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPrediction {
    pub lambda: f64,
    pub order: usize,
    pub neg_count: usize,
    pub pos_count: usize,
    pub zero_count: usize,
}

impl SpectrumPrediction {
    pub fn dim(&self) -> usize {
        self.neg_count + self.pos_count + self.zero_count
    }

    pub fn positive_value(&self) -> f64 {
        (self.order - 2) as f64 * self.lambda
    }

    /// The multiset in descending order.
    pub fn values(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.extend(std::iter::repeat_n(self.positive_value(), self.pos_count));
        v.extend(std::iter::repeat_n(0.0, self.zero_count));
        v.extend(std::iter::repeat_n(-self.lambda, self.neg_count));
        v
    }
}

pub fn predicted_spectrum(
    pair: &Eigenpair,
    order: usize,
    dim: usize,
) -> Result<SpectrumPrediction> {
    let k = pair.k();
    if k == 0 || k > dim {
        return Err(Error::InvalidSelection(format!(
            "selection of size {k} in dimension {dim}"
        )));
    }
    if order < 3 {
        return Err(Error::OrderTooSmall(order));
    }
    Ok(SpectrumPrediction {
        lambda: pair.eigenvalue,
        order,
        neg_count: dim - k,
        pos_count: k - 1,
        zero_count: 1,
    })
}

fn check_pair(s: &SymTensor, eigenvalue: f64, u: &[f64]) -> Result<()> {
    let residual = s.eigen_residual(eigenvalue, u)?;
    if !(residual <= tol::HESSIAN_PRECONDITION) {
        return Err(Error::Residual {
            residual,
            bound: tol::HESSIAN_PRECONDITION,
        });
    }
    Ok(())
}

/// `(m−1) S u^{m−2} − λI` at an eigenpair.
pub fn hessian(s: &SymTensor, pair: &Eigenpair) -> Result<Matrix> {
    check_pair(s, pair.eigenvalue, &pair.eigenvector)?;
    lagrangian_hessian(s, pair.eigenvalue, &pair.eigenvector)
}

/// The Lagrangian Hessian at any `(λ, u)`, without the eigenpair check.
pub fn lagrangian_hessian(s: &SymTensor, eigenvalue: f64, u: &[f64]) -> Result<Matrix> {
    let n = s.dim();
    let mut h = s.contract_hess(u)?.scale((s.order() - 1) as f64);
    for i in 0..n {
        h[(i, i)] -= eigenvalue;
    }
    Ok(h)
}

/// `(I − uuᵀ) H (I − uuᵀ)`.
pub fn projected_hessian(h: &Matrix, u: &[f64]) -> Result<Matrix> {
    if !h.is_square() || h.rows() != u.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} Hessian against vector of length {}",
            h.rows(),
            h.cols(),
            u.len()
        )));
    }
    let p = linalg::projector_complement(u, u.len())?;
    let m = p.matmul(h)?.matmul(&p)?;
    // symmetrize away rounding from the triple product
    Ok(m.add(&m.transpose())?.scale(0.5))
}

#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub hessian: Matrix,
    pub projected: Matrix,
    pub computed_spectrum: SymEigResult,
    pub predicted: SpectrumPrediction,
    /// Label from the selection size.
    pub classification: Classification,
    /// Label from the signs of the computed spectrum; `None` when `n = 1`
    /// leaves no tangent direction to decide it.
    pub spectrum_classification: Option<Classification>,
    /// Largest gap between sorted computed and predicted spectra.
    pub spectrum_match_error: f64,
    /// `‖Mu‖_max`.
    pub annihilation_error: f64,
    pub integrity_failure: Option<String>,
}

impl StabilityReport {
    pub fn is_consistent(&self) -> bool {
        self.integrity_failure.is_none()
    }
}

/// Reads a label off the signs of `M`'s spectrum: exactly one structural
/// zero, then all negative, all positive, or mixed.
fn classify_by_signs(
    spectrum: &[f64],
    lambda: f64,
) -> std::result::Result<Option<Classification>, String> {
    let band = tol::SPECTRUM * lambda.abs().max(1.0);
    let zeros = spectrum.iter().filter(|x| x.abs() <= band).count();
    let neg = spectrum.iter().filter(|&&x| x < -band).count();
    let pos = spectrum.iter().filter(|&&x| x > band).count();
    if zeros != 1 {
        return Err(format!(
            "expected exactly one structural zero in {spectrum:?}, found {zeros}"
        ));
    }
    let tangent = spectrum.len() - 1;
    Ok(if tangent == 0 {
        None
    } else if neg == tangent {
        Some(Classification::IsolatedLocalMax)
    } else if pos == tangent {
        Some(Classification::IsolatedLocalMin)
    } else {
        Some(Classification::Saddle)
    })
}

pub fn classify(s: &SymTensor, pair: &Eigenpair) -> Result<StabilityReport> {
    let n = s.dim();
    let h = hessian(s, pair)?;
    let projected = projected_hessian(&h, &pair.eigenvector)?;
    let computed_spectrum = linalg::sym_eig(&projected)?;
    let predicted = predicted_spectrum(pair, s.order(), n)?;
    let spectrum_match_error = computed_spectrum
        .eigenvalues
        .iter()
        .zip(predicted.values())
        .fold(0.0, |acc, (a, b)| fmax(acc, (a - b).abs()));
    let annihilation_error = max_abs(&projected.mat_vec(&pair.eigenvector)?);

    let classification = Classification::from_selection_size(pair.k(), n);
    let (spectrum_classification, integrity_failure) =
        match classify_by_signs(&computed_spectrum.eigenvalues, pair.eigenvalue) {
            Ok(Some(c)) if c != classification => (
                Some(c),
                Some(format!(
                    "selection size k = {} implies {classification} but the projected Hessian spectrum implies {c}",
                    pair.k()
                )),
            ),
            Ok(c) => (c, None),
            Err(msg) => (None, Some(msg)),
        };

    Ok(StabilityReport {
        hessian: h,
        projected,
        computed_spectrum,
        predicted,
        classification,
        spectrum_classification,
        spectrum_match_error,
        annihilation_error,
        integrity_failure,
    })
}

/// Compares `eig(Q₂ᵀ H Q₂) ∪ {0}` with `eig(P⊥ H P⊥)` as sorted multisets
/// and returns the largest entrywise gap.
pub fn verify_tangent_equivalence(s: &SymTensor, pair: &Eigenpair) -> Result<f64> {
    let n = s.dim();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "dimension 1 has no tangent complement".into(),
        ));
    }
    let h = hessian(s, pair)?;
    tangent_spectrum_gap(&h, &pair.eigenvector)
}

/// The comparison behind [`verify_tangent_equivalence`] for an arbitrary symmetric `h`
/// and unit `u`.
pub fn tangent_spectrum_gap(h: &Matrix, u: &[f64]) -> Result<f64> {
    check_unit(u)?;
    if u.len() < 2 {
        return Err(Error::InvalidArgument(
            "dimension 1 has no tangent complement".into(),
        ));
    }
    let basis = Matrix::from_columns(&[u.to_vec()])?;
    let q2 = orthonormal_complement(&basis)?.expect("n >= 2 leaves a nonempty complement");
    let reduced = q2.transpose().matmul(h)?.matmul(&q2)?;
    let reduced = reduced.add(&reduced.transpose())?.scale(0.5);
    let mut lifted = linalg::sym_eig(&reduced)?.eigenvalues;
    lifted.push(0.0);
    lifted.sort_by(|a, b| b.total_cmp(a));
    let full = linalg::sym_eig(&projected_hessian(h, u)?)?.eigenvalues;
    Ok(lifted
        .iter()
        .zip(&full)
        .fold(0.0, |acc, (a, b)| fmax(acc, (a - b).abs())))
}
