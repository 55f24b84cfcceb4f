//! Closed-form enumeration of real Z-eigenpairs.
//!
//! For a decomposition `S = Σ λᵢ uᵢ^∘m` every nonempty index set `A`
//! yields eigenpairs: with `c̃ᵢ` a real `(m−2)`-th root of `1/λᵢ`,
//! `ũ = Σ_{i∈A} c̃ᵢ uᵢ` satisfies `S ũ^{m−1} = ũ`, so `u = ũ/l` with
//! `l = ‖ũ‖` is a Z-eigenvector with eigenvalue `1/l^{m−2}`.
//!
//! Only real roots are materialized. For odd `m` the positive root is the
//! only real one, giving `2^r − 1` real classes. For even `m` each `c̃ᵢ`
//! may also be negated; since `u` and `−u` belong to the same class, the
//! first selected coefficient is kept positive, giving `(3^r − 1)/2`
//! classes. Both real-count formulas follow from restricting the complex
//! root count to real roots rather than from a closed statement.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::linalg::{fmax, norm};
use crate::odt::OrthoDiagDecomp;
use crate::tol;

/// Nonempty, sorted, zero-based subset of the decomposition columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSelection {
    indices: Vec<usize>,
}

impl IndexSelection {
    pub fn new(mut indices: Vec<usize>, rank: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidSelection("selection must be nonempty".into()));
        }
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSelection(format!(
                "repeated index in {indices:?}"
            )));
        }
        if let Some(&last) = indices.last() {
            if last >= rank {
                return Err(Error::InvalidSelection(format!(
                    "index {last} out of range for rank {rank}"
                )));
            }
        }
        Ok(Self { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn k(&self) -> usize {
        self.indices.len()
    }
}

/// Raw roots `c̃ᵢ`, their norm `l` and normalized `cᵢ = c̃ᵢ/l`, in selection order.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub raw: Vec<f64>,
    pub normalizer: f64,
    pub normalized: Vec<f64>,
}

/// One real Z-eigenpair together with how it was built.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub eigenvalue: f64,
    pub eigenvector: Vec<f64>,
    pub selection: IndexSelection,
    pub coefficients: Coefficients,
    /// `±1` per selected index; `None` for odd order.
    pub signs: Option<Vec<i8>>,
    /// `‖S u^{m−1} − λu‖_max`.
    pub residual: f64,
}

impl Eigenpair {
    pub fn k(&self) -> usize {
        self.selection.k()
    }
}

#[derive(Debug, Clone)]
pub struct EnumerationReport {
    pub order: usize,
    pub dim: usize,
    pub rank: usize,
    pub pairs: Vec<Eigenpair>,
    pub real_class_count: usize,
    pub complex_class_count: u128,
    pub bound: u128,
    pub max_residual: f64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EnumerateOptions {
    /// Permit ranks above [`tol::MAX_ENUM_RANK`].
    pub allow_large_rank: bool,
}

fn positive_root(lambda: f64, order: usize) -> f64 {
    if order == 3 {
        1.0 / lambda
    } else {
        lambda.powf(-1.0 / (order - 2) as f64)
    }
}

pub fn coefficients_for(
    selection: &IndexSelection,
    lambdas: &[f64],
    order: usize,
    signs: Option<&[i8]>,
) -> Result<Coefficients> {
    if order < 3 {
        return Err(Error::OrderTooSmall(order));
    }
    let even = order.is_multiple_of(2);
    if let Some(s) = signs {
        if !even {
            return Err(Error::SignPatternForOddOrder(order));
        }
        if s.len() != selection.k() || s.iter().any(|&x| x != 1 && x != -1) {
            return Err(Error::InvalidSelection(format!(
                "sign pattern {s:?} must hold one ±1 per selected index ({})",
                selection.k()
            )));
        }
    }
    let mut raw = Vec::with_capacity(selection.k());
    for (pos, &i) in selection.indices().iter().enumerate() {
        let lambda = *lambdas.get(i).ok_or_else(|| {
            Error::InvalidSelection(format!(
                "index {i} out of range for {} lambdas",
                lambdas.len()
            ))
        })?;
        if !(lambda > 0.0) {
            return Err(Error::NonPositiveLambda {
                index: i + 1,
                value: lambda,
            });
        }
        let sign = signs.map_or(1.0, |s| f64::from(s[pos]));
        raw.push(sign * positive_root(lambda, order));
    }
    let normalizer = norm(&raw);
    let normalized = raw.iter().map(|c| c / normalizer).collect();
    Ok(Coefficients {
        raw,
        normalizer,
        normalized,
    })
}

/// Builds `(1/l^{m−2}, U c)` for one selection and sign pattern. The
/// residual is measured through the rank-one form of `d`.
pub fn assemble_eigenpair(
    d: &OrthoDiagDecomp,
    selection: &IndexSelection,
    signs: Option<&[i8]>,
) -> Result<Eigenpair> {
    if selection.indices().last().is_some_and(|&i| i >= d.rank()) {
        return Err(Error::InvalidSelection(format!(
            "selection {:?} out of range for rank {}",
            selection.indices(),
            d.rank()
        )));
    }
    let coefficients = coefficients_for(selection, d.lambdas(), d.order(), signs)?;
    let n = d.dim();
    let u = d.u_matrix();
    let mut eigenvector = vec![0.0; n];
    for (&i, &c) in selection.indices().iter().zip(&coefficients.normalized) {
        for (k, v) in eigenvector.iter_mut().enumerate() {
            *v += c * u[(k, i)];
        }
    }
    let eigenvalue = coefficients.normalizer.powi(-((d.order() - 2) as i32));
    let residual = d.eigen_residual(eigenvalue, &eigenvector)?;
    if !(residual <= tol::EIGEN_RESIDUAL) {
        return Err(Error::Residual {
            residual,
            bound: tol::EIGEN_RESIDUAL,
        });
    }
    Ok(Eigenpair {
        eigenvalue,
        eigenvector,
        selection: selection.clone(),
        coefficients,
        signs: signs.map(<[i8]>::to_vec),
        residual,
    })
}

/// Sign patterns of length `k` in binary order (bit set = negative, first
/// position most significant) whose first entry is positive.
fn canonical_sign_patterns(k: usize) -> impl Iterator<Item = Vec<i8>> {
    (0..1usize << k)
        .map(move |bits| {
            (0..k)
                .map(|p| if bits >> (k - 1 - p) & 1 == 1 { -1 } else { 1 })
                .collect::<Vec<i8>>()
        })
        .filter(|s| s[0] == 1)
}

pub fn enumerate_real(d: &OrthoDiagDecomp) -> Result<EnumerationReport> {
    enumerate_real_with(d, EnumerateOptions::default())
}

/// One eigenpair per real equivalence class, ordered by `k`, then
/// lexicographically by index set, then by sign pattern. Residuals are
/// re-measured against the materialized dense tensor.
pub fn enumerate_real_with(
    d: &OrthoDiagDecomp,
    opts: EnumerateOptions,
) -> Result<EnumerationReport> {
    d.ensure_valid()?;
    let (m, n, r) = (d.order(), d.dim(), d.rank());
    if r > tol::MAX_ENUM_RANK && !opts.allow_large_rank {
        return Err(Error::TooManyClasses {
            rank: r,
            limit: tol::MAX_ENUM_RANK,
        });
    }
    let dense = d.materialize()?;
    let even = m % 2 == 0;

    let mut pairs = Vec::new();
    for k in 1..=r {
        for combo in (0..r).combinations(k) {
            let selection = IndexSelection::new(combo, r)?;
            let patterns: Vec<Option<Vec<i8>>> = if even {
                canonical_sign_patterns(k).map(Some).collect()
            } else {
                vec![None]
            };
            for signs in patterns {
                let mut pair = assemble_eigenpair(d, &selection, signs.as_deref())?;
                pair.residual = dense.eigen_residual(pair.eigenvalue, &pair.eigenvector)?;
                if !(pair.residual <= tol::EIGEN_RESIDUAL) {
                    return Err(Error::Residual {
                        residual: pair.residual,
                        bound: tol::EIGEN_RESIDUAL,
                    });
                }
                pairs.push(pair);
            }
        }
    }

    let max_residual = pairs.iter().map(|p| p.residual).fold(0.0, fmax);
    Ok(EnumerationReport {
        order: m,
        dim: n,
        rank: r,
        real_class_count: pairs.len(),
        complex_class_count: count_complex_classes(m, r)?,
        bound: theoretical_bound(m, n)?,
        max_residual,
        pairs,
    })
}

fn class_count(order: usize, exponent: usize) -> Result<u128> {
    if order < 3 {
        return Err(Error::OrderTooSmall(order));
    }
    if exponent == 0 {
        return Err(Error::InvalidArgument("rank/dimension must be >= 1".into()));
    }
    let overflow = || Error::CountOverflow { order, exponent };
    let base = (order - 1) as u128;
    let power = u32::try_from(exponent)
        .ok()
        .and_then(|e| base.checked_pow(e))
        .ok_or_else(overflow)?;
    let divisor = (order - 2) as u128;
    let numerator = power - 1;
    // (m−1)^r − 1 = ((m−2) + 1)^r − 1 is always a multiple of m − 2
    assert_eq!(numerator % divisor, 0, "class count not integral");
    Ok(numerator / divisor)
}

/// Equivalence classes over ℂ: `((m−1)^r − 1)/(m−2)`.
pub fn count_complex_classes(order: usize, rank: usize) -> Result<u128> {
    class_count(order, rank)
}

/// Upper bound `M(m, n) = ((m−1)^n − 1)/(m−2)` on the number of classes.
pub fn theoretical_bound(order: usize, dim: usize) -> Result<u128> {
    class_count(order, dim)
}

/// Real classes: `2^r − 1` for odd `m`, `(3^r − 1)/2` for even `m`.
pub fn real_class_count(order: usize, rank: usize) -> Result<u128> {
    if order < 3 {
        return Err(Error::OrderTooSmall(order));
    }
    if rank == 0 {
        return Err(Error::InvalidArgument("rank must be >= 1".into()));
    }
    let overflow = || Error::CountOverflow {
        order,
        exponent: rank,
    };
    let e = u32::try_from(rank).map_err(|_| overflow())?;
    if order % 2 == 1 {
        Ok(2u128.checked_pow(e).ok_or_else(overflow)? - 1)
    } else {
        Ok((3u128.checked_pow(e).ok_or_else(overflow)? - 1) / 2)
    }
}
