//! Numerical tolerances shared by the library and its tests.

/// Max entry of `QᵀQ − I` for a set of columns to count as orthonormal.
pub const ORTHONORMAL: f64 = 1e-10;

/// Stricter orthonormality reached by Gram–Schmidt output.
pub const GRAM_SCHMIDT_ORTHONORMAL: f64 = 1e-12;

/// Residual norm below which Gram–Schmidt declares a column dependent.
pub const RANK_DEFICIENT: f64 = 1e-12;

/// Jacobi stops once the largest off-diagonal entry falls below this
/// (scaled by `max(1, ‖A‖_max)`).
pub const JACOBI_OFF_DIAGONAL: f64 = 1e-12;

/// Maximum number of cyclic Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// `‖VΛVᵀ − A‖_max` bound for an eigendecomposition.
pub const RECONSTRUCTION: f64 = 1e-9;

/// Allowed asymmetry `‖A − Aᵀ‖_max` of a matrix handed to the symmetric eigensolver.
pub const SYMMETRIC_INPUT: f64 = 1e-10;

/// Permutation probes of a tensor must agree to this.
pub const TENSOR_SYMMETRY: f64 = 1e-12;

/// `‖u‖ = 1` check for vectors handed in by callers.
pub const UNIT_NORM: f64 = 1e-10;

/// `‖S u^{m−1} − λu‖_max` of an enumerated eigenpair.
pub const EIGEN_RESIDUAL: f64 = 1e-10;

/// Residual an eigenpair must meet before second-order analysis.
pub const HESSIAN_PRECONDITION: f64 = 1e-8;

/// Relative width (times `max(1, λ)`) of the structural-zero band and of
/// per-entry spectrum agreement.
pub const SPECTRUM: f64 = 1e-8;

/// Power iteration counts as converged below this residual.
pub const ORACLE_CONVERGED: f64 = 1e-9;

/// Default iteration cap of the shifted power method.
pub const ORACLE_MAX_ITERS: usize = 5000;

/// Two discovered pairs closer than this (after sign canonicalization) are the same.
pub const ORACLE_DEDUP: f64 = 1e-5;

/// Discovered and enumerated pairs match when eigenvector and eigenvalue
/// both lie within this distance.
/// Oracle pairs with `|λ|` and `‖S u^{m−1}‖_max` at or below this are
/// reported as null-space discoveries.
pub const ORACLE_NULL_EIGENVALUE: f64 = 1e-8;
pub const ORACLE_MATCH: f64 = 1e-6;

/// Slack allowed on the monotone objective of the shifted iteration.
pub const ORACLE_MONOTONE_SLACK: f64 = 1e-12;

/// Enumeration refuses ranks above this without an explicit override.
pub const MAX_ENUM_RANK: usize = 20;
