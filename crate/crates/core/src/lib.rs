//! Z-eigenpairs of orthogonally diagonalizable symmetric tensors.
//!
//! A symmetric tensor `S = Σ λᵢ uᵢ^∘m` built from `r ≤ n` orthonormal
//! vectors `uᵢ` and positive weights `λᵢ` has every real Z-eigenpair in
//! closed form: pick a nonempty index set `A`, combine the selected
//! `uᵢ` with coefficients `(1/λᵢ)^{1/(m−2)}`, and normalize. This crate
//!
//! * builds and validates such decompositions ([`odt`]),
//! * materializes the dense tensor and its contractions ([`symtensor`]),
//! * enumerates all real eigenpairs and the class-count formulas ([`enumerate`]),
//! * classifies each eigenpair through the projected Hessian ([`stability`]),
//! * and cross-checks everything with an independent shifted power
//!   iteration and finite differences ([`oracle`]).

// `!(x > 0.0)` is used on purpose so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod enumerate;
pub mod error;
pub mod linalg;
pub mod odt;
pub mod oracle;
pub mod stability;
pub mod symtensor;
pub mod tol;

pub use enumerate::{
    assemble_eigenpair, coefficients_for, count_complex_classes, enumerate_real,
    enumerate_real_with, real_class_count, theoretical_bound, Coefficients, Eigenpair,
    EnumerateOptions, EnumerationReport, IndexSelection,
};
pub use error::{Error, Result};
pub use linalg::{
    gram_schmidt, orthonormal_complement, projector_complement, sym_eig, LinalgError, Matrix,
    SymEigResult,
};
pub use odt::{random_decomp, OrthoDiagDecomp, Violation, ViolationKind};
pub use oracle::{
    discover, discover_from_starts, fd_gradient_check, fd_hessian_check, match_discoveries,
    random_starts, shifted_power_iterate, DiscoveredPair, IterationTrace, MatchReport, PairMatch,
};
pub use stability::{
    classify, hessian, predicted_spectrum, projected_hessian, verify_tangent_equivalence,
    Classification, SpectrumPrediction, StabilityReport,
};
pub use symtensor::SymTensor;
