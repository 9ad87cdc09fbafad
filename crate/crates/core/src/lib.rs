//! Computations with real calculi over the matrix algebra Mat(N).
//!
//! A real calculus here is a tuple (Mat(N), g, (C^N)^m, phi): the full matrix
//! algebra, a real Lie algebra g acting faithfully by hermitian derivations
//! A -> [Dhat, A] with Dhat trace-free anti-hermitian, a right module of row
//! vectors, and an R-linear generating map phi from g into the module.
//!
//! The crate provides:
//! - dense complex matrices with the exact shapes and tolerances the rest of
//!   the library is built on ([`matrix`], [`spectrum`]),
//! - validated Lie algebra representations and calculus instances ([`lie`],
//!   [`calculus`]),
//! - the complete isomorphism decision for one-dimensional Lie algebras,
//!   including class counting and enumeration ([`classify`]),
//! - witness verification and bounded witness search in higher dimensions
//!   ([`iso`]),
//! - metrics, connections, Levi-Civita existence/construction and the
//!   Koszul-based Christoffel solver for free module bases ([`metric`],
//!   [`connection`]),
//! - projections realizing a calculus inside a free one, with metric and
//!   connection transport ([`projection`]).
//!
//! All numerical comparisons run through [`Tolerance`], which scales an
//! absolute epsilon by the magnitude of the data being compared.

pub mod calculus;
pub mod classify;
pub mod connection;
pub mod error;
pub mod iso;
pub mod lie;
pub mod matrix;
pub mod metric;
pub mod projection;
pub mod report;
pub mod spectrum;
pub mod tol;

pub use calculus::{canonical_diag_1d, generation_matrix, module_action, validate_calculus, validate_free_calculus, CalculusInstance, CanonicalForm, FreeCalculusInstance};
pub use classify::{anti_selfsimilar, count_classes, enumerate_classes, is_isomorphic_1d, quasi_equivalent_1d, zero_pattern, QuasiEquivalence1D, ZeroPattern};
pub use connection::{christoffel_free, connection_on_cn, koszul_rhs, lc_abelian, lc_connection_1d, lc_exists_1d, verify_pseudo_riemannian, ConnectionSpec, Lc1d, LcAbelian, PsrReport, VerifyTarget};
pub use error::{CalcError, Result};
pub use iso::{check_compatible_pair, check_free_isomorphism, check_isomorphism_witness, search_witness, IsoWitness};
pub use lie::{derivation_apply, validate_rep, LieAlgebraSpec, MatrixRep};
pub use matrix::{commutator, direct_sum, kron, unitary_with_first_row, CVector, ComplexMatrix, C64};
pub use metric::{eval_aligned_metric, eval_free_metric, eval_scalar_metric, is_real_free_metric_calculus, is_real_metric_calculus, validate_metric_on_cn, AlignedMetric, FreeMetric, MetricSpec, ScalarMetric};
pub use projection::{build_split_realization, is_orthogonal_projection, metric_symmetry_condition, project_connection, projection_from_anchor, restrict_metric, ProjectionSpec, SplitRealization};
pub use report::{CheckResult, ValidationReport};
pub use spectrum::{eig_antihermitian_sorted, rank, singular_values, SpectrumBlock, SpectrumBlocks};
pub use tol::Tolerance;
