//! Magnetic polarizability tensor (MPT) spectral signatures of conducting,
//! possibly magnetic, objects.
//!
//! The crate computes the 3x3 complex symmetric MPT as a function of the
//! excitation frequency from a parametrized complex-symmetric finite element
//! system `A[w] = K - iwC + eM`. Frequency sweeps are accelerated with a
//! projected proper-orthogonal-decomposition reduced-order model whose
//! predictions carry a-posteriori error certificates, and the snapshot set can
//! be enriched greedily where the certificates are largest.
//!
//! Models come from two sources: a built-in radially reduced conducting
//! sphere (used throughout the test suite, since the sphere has a classical
//! closed-form solution to compare against), or externally assembled matrices
//! ingested through a JSON manifest plus Matrix Market files.
//!
//! Module map:
//! - [`linalg`]: sparse/dense complex primitives (complex-symmetric CG,
//!   truncated SVD, quadratic forms, 3x3 symmetric eigenvalues).
//! - [`fom`]: full-order models, skin-depth utilities, boundary-layer grading,
//!   manifest ingest/export.
//! - [`mpt`]: tensor assembly (IM/FMM evaluation), sphere oracle, invariants,
//!   size scaling, dipole voltage prediction, CSV export.
//! - [`pod`]: snapshot matrices, reduced bases and operators, the precomputed
//!   small-matrix tensor evaluation (MM).
//! - [`certify`]: residual factorization and error certificates.
//! - [`adapt`]: greedy adaptive snapshot selection.
//! - [`cli`]: configuration and the command implementations behind the
//!   `mptrom` binary.

pub mod adapt;
pub mod certify;
pub mod cli;
pub mod fom;
pub mod linalg;
pub mod mpt;
pub mod pod;

pub use num_complex::Complex64;
