//! Sparse and dense complex linear algebra shared by the whole crate.
//!
//! Everything here is exact-arithmetic plumbing: a CSR complex matrix type,
//! a conjugate-gradient variant for complex *symmetric* (not Hermitian)
//! systems, a truncated SVD for tall-skinny snapshot matrices, quadratic
//! forms, and a closed-form 3x3 symmetric eigensolver.

mod cg;
mod eig3;
mod sparse;
mod tsvd;

pub use cg::{cg_solve, CgSolution, Preconditioner};
pub use eig3::{eig3_sym, eig3_sym_with_vectors};
pub use sparse::{quad_form, SparseComplexMatrix};
pub use tsvd::{tsvd, Tsvd};

use num_complex::Complex64;
use thiserror::Error;

/// Dense complex matrix, column-major.
pub type DenseComplexMatrix = nalgebra::DMatrix<Complex64>;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("index ({row}, {col}) out of bounds for {rows}x{cols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("iterative solve did not converge: {iterations} iterations, residual {residual:e} (target {target:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        target: f64,
    },
    #[error("matrix has no entries")]
    EmptyMatrix,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("matrix is not symmetric (defect {defect:e} exceeds {tol:e})")]
    NotSymmetric { defect: f64, tol: f64 },
    #[error("invalid tolerance {0}: must lie in (0, 1)")]
    InvalidTolerance(f64),
}

/// Euclidean norm of a complex slice.
pub fn norm2(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Unconjugated dot product `x^T y` (the bilinear pairing used by the
/// complex-symmetric CG).
pub fn dot_bilinear(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Hermitian dot product `conj(x)^T y`.
pub fn dot_hermitian(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}
