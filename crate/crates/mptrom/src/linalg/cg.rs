//! Conjugate gradients for complex symmetric systems.
//!
//! `A = K - iwC + eM` is symmetric but not Hermitian, so the iteration uses
//! the unconjugated bilinear form `x^T y` in place of the Hermitian inner
//! product (the usual COCG adaptation). Convergence is declared on the true
//! Euclidean residual; when the recurrence drifts, the solve restarts from
//! the current iterate instead of returning a stale residual.

use super::{dot_bilinear, norm2, LinalgError, SparseComplexMatrix};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preconditioner {
    None,
    #[default]
    Jacobi,
}

#[derive(Debug, Clone)]
pub struct CgSolution {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    /// Achieved relative residual `|b - Ax| / |b|`.
    pub residual: f64,
    /// Preconditioned residual norms per iterate, starting with iterate 0.
    pub history: Vec<f64>,
}

/// Solves `A x = b` for complex symmetric `A` to the relative tolerance
/// `|A x - b| / |b| <= rel_tol`.
pub fn cg_solve(
    a: &SparseComplexMatrix,
    b: &[Complex64],
    rel_tol: f64,
    max_iter: usize,
    preconditioner: Preconditioner,
) -> Result<CgSolution, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::DimensionMismatch(format!(
            "cg_solve needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if b.len() != a.rows() {
        return Err(LinalgError::DimensionMismatch(format!(
            "cg_solve: rhs has {} entries for a {}x{} matrix",
            b.len(),
            a.rows(),
            a.cols()
        )));
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(LinalgError::InvalidTolerance(rel_tol));
    }

    let n = a.rows();
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(CgSolution {
            x: vec![Complex64::new(0.0, 0.0); n],
            iterations: 0,
            residual: 0.0,
            history: vec![0.0],
        });
    }

    let inv_diag: Option<Vec<Complex64>> = match preconditioner {
        Preconditioner::None => None,
        Preconditioner::Jacobi => Some(
            a.diagonal()
                .into_iter()
                .map(|d| {
                    if d.norm_sqr() > 0.0 {
                        d.finv()
                    } else {
                        Complex64::new(1.0, 0.0)
                    }
                })
                .collect(),
        ),
    };
    let apply_prec = |r: &[Complex64], z: &mut Vec<Complex64>| {
        match &inv_diag {
            Some(inv) => {
                z.clear();
                z.extend(r.iter().zip(inv).map(|(rv, iv)| rv * iv));
            }
            None => {
                z.clear();
                z.extend_from_slice(r);
            }
        };
    };
    let prec_norm = |r: &[Complex64], z: &[Complex64]| {
        r.iter()
            .zip(z)
            .map(|(rv, zv)| (rv.conj() * zv).norm())
            .sum::<f64>()
            .sqrt()
    };

    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut r = b.to_vec();
    let mut z = Vec::with_capacity(n);
    apply_prec(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot_bilinear(&r, &z);
    let mut ap = vec![Complex64::new(0.0, 0.0); n];
    let mut history = vec![prec_norm(&r, &z)];
    let mut total_iters = 0usize;

    while total_iters < max_iter {
        total_iters += 1;
        a.matvec(&p, &mut ap);
        let pap = dot_bilinear(&p, &ap);
        if pap.norm() == 0.0 {
            return Err(LinalgError::NonConvergence {
                iterations: total_iters,
                residual: norm2(&r) / b_norm,
                target: rel_tol,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        apply_prec(&r, &mut z);
        history.push(prec_norm(&r, &z));

        if norm2(&r) / b_norm <= rel_tol {
            // Recurrence says converged; confirm with the true residual and
            // restart if rounding has let them drift apart.
            let mut true_r = vec![Complex64::new(0.0, 0.0); n];
            a.matvec(&x, &mut true_r);
            for i in 0..n {
                true_r[i] = b[i] - true_r[i];
            }
            let true_rel = norm2(&true_r) / b_norm;
            if true_rel <= rel_tol {
                return Ok(CgSolution {
                    x,
                    iterations: total_iters,
                    residual: true_rel,
                    history,
                });
            }
            r = true_r;
            apply_prec(&r, &mut z);
            p = z.clone();
            rz = dot_bilinear(&r, &z);
            continue;
        }

        let rz_next = dot_bilinear(&r, &z);
        if rz.norm() == 0.0 {
            return Err(LinalgError::NonConvergence {
                iterations: total_iters,
                residual: norm2(&r) / b_norm,
                target: rel_tol,
            });
        }
        let beta = rz_next / rz;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        rz = rz_next;
    }

    Err(LinalgError::NonConvergence {
        iterations: total_iters,
        residual: norm2(&r) / b_norm,
        target: rel_tol,
    })
}
