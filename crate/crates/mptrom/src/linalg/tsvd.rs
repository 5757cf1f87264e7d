//! Truncated SVD of tall-skinny snapshot matrices.

use super::{DenseComplexMatrix, LinalgError};
use num_complex::Complex64;

/// Truncated SVD. `basis` holds the `retained` dominant left singular
/// vectors, `right` the matching right singular vectors, and `sigma` the full
/// (untruncated) singular spectrum in descending order.
#[derive(Debug, Clone)]
pub struct Tsvd {
    pub basis: DenseComplexMatrix,
    pub right: DenseComplexMatrix,
    pub sigma: Vec<f64>,
    pub retained: usize,
    pub tol_sigma: f64,
}

impl Tsvd {
    /// Diagonal of retained singular values.
    pub fn sigma_retained(&self) -> &[f64] {
        &self.sigma[..self.retained]
    }
}

/// Values this far below `s_1` are noise; they are clamped to zero and never
/// make it into the basis.
const ZERO_CUTOFF: f64 = 1e-14;

/// Computes the truncated SVD of `d`, retaining every mode with
/// `s_k / s_1 >= tol_sigma` (at least one mode always survives).
///
/// Singular values and right vectors come from a thin Householder QR of `d`
/// followed by a dense SVD of the small triangle (rather than an
/// eigendecomposition of the Gram matrix `D^H D`, which squares the
/// condition number and cannot keep the basis orthonormal to 1e-10 across
/// wide spectra). The left basis is rebuilt as `D V inv(S)` and
/// re-orthonormalized in place: that keeps every column exactly inside the
/// snapshot range, so structurally zero rows of `d` stay exactly zero,
/// which the iterative bidiagonal SVD does not guarantee. Tests cross-check
/// the singular values against the Gram eigenvalues.
pub fn tsvd(d: &DenseComplexMatrix, tol_sigma: f64) -> Result<Tsvd, LinalgError> {
    if d.ncols() == 0 || d.nrows() == 0 {
        return Err(LinalgError::EmptyMatrix);
    }
    if !(tol_sigma > 0.0 && tol_sigma < 1.0) {
        return Err(LinalgError::InvalidTolerance(tol_sigma));
    }
    let qr = d.clone().qr();
    let svd = qr.r().svd(true, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut sigma: Vec<f64> = svd.singular_values.iter().cloned().collect();

    let s1 = sigma[0];
    if s1 <= 0.0 {
        return Err(LinalgError::DegenerateInput(
            "all singular values are zero".into(),
        ));
    }
    for s in sigma.iter_mut() {
        if *s < ZERO_CUTOFF * s1 {
            *s = 0.0;
        }
    }

    let mut retained = sigma
        .iter()
        .take_while(|&&s| s / s1 >= tol_sigma && s > 0.0)
        .count();
    retained = retained.max(1);

    let right = v_t.rows(0, retained).adjoint();
    let mut basis = d * &right;
    for k in 0..retained {
        if sigma[k] > 0.0 {
            let inv = Complex64::new(1.0 / sigma[k], 0.0);
            for v in basis.column_mut(k).iter_mut() {
                *v *= inv;
            }
        }
    }
    // Modified Gram-Schmidt pass: restores orthonormality lost to the
    // sigma^-1 amplification of the smallest retained modes while staying
    // inside the snapshot range.
    for k in 0..retained {
        for j in 0..k {
            let proj: Complex64 = (0..basis.nrows())
                .map(|r| basis[(r, j)].conj() * basis[(r, k)])
                .sum();
            for r in 0..basis.nrows() {
                let corr = proj * basis[(r, j)];
                basis[(r, k)] -= corr;
            }
        }
        let norm: f64 = basis.column(k).norm();
        if norm > 0.0 {
            let inv = Complex64::new(1.0 / norm, 0.0);
            for v in basis.column_mut(k).iter_mut() {
                *v *= inv;
            }
        }
    }
    Ok(Tsvd {
        basis,
        right,
        sigma,
        retained,
        tol_sigma,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn xorshift(state: &mut u64) -> f64 {
        *state ^= *state << 13;
        *state ^= *state >> 7;
        *state ^= *state << 17;
        (*state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseComplexMatrix {
        let mut s = seed;
        DenseComplexMatrix::from_fn(rows, cols, |_, _| c(xorshift(&mut s), xorshift(&mut s)))
    }

    fn orthonormality_defect(u: &DenseComplexMatrix) -> f64 {
        let gram = u.adjoint() * u;
        let mut defect: f64 = 0.0;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((gram[(i, j)] - c(target, 0.0)).norm());
            }
        }
        defect
    }

    #[test]
    fn duplicated_column_is_rank_one() {
        let q = nalgebra::DVector::from_vec(vec![c(1.0, 1.0), c(0.0, -2.0), c(3.0, 0.0)]);
        let mut d = DenseComplexMatrix::zeros(3, 2);
        d.set_column(0, &q);
        d.set_column(1, &q);
        let t = tsvd(&d, 1e-10).unwrap();
        assert_eq!(t.retained, 1);
        assert!(t.sigma[1].abs() < 1e-12 * t.sigma[0]);
    }

    #[test]
    fn truncation_rule_drops_small_modes() {
        // Orthogonal columns with norms 1 and 1e-8; tol 1e-6 keeps one mode.
        let mut d = DenseComplexMatrix::zeros(4, 2);
        d[(0, 0)] = c(1.0, 0.0);
        d[(1, 1)] = c(1e-8, 0.0);
        let t = tsvd(&d, 1e-6).unwrap();
        assert_eq!(t.retained, 1);
        assert!((t.sigma[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn near_unit_tolerance_keeps_only_dominant_mode() {
        let d = random_matrix(30, 5, 11);
        let t = tsvd(&d, 1.0 - 1e-16).unwrap();
        assert_eq!(t.retained, 1);
    }

    #[test]
    fn singular_values_match_gram_eigenvalue_oracle() {
        let d = random_matrix(200, 13, 0x5eed);
        let t = tsvd(&d, 1e-12).unwrap();

        // Oracle: eigenvalues of D^H D are the squared singular values.
        let gram = d.adjoint() * &d;
        let mut eigs: Vec<f64> = gram.symmetric_eigen().eigenvalues.iter().cloned().collect();
        eigs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for (k, lam) in eigs.iter().enumerate() {
            let s_oracle = lam.max(0.0).sqrt();
            assert!(
                (t.sigma[k] - s_oracle).abs() <= 1e-10 * t.sigma[0],
                "sigma[{k}]: {} vs oracle {}",
                t.sigma[k],
                s_oracle
            );
        }
    }

    #[test]
    fn basis_is_orthonormal_and_sorted() {
        let d = random_matrix(100, 9, 3);
        let t = tsvd(&d, 1e-12).unwrap();
        assert!(orthonormality_defect(&t.basis) < 1e-10);
        for w in t.sigma.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(t.sigma.iter().all(|&s| s >= 0.0));
    }

    #[test]
    fn truncated_reconstruction_error_is_next_singular_value() {
        let d = random_matrix(60, 8, 17);
        let t = tsvd(&d, 1e-3).unwrap();
        let m = t.retained;
        if m < 8 {
            let sig = DenseComplexMatrix::from_fn(m, m, |i, j| {
                if i == j {
                    c(t.sigma[i], 0.0)
                } else {
                    c(0.0, 0.0)
                }
            });
            let approx = &t.basis * sig * t.right.adjoint();
            let diff = &d - approx;
            // Spectral norm of the residual via its largest singular value.
            let rest = diff.svd(false, false);
            let top = rest
                .singular_values
                .iter()
                .cloned()
                .fold(0.0f64, f64::max);
            assert!(
                (top - t.sigma[m]).abs() <= 1e-9 * t.sigma[0],
                "|D - D_M| = {top} vs s_(M+1) = {}",
                t.sigma[m]
            );
        }
    }

    #[test]
    fn empty_and_degenerate_inputs_error() {
        let empty = DenseComplexMatrix::zeros(4, 0);
        assert!(matches!(tsvd(&empty, 0.5), Err(LinalgError::EmptyMatrix)));
        let zeros = DenseComplexMatrix::zeros(4, 2);
        assert!(matches!(
            tsvd(&zeros, 0.5),
            Err(LinalgError::DegenerateInput(_))
        ));
    }
}
