//! A-posteriori error certificates for reduced-order tensor predictions.
//!
//! For each direction the online residual is a combination of four
//! omega-independent blocks,
//!
//! ```text
//! r_i[w] - A[w] U_i p = W_i w^(i)[w],
//! W_i = [c_hat_i | K U_i | C U_i | M U_i],   w^(i)[w] = [iw; -p; iw p; -e p],
//! ```
//!
//! so its norm in the SPD metric `S` follows from the precomputed Gram
//! matrices `G^(i,j) = W_i^H S W_j` at `O(M^2)` cost per frequency. The
//! certificate for entry `(i, j)` is
//!
//! ```text
//! Delta_ij[w] = a^3 / (8 a_LB) (|r_i|^2 + |r_j|^2 + |r_i - r_j|^2),
//! ```
//!
//! an upper bound for both the real and imaginary tensor-coefficient errors
//! of the reduced prediction, with `a_LB` a lower bound on the stability
//! constant of `A[w]` in the `S` geometry.

use crate::fom::{FomError, FullOrderModel};
use crate::linalg::{DenseComplexMatrix, LinalgError, SparseComplexMatrix};
use crate::pod::{PodError, ReducedBasis};
use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("factorization is stale: built for {expected} modes, got {found}")]
    StaleFactorization { expected: usize, found: usize },
    #[error("factorization revision {fac} does not match operators revision {ops}")]
    RevisionMismatch { fac: u64, ops: u64 },
    #[error("model too large for the dense stability estimate ({n_dofs} DOFs, cap {cap})")]
    ModelTooLarge { n_dofs: usize, cap: usize },
    #[error("stability eigen-iteration did not settle after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("probe set is empty")]
    EmptyProbeSet,
    #[error(transparent)]
    Fom(#[from] FomError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Pod(#[from] PodError),
}

/// Which metric weighs the algebraic residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NormChoice {
    /// `|r|_S`: no inner solves, the default.
    #[default]
    Primal,
    /// `|r|_{S^-1}`: the dual norm, one dense factorization of `S` offline.
    Dual,
}

/// Lower bound on the stability constant of `A[w]` against the `S` norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityConstant {
    pub alpha_lb: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    UserSupplied,
    EigenEstimated,
}

impl StabilityConstant {
    pub fn user_supplied(alpha_lb: f64) -> Self {
        assert!(alpha_lb > 0.0);
        Self {
            alpha_lb,
            provenance: Provenance::UserSupplied,
        }
    }
}

/// Certificates for one frequency: symmetric non-negative `Delta_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorCertificate {
    pub omega: f64,
    pub delta: [[f64; 3]; 3],
}

impl ErrorCertificate {
    /// The six independent entries in `11, 22, 33, 12, 13, 23` order.
    pub fn six(&self) -> [f64; 6] {
        [
            self.delta[0][0],
            self.delta[1][1],
            self.delta[2][2],
            self.delta[0][1],
            self.delta[0][2],
            self.delta[1][2],
        ]
    }

    pub fn max_entry(&self) -> f64 {
        self.delta.iter().flatten().cloned().fold(0.0, f64::max)
    }
}

/// Residual blocks and their Gram matrices in the chosen metric.
#[derive(Debug, Clone)]
pub struct ResidualFactorization {
    /// `[c_hat_i | K U_i | C U_i | M U_i]`, kept for spot checks.
    pub w_blocks: [DenseComplexMatrix; 3],
    /// `G^(i,j) = W_i^H S W_j` (or `S^-1`-weighted in dual mode).
    grams: [[DenseComplexMatrix; 3]; 3],
    pub modes: [usize; 3],
    pub epsilon: f64,
    pub norm_choice: NormChoice,
    pub revision: u64,
}

impl ResidualFactorization {
    pub fn gram(&self, i: usize, j: usize) -> &DenseComplexMatrix {
        &self.grams[i][j]
    }

    /// Rejects reduced objects built from a different basis revision.
    pub fn check_revision(&self, revision: u64) -> Result<(), CertifyError> {
        if self.revision != revision {
            return Err(CertifyError::RevisionMismatch {
                fac: self.revision,
                ops: revision,
            });
        }
        Ok(())
    }
}

/// Builds the factorization for the given basis. All `N_d`-sized work
/// happens here; certification afterwards touches only `(1 + 3M)`-sized
/// objects.
pub fn build_residual_factorization(
    fom: &FullOrderModel,
    basis: &ReducedBasis,
    norm_choice: NormChoice,
) -> Result<ResidualFactorization, CertifyError> {
    let n = fom.n_dofs;
    if basis.bases[0].basis.nrows() != n {
        return Err(CertifyError::DimensionMismatch(format!(
            "basis has {} rows, model has {} DOFs",
            basis.bases[0].basis.nrows(),
            n
        )));
    }
    let s = fom.norm_matrix();

    let mut w_blocks: Vec<DenseComplexMatrix> = Vec::with_capacity(3);
    for dir in 0..3 {
        let u = &basis.bases[dir].basis;
        let m = u.ncols();
        let mut w = DenseComplexMatrix::zeros(n, 1 + 3 * m);
        let hat = fom.source_factor(dir)?;
        for (r, z) in hat.iter().enumerate() {
            w[(r, 0)] = *z;
        }
        let ku = fom.stiffness.mul_dense(u);
        let cu = fom.conduction.mul_dense(u);
        let mu = fom.reg_mass.mul_dense(u);
        for k in 0..m {
            w.set_column(1 + k, &ku.column(k));
            w.set_column(1 + m + k, &cu.column(k));
            w.set_column(1 + 2 * m + k, &mu.column(k));
        }
        w_blocks.push(w);
    }

    // S W_j (primal) or S^-1 W_j (dual).
    let weighted: Vec<DenseComplexMatrix> = match norm_choice {
        NormChoice::Primal => w_blocks.iter().map(|w| s.mul_dense(w)).collect(),
        NormChoice::Dual => {
            let s_dense = s.to_dense();
            let lu = s_dense.lu();
            w_blocks
                .iter()
                .map(|w| {
                    let mut z = DenseComplexMatrix::zeros(w.nrows(), w.ncols());
                    for k in 0..w.ncols() {
                        let col = w.column(k).into_owned();
                        let sol = lu.solve(&col).ok_or(CertifyError::DimensionMismatch(
                            "norm matrix is singular".into(),
                        ))?;
                        z.set_column(k, &sol);
                    }
                    Ok(z)
                })
                .collect::<Result<_, CertifyError>>()?
        }
    };

    let mut grams: [[DenseComplexMatrix; 3]; 3] =
        std::array::from_fn(|_| std::array::from_fn(|_| DenseComplexMatrix::zeros(0, 0)));
    for i in 0..3 {
        for j in i..3 {
            let g = w_blocks[i].adjoint() * &weighted[j];
            if i == j {
                // Enforce exact Hermitian structure.
                grams[i][i] = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
            } else {
                grams[j][i] = g.adjoint();
                grams[i][j] = g;
            }
        }
    }

    Ok(ResidualFactorization {
        w_blocks: [
            w_blocks.remove(0),
            w_blocks.remove(0),
            w_blocks.remove(0),
        ],
        grams,
        modes: basis.modes(),
        epsilon: fom.materials.epsilon,
        norm_choice,
        revision: basis.revision,
    })
}

/// Assembles the coefficient vector `w^(i)[w] = [iw; -p; iw p; -e p]`
/// conformal to the `W_i` block layout.
pub fn coefficient_vector(
    fac: &ResidualFactorization,
    direction: usize,
    omega: f64,
    p: &DVector<Complex64>,
) -> Result<DVector<Complex64>, CertifyError> {
    let m = fac.modes[direction];
    if p.len() != m {
        return Err(CertifyError::StaleFactorization {
            expected: m,
            found: p.len(),
        });
    }
    let iw = Complex64::new(0.0, omega);
    let eps = fac.epsilon;
    let mut w = DVector::from_element(1 + 3 * m, Complex64::new(0.0, 0.0));
    w[0] = iw;
    for k in 0..m {
        w[1 + k] = -p[k];
        w[1 + m + k] = iw * p[k];
        w[1 + 2 * m + k] = -eps * p[k];
    }
    Ok(w)
}

/// Residual norm `|r_i[w] - A[w] U_i p|_S` from the Gram factorization.
pub fn residual_norm(
    fac: &ResidualFactorization,
    direction: usize,
    omega: f64,
    p: &DVector<Complex64>,
) -> Result<f64, CertifyError> {
    let w = coefficient_vector(fac, direction, omega, p)?;
    let g = fac.gram(direction, direction);
    let quad = (w.adjoint() * g * &w)[(0, 0)];
    Ok(quad.re.max(0.0).sqrt())
}

/// Certificates for all entries at one frequency.
pub fn compute_delta(
    fac: &ResidualFactorization,
    stability: &StabilityConstant,
    omega: f64,
    p: &[DVector<Complex64>; 3],
    alpha: f64,
) -> Result<ErrorCertificate, CertifyError> {
    assert!(stability.alpha_lb > 0.0);
    let w: Vec<DVector<Complex64>> = (0..3)
        .map(|d| coefficient_vector(fac, d, omega, &p[d]))
        .collect::<Result<_, _>>()?;
    let norms_sq: Vec<f64> = (0..3)
        .map(|d| {
            let g = fac.gram(d, d);
            (w[d].adjoint() * g * &w[d])[(0, 0)].re.max(0.0)
        })
        .collect();

    let prefactor = alpha.powi(3) / (8.0 * stability.alpha_lb);
    let mut delta = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let cross = (w[i].adjoint() * fac.gram(i, j) * &w[j])[(0, 0)].re;
            let diff_sq = (norms_sq[i] + norms_sq[j] - 2.0 * cross).max(0.0);
            let value = prefactor * (norms_sq[i] + norms_sq[j] + diff_sq);
            delta[i][j] = value;
            delta[j][i] = value;
        }
    }
    Ok(ErrorCertificate { omega, delta })
}

/// Explicitly assembled residual `r_i[w] - A[w] U_i p` for spot checks.
pub fn explicit_residual(
    fom: &FullOrderModel,
    basis: &ReducedBasis,
    direction: usize,
    omega: f64,
    p: &DVector<Complex64>,
) -> Result<Vec<Complex64>, CertifyError> {
    let q = crate::pod::reconstruct(basis, direction, p)?;
    let a = fom.system_matrix(omega);
    let aq = a.matvec_alloc(&q);
    let r = crate::fom::assemble_source(fom, direction, omega)?;
    Ok(r.iter().zip(&aq).map(|(rv, av)| rv - av).collect())
}

/// Norm of a vector in the factorization's metric, for oracle comparisons.
pub fn metric_norm(
    s: &SparseComplexMatrix,
    norm_choice: NormChoice,
    v: &[Complex64],
) -> Result<f64, CertifyError> {
    match norm_choice {
        NormChoice::Primal => {
            let sv = s.matvec_alloc(v);
            let quad: Complex64 = v.iter().zip(&sv).map(|(a, b)| a.conj() * b).sum();
            Ok(quad.re.max(0.0).sqrt())
        }
        NormChoice::Dual => {
            let s_dense = s.to_dense();
            let lu = s_dense.lu();
            let rhs = DVector::from_vec(v.to_vec());
            let z = lu
                .solve(&rhs)
                .ok_or(CertifyError::DimensionMismatch("singular norm matrix".into()))?;
            let quad: Complex64 = v.iter().zip(z.iter()).map(|(a, b)| a.conj() * b).sum();
            Ok(quad.re.max(0.0).sqrt())
        }
    }
}

// ---------------------------------------------------------------------------
// Stability constant estimation
// ---------------------------------------------------------------------------

/// Hard cap for the dense stability estimate.
const DENSE_CAP: usize = 6000;
/// Safety factor applied to the estimated smallest singular value.
const SAFETY: f64 = 0.5;

/// Estimates `a_LB` as half the smallest generalized singular value of
/// `A[w]` against the `S` norm, minimized over the probe frequencies:
/// inverse-power iteration on the pencil `(A^H S^-1 A, S)`, whose smallest
/// eigenvalue is `sigma_min^2 = inf_u |A u|_{S^-1}^2 / |u|_S^2`.
pub fn estimate_alpha_lb(
    fom: &FullOrderModel,
    probes: &[f64],
) -> Result<StabilityConstant, CertifyError> {
    if probes.is_empty() {
        return Err(CertifyError::EmptyProbeSet);
    }
    if fom.n_dofs > DENSE_CAP {
        return Err(CertifyError::ModelTooLarge {
            n_dofs: fom.n_dofs,
            cap: DENSE_CAP,
        });
    }
    let s = fom.norm_matrix();
    let mut min_sigma = f64::INFINITY;
    for &omega in probes {
        let sigma = smallest_generalized_singular_value(fom, &s, omega)?;
        min_sigma = min_sigma.min(sigma);
    }
    Ok(StabilityConstant {
        alpha_lb: SAFETY * min_sigma,
        provenance: Provenance::EigenEstimated,
    })
}

fn smallest_generalized_singular_value(
    fom: &FullOrderModel,
    s: &SparseComplexMatrix,
    omega: f64,
) -> Result<f64, CertifyError> {
    let n = fom.n_dofs;
    let a_dense = fom.system_matrix(omega).to_dense();
    let lu = a_dense.lu();

    // Inverse iteration: y = A^-1 S A^-H S x is self-adjoint in the S inner
    // product with eigenvalues 1 / sigma^2.
    let mut x = DVector::from_element(n, Complex64::new(1.0, 0.0));
    let s_norm = |v: &DVector<Complex64>| -> f64 {
        let sv = s.matvec_alloc(v.as_slice());
        v.iter()
            .zip(&sv)
            .map(|(a, b)| (a.conj() * b).re)
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    };
    let nx = s_norm(&x);
    if nx == 0.0 {
        return Err(CertifyError::DimensionMismatch("norm matrix is zero".into()));
    }
    x /= Complex64::new(nx, 0.0);

    let mut lambda_prev = f64::INFINITY;
    for iter in 0..200 {
        let t1 = DVector::from_vec(s.matvec_alloc(x.as_slice()));
        // t2 = A^-H t1: conj(A) t2 = t1.
        let t1_conj = t1.map(|z| z.conj());
        let t2 = lu
            .solve(&t1_conj)
            .ok_or(CertifyError::DimensionMismatch("singular system matrix".into()))?
            .map(|z| z.conj());
        let t3 = DVector::from_vec(s.matvec_alloc(t2.as_slice()));
        let y = lu
            .solve(&t3)
            .ok_or(CertifyError::DimensionMismatch("singular system matrix".into()))?;

        // Rayleigh quotient of the inverse operator in the S inner product.
        let sy = DVector::from_vec(s.matvec_alloc(y.as_slice()));
        let x_s_y = x
            .iter()
            .zip(sy.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum::<f64>();
        // lambda_min(pencil) ~ 1 / <x, y>_S for normalized x.
        let lambda = 1.0 / x_s_y.max(f64::MIN_POSITIVE);

        let ny = s_norm(&y);
        if ny == 0.0 {
            return Err(CertifyError::NonConvergence { iterations: iter });
        }
        x = y / Complex64::new(ny, 0.0);

        if (lambda - lambda_prev).abs() <= 1e-8 * lambda.abs().max(f64::MIN_POSITIVE) {
            return Ok(lambda.max(0.0).sqrt());
        }
        lambda_prev = lambda;
    }
    Err(CertifyError::NonConvergence { iterations: 200 })
}

#[cfg(test)]
mod tests;
