//! Full-order models: the parametrized system `A[w] = K - iwC + eM`, its
//! postprocessing vectors, and the two ways to obtain one (built-in radial
//! sphere, or ingest of externally assembled matrices).

mod grading;
mod manifest;
mod material;
pub mod mm_io;
mod radial;

pub use grading::{layer_thicknesses, layer_thicknesses_guarded, GradingScheme, MeshGrading};
pub use manifest::{export_fom_to_files, load_fom_from_files, FomManifest};
pub use material::{nondim_skin_depth, skin_depth, MaterialParams, MU0};
pub use radial::{build_radial_sphere_fom, RadialAssembly, RadialSphereParams};

use crate::linalg::{cg_solve, LinalgError, Preconditioner, SparseComplexMatrix};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FomError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("frequency {0} is not positive")]
    NonPositiveFrequency(f64),
    #[error("invalid grading: {0}")]
    InvalidGrading(String),
    #[error("boundary layers total {total} exceed the conductor half-extent {half_extent}")]
    ThinObjectViolation { total: f64, half_extent: f64 },
    #[error("{file}:{line}: {message}")]
    ParseError {
        file: String,
        line: usize,
        message: String,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix {name} violates symmetry at ({row}, {col}): defect {defect:e}")]
    SymmetryViolation {
        name: String,
        row: usize,
        col: usize,
        defect: f64,
    },
    #[error("matrix {name} failed the positive semi-definite spot check: Rayleigh quotient {value:e}")]
    NotPositiveSemiDefinite { name: String, value: f64 },
    #[error("operation requires a generated model; ingested models do not support it")]
    UnsupportedForIngestedModel,
    #[error("missing postprocessing data: {0}")]
    MissingPostprocData(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Iterative solver settings used for every full-order solve.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub max_iter: usize,
    pub preconditioner: Preconditioner,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            max_iter: 200_000,
            preconditioner: Preconditioner::Jacobi,
        }
    }
}

impl SolverConfig {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }
}

/// Element-level quadrature evaluation of the tensor integrands, offered by
/// models that keep their discretization around (the generated radial sphere
/// does; ingested matrix bundles do not).
pub trait ImEvaluator: Send + Sync {
    /// Integral-method value of the frequency-dependent real contribution
    /// for directions `(i, j)` from coefficient vectors `qi`, `qj`.
    fn r_entry(
        &self,
        i: usize,
        j: usize,
        qi: &[Complex64],
        qj: &[Complex64],
    ) -> Result<f64, FomError>;

    /// Integral-method value of the imaginary part for directions `(i, j)`.
    fn i_entry(
        &self,
        i: usize,
        j: usize,
        qi: &[Complex64],
        qj: &[Complex64],
        omega: f64,
    ) -> Result<f64, FomError>;
}

#[derive(Debug, Clone)]
pub struct DiscretizationInfo {
    pub description: String,
    pub order_p: usize,
}

/// Immutable bundle of assembled matrices, postprocessing vectors and
/// metadata. `K`, `C` and `M` are real-valued complex-symmetric sparse
/// matrices; the conduction weight `nu_tilde` is baked into `C`, `C1`, `C2`,
/// `s_i`, `t_i` and `c_ij`, so a single leading `omega` factors out of the
/// imaginary tensor block.
#[derive(Clone)]
pub struct FullOrderModel {
    pub n_dofs: usize,
    /// Size of the magnetostatic solution space; equals `n_dofs` under the
    /// shared-basis convention.
    pub m_dofs: usize,
    pub stiffness: SparseComplexMatrix,
    pub conduction: SparseComplexMatrix,
    pub reg_mass: SparseComplexMatrix,
    c1: Option<SparseComplexMatrix>,
    c2: Option<SparseComplexMatrix>,
    /// Coefficients of the magnetostatic perturbation per direction.
    pub theta0: [Vec<f64>; 3],
    pub s_moment: [Vec<f64>; 3],
    pub t_moment: [Vec<f64>; 3],
    pub c_scalar: [[f64; 3]; 3],
    pub materials: MaterialParams,
    /// Physical object volume `alpha^3 |B|`, m^3.
    pub volume_b_alpha: f64,
    pub shared_basis: bool,
    /// Mass matrix over the whole computational domain, for the norm matrix
    /// `S = K + M_full`. Falls back to `M` (exterior only) when absent.
    pub norm_mass: Option<SparseComplexMatrix>,
    /// Explicit norm matrix supplied by a manifest; wins over `norm_mass`.
    pub norm_override: Option<SparseComplexMatrix>,
    /// Explicit frequency-independent source factors; when absent the shared
    /// basis convention `c_hat_i = C o_i + t_i` applies.
    pub source_hat: Option<[Vec<f64>; 3]>,
    pub im: Option<Arc<dyn ImEvaluator>>,
    pub assembly: Option<Arc<RadialAssembly>>,
    pub discretization: DiscretizationInfo,
}

impl std::fmt::Debug for FullOrderModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FullOrderModel")
            .field("n_dofs", &self.n_dofs)
            .field("m_dofs", &self.m_dofs)
            .field("materials", &self.materials)
            .field("shared_basis", &self.shared_basis)
            .field("discretization", &self.discretization)
            .finish()
    }
}

impl FullOrderModel {
    /// `C1` block (magnetostatic-space mass); the conduction matrix itself
    /// under the shared-basis convention.
    pub fn c1(&self) -> &SparseComplexMatrix {
        self.c1.as_ref().unwrap_or(&self.conduction)
    }

    /// `C2` block (magnetostatic x solution space coupling).
    pub fn c2(&self) -> &SparseComplexMatrix {
        self.c2.as_ref().unwrap_or(&self.conduction)
    }

    pub(crate) fn set_c1_c2(
        &mut self,
        c1: Option<SparseComplexMatrix>,
        c2: Option<SparseComplexMatrix>,
    ) {
        self.c1 = c1;
        self.c2 = c2;
    }

    pub fn has_explicit_c1_c2(&self) -> bool {
        self.c1.is_some() || self.c2.is_some()
    }

    /// Dimensionless object volume `|B|`.
    pub fn unit_volume(&self) -> f64 {
        self.volume_b_alpha / self.materials.alpha.powi(3)
    }

    /// `A[w] = K - i w C + e M`.
    pub fn system_matrix(&self, omega: f64) -> SparseComplexMatrix {
        let one = Complex64::new(1.0, 0.0);
        let k_c = self
            .stiffness
            .linear_combination(one, &self.conduction, Complex64::new(0.0, -omega))
            .expect("K and C dimensions agree");
        k_c.linear_combination(one, &self.reg_mass, Complex64::new(self.materials.epsilon, 0.0))
            .expect("K and M dimensions agree")
    }

    /// Norm matrix `S = K + M_full`; warns and uses `K + M` when the model
    /// carries no full-domain mass.
    pub fn norm_matrix(&self) -> SparseComplexMatrix {
        let one = Complex64::new(1.0, 0.0);
        if let Some(s) = &self.norm_override {
            return s.clone();
        }
        match &self.norm_mass {
            Some(mf) => self
                .stiffness
                .linear_combination(one, mf, one)
                .expect("K and M_full dimensions agree"),
            None => {
                log::warn!(
                    "model has no full-domain mass matrix; norm matrix falls back to K + M"
                );
                self.stiffness
                    .linear_combination(one, &self.reg_mass, one)
                    .expect("K and M dimensions agree")
            }
        }
    }

    /// Frequency-independent source factor `c_hat_i` with
    /// `r_i[w] = i w c_hat_i`.
    pub fn source_factor(&self, direction: usize) -> Result<Vec<Complex64>, FomError> {
        assert!(direction < 3);
        if let Some(hats) = &self.source_hat {
            return Ok(hats[direction]
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect());
        }
        if !self.shared_basis {
            return Err(FomError::MissingPostprocData(
                "model without shared basis needs explicit source vectors".into(),
            ));
        }
        let o = &self.theta0[direction];
        let t = &self.t_moment[direction];
        if o.len() != self.conduction.cols() || t.len() != self.n_dofs {
            return Err(FomError::DimensionMismatch(format!(
                "source factor: o has {}, t has {}, C is {}x{}",
                o.len(),
                t.len(),
                self.conduction.rows(),
                self.conduction.cols()
            )));
        }
        let o_c: Vec<Complex64> = o.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut hat = self.conduction.matvec_alloc(&o_c);
        for (h, tv) in hat.iter_mut().zip(t) {
            *h += tv;
        }
        Ok(hat)
    }

    /// Validates structure: square matrices of matching size, exact complex
    /// symmetry, and positive semi-definiteness of `C` and `M` via seeded
    /// random Rayleigh quotients.
    pub fn validate(&self) -> Result<(), FomError> {
        for (name, m) in [
            ("K", &self.stiffness),
            ("C", &self.conduction),
            ("M", &self.reg_mass),
        ] {
            if m.rows() != self.n_dofs || m.cols() != self.n_dofs {
                return Err(FomError::DimensionMismatch(format!(
                    "{name} is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    self.n_dofs,
                    self.n_dofs
                )));
            }
            check_symmetry(name, m)?;
        }
        for (name, m) in [("C", &self.conduction), ("M", &self.reg_mass)] {
            check_psd_spot(name, m)?;
        }
        for dir in 0..3 {
            if self.theta0[dir].len() != self.m_dofs
                || self.s_moment[dir].len() != self.m_dofs
                || self.t_moment[dir].len() != self.n_dofs
            {
                return Err(FomError::DimensionMismatch(format!(
                    "postprocessing vectors for direction {dir} do not match declared sizes"
                )));
            }
        }
        if self.shared_basis {
            if self.m_dofs != self.n_dofs {
                return Err(FomError::DimensionMismatch(
                    "shared basis requires m_dofs == n_dofs".into(),
                ));
            }
            for dir in 0..3 {
                if self.s_moment[dir] != self.t_moment[dir] {
                    return Err(FomError::InvalidParameter(format!(
                        "shared basis declared but s_{dir} != t_{dir}"
                    )));
                }
            }
            if let Some(c1) = &self.c1 {
                if *c1 != self.conduction {
                    return Err(FomError::InvalidParameter(
                        "shared basis declared but C1 != C".into(),
                    ));
                }
            }
            if let Some(c2) = &self.c2 {
                if *c2 != self.conduction {
                    return Err(FomError::InvalidParameter(
                        "shared basis declared but C2 != C".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn check_symmetry(name: &str, m: &SparseComplexMatrix) -> Result<(), FomError> {
    let mut worst = (0usize, 0usize, 0.0f64);
    for (r, c, v) in m.iter() {
        if r < c {
            let d = (v - m.get(c, r)).norm();
            if d > worst.2 {
                worst = (r, c, d);
            }
        }
    }
    if worst.2 > 0.0 {
        return Err(FomError::SymmetryViolation {
            name: name.into(),
            row: worst.0,
            col: worst.1,
            defect: worst.2,
        });
    }
    Ok(())
}

fn check_psd_spot(name: &str, m: &SparseComplexMatrix) -> Result<(), FomError> {
    let n = m.rows();
    if n == 0 {
        return Ok(());
    }
    let scale = m.max_abs();
    if scale == 0.0 {
        return Ok(());
    }
    let mut rng = StdRng::seed_from_u64(0x4d50_5452_4f4d);
    for _ in 0..16 {
        let x: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))
            .collect();
        let ax = m.matvec_alloc(&x);
        let quad: Complex64 = x.iter().zip(&ax).map(|(a, b)| a.conj() * b).sum();
        let norm_sq: f64 = x.iter().map(|v| v.norm_sqr()).sum();
        if quad.re < -1e-10 * scale * norm_sq {
            return Err(FomError::NotPositiveSemiDefinite {
                name: name.into(),
                value: quad.re / norm_sq,
            });
        }
    }
    Ok(())
}

/// Source vector `r_i[w] = i w (C o_i + t_i)`.
pub fn assemble_source(
    fom: &FullOrderModel,
    direction: usize,
    omega: f64,
) -> Result<Vec<Complex64>, FomError> {
    let hat = fom.source_factor(direction)?;
    let iw = Complex64::new(0.0, omega);
    Ok(hat.into_iter().map(|h| iw * h).collect())
}

/// Solves `A[w] q_i = r_i[w]` to the requested relative tolerance.
pub fn solve_full_order(
    fom: &FullOrderModel,
    direction: usize,
    omega: f64,
    solver: &SolverConfig,
) -> Result<Vec<Complex64>, FomError> {
    if !(omega > 0.0) {
        return Err(FomError::NonPositiveFrequency(omega));
    }
    let a = fom.system_matrix(omega);
    let rhs = assemble_source(fom, direction, omega)?;
    let sol = cg_solve(&a, &rhs, solver.rel_tol, solver.max_iter, solver.preconditioner)?;
    Ok(sol.x)
}

/// Re-solves the magnetostatic (`nu = 0`) problem for one direction and
/// caches the coefficients into the model. Requires a generated model.
pub fn solve_theta0(
    fom: &mut FullOrderModel,
    direction: usize,
    rel_tol: f64,
) -> Result<Vec<f64>, FomError> {
    let assembly = fom
        .assembly
        .clone()
        .ok_or(FomError::UnsupportedForIngestedModel)?;
    let radial = assembly.solve_theta0_radial(rel_tol)?;
    let embedded = assembly.embed_real(&radial, direction);
    fom.theta0[direction] = embedded.clone();
    Ok(embedded)
}
