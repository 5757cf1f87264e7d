//! Projected proper-orthogonal-decomposition machinery: snapshot matrices,
//! per-direction truncated SVD bases, the small omega-independent projected
//! operators solved online, and the precomputed blocks that evaluate tensor
//! entries in `O(M^2)` per frequency (the Matrix Method).

use crate::fom::{mm_io, solve_full_order, FullOrderModel, SolverConfig};
use crate::linalg::{tsvd, DenseComplexMatrix, LinalgError, Tsvd};
use crate::mpt::{compute_n0, static_i_block, Method, MptError, MptTensor};
use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PodError {
    #[error("snapshot solves failed: {}", format_failures(.0))]
    SnapshotSolves(Vec<(usize, f64, String)>),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("reduced system is singular at omega = {omega:e}, direction {direction}")]
    SingularReducedSystem { omega: f64, direction: usize },
    #[error("factorization or operators built from a different basis revision ({found} vs {expected})")]
    StaleRevision { found: u64, expected: u64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Mpt(#[from] MptError),
    #[error(transparent)]
    Fom(#[from] crate::fom::FomError),
}

fn format_failures(failures: &[(usize, f64, String)]) -> String {
    failures
        .iter()
        .map(|(idx, omega, msg)| format!("[{idx}] omega={omega:e}: {msg}"))
        .collect::<Vec<_>>()
        .join("; ")
}

static BASIS_REVISION: AtomicU64 = AtomicU64::new(1);

// ---------------------------------------------------------------------------
// Snapshots
// ---------------------------------------------------------------------------

/// Full-order solutions at the snapshot frequencies, one column per
/// frequency and one matrix per excitation direction.
#[derive(Debug, Clone)]
pub struct SnapshotSet {
    pub frequencies: Vec<f64>,
    pub data: [DenseComplexMatrix; 3],
    pub rel_tol: f64,
}

impl SnapshotSet {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// Column index of a frequency, if it is a snapshot.
    pub fn position(&self, omega: f64) -> Option<usize> {
        self.frequencies.iter().position(|&w| w == omega)
    }

    /// New set with extra frequencies merged in ascending order. Existing
    /// columns are reused; `extra` must not duplicate existing frequencies.
    pub fn merged_with(&self, extra: &SnapshotSet) -> Result<SnapshotSet, PodError> {
        let n_dofs = self.data[0].nrows();
        if extra.data[0].nrows() != n_dofs {
            return Err(PodError::DimensionMismatch(
                "snapshot sets come from different discretizations".into(),
            ));
        }
        let mut order: Vec<(f64, bool, usize)> = self
            .frequencies
            .iter()
            .enumerate()
            .map(|(k, &w)| (w, false, k))
            .chain(
                extra
                    .frequencies
                    .iter()
                    .enumerate()
                    .map(|(k, &w)| (w, true, k)),
            )
            .collect();
        order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in order.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(PodError::DimensionMismatch(format!(
                    "duplicate snapshot frequency {:e}",
                    w[0].0
                )));
            }
        }
        let n = order.len();
        let mut data: [DenseComplexMatrix; 3] =
            std::array::from_fn(|_| DenseComplexMatrix::zeros(n_dofs, n));
        for (col, &(_, from_extra, src)) in order.iter().enumerate() {
            for dir in 0..3 {
                let source = if from_extra {
                    &extra.data[dir]
                } else {
                    &self.data[dir]
                };
                data[dir].set_column(col, &source.column(src));
            }
        }
        Ok(SnapshotSet {
            frequencies: order.iter().map(|&(w, _, _)| w).collect(),
            data,
            rel_tol: self.rel_tol,
        })
    }
}

/// Solves the full-order system at every snapshot frequency for all three
/// directions. `parallel_width` caps the worker count; the output is
/// assembled in frequency order and does not depend on it.
pub fn build_snapshots(
    fom: &FullOrderModel,
    frequencies: &[f64],
    solver: &SolverConfig,
    parallel_width: usize,
) -> Result<SnapshotSet, PodError> {
    for w in frequencies.windows(2) {
        if !(w[1] > w[0]) {
            return Err(PodError::DimensionMismatch(
                "snapshot frequencies must be strictly ascending".into(),
            ));
        }
    }
    let solve_one = |&omega: &f64| -> Result<[Vec<Complex64>; 3], (f64, String)> {
        let mut cols: [Vec<Complex64>; 3] = Default::default();
        for dir in 0..3 {
            cols[dir] =
                solve_full_order(fom, dir, omega, solver).map_err(|e| (omega, e.to_string()))?;
        }
        Ok(cols)
    };

    let results: Vec<Result<[Vec<Complex64>; 3], (f64, String)>> = if parallel_width <= 1 {
        frequencies.iter().map(solve_one).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(parallel_width)
            .build()
            .map_err(|e| PodError::DimensionMismatch(e.to_string()))?;
        pool.install(|| frequencies.par_iter().map(solve_one).collect())
    };

    let failures: Vec<(usize, f64, String)> = results
        .iter()
        .enumerate()
        .filter_map(|(k, r)| r.as_ref().err().map(|(w, m)| (k, *w, m.clone())))
        .collect();
    if !failures.is_empty() {
        return Err(PodError::SnapshotSolves(failures));
    }

    let n_dofs = fom.n_dofs;
    let n = frequencies.len();
    let mut data: [DenseComplexMatrix; 3] =
        std::array::from_fn(|_| DenseComplexMatrix::zeros(n_dofs, n));
    for (col, result) in results.into_iter().enumerate() {
        let cols = result.expect("failures handled above");
        for dir in 0..3 {
            data[dir].set_column(col, &DVector::from_vec(cols[dir].clone()));
        }
    }
    Ok(SnapshotSet {
        frequencies: frequencies.to_vec(),
        data,
        rel_tol: solver.rel_tol,
    })
}

// ---------------------------------------------------------------------------
// Reduced basis and operators
// ---------------------------------------------------------------------------

/// Per-direction truncated SVD bases. `revision` ties downstream projected
/// objects to the basis they were built from.
#[derive(Debug, Clone)]
pub struct ReducedBasis {
    pub bases: [Tsvd; 3],
    pub tol_sigma: f64,
    pub revision: u64,
}

impl ReducedBasis {
    pub fn modes(&self) -> [usize; 3] {
        [
            self.bases[0].retained,
            self.bases[1].retained,
            self.bases[2].retained,
        ]
    }
}

/// Truncated SVD of each direction's snapshot matrix.
pub fn build_reduced_basis(
    snapshots: &SnapshotSet,
    tol_sigma: f64,
) -> Result<ReducedBasis, PodError> {
    let bases = [
        tsvd(&snapshots.data[0], tol_sigma)?,
        tsvd(&snapshots.data[1], tol_sigma)?,
        tsvd(&snapshots.data[2], tol_sigma)?,
    ];
    Ok(ReducedBasis {
        bases,
        tol_sigma,
        revision: BASIS_REVISION.fetch_add(1, Ordering::Relaxed),
    })
}

/// Omega-independent projected blocks: `K^red_i = U_i^H K U_i` (same for `C`
/// and `M`) plus the reduced source factor, so the online system
/// `A^M[w] p = i w r^M` assembles in `O(M^2)` per frequency.
#[derive(Debug, Clone)]
pub struct ReducedOperators {
    pub k_red: [DenseComplexMatrix; 3],
    pub c_red: [DenseComplexMatrix; 3],
    pub m_red: [DenseComplexMatrix; 3],
    /// `U_i^H c_hat_i`; the online right-hand side is `i w` times this.
    pub source_red: [DVector<Complex64>; 3],
    pub epsilon: f64,
    pub revision: u64,
}

impl ReducedOperators {
    /// Dense reduced system matrix at `omega`.
    pub fn system(&self, direction: usize, omega: f64) -> DenseComplexMatrix {
        let m = self.k_red[direction].nrows();
        let mut a = DenseComplexMatrix::zeros(m, m);
        let iw = Complex64::new(0.0, -omega);
        let eps = Complex64::new(self.epsilon, 0.0);
        for j in 0..m {
            for i in 0..m {
                a[(i, j)] = self.k_red[direction][(i, j)]
                    + iw * self.c_red[direction][(i, j)]
                    + eps * self.m_red[direction][(i, j)];
            }
        }
        a
    }
}

/// Galerkin projection of the full operators onto the basis.
pub fn project_operators(
    fom: &FullOrderModel,
    basis: &ReducedBasis,
) -> Result<ReducedOperators, PodError> {
    if basis.bases[0].basis.nrows() != fom.n_dofs {
        return Err(PodError::DimensionMismatch(format!(
            "basis has {} rows, model has {} DOFs",
            basis.bases[0].basis.nrows(),
            fom.n_dofs
        )));
    }
    let mut k_red: Vec<DenseComplexMatrix> = Vec::with_capacity(3);
    let mut c_red: Vec<DenseComplexMatrix> = Vec::with_capacity(3);
    let mut m_red: Vec<DenseComplexMatrix> = Vec::with_capacity(3);
    let mut source_red: Vec<DVector<Complex64>> = Vec::with_capacity(3);
    for dir in 0..3 {
        let u = &basis.bases[dir].basis;
        let uh = u.adjoint();
        k_red.push(&uh * fom.stiffness.mul_dense(u));
        c_red.push(&uh * fom.conduction.mul_dense(u));
        m_red.push(&uh * fom.reg_mass.mul_dense(u));
        let hat = fom.source_factor(dir)?;
        let hat_v = DVector::from_vec(hat);
        source_red.push(&uh * hat_v);
    }
    Ok(ReducedOperators {
        k_red: [k_red.remove(0), k_red.remove(0), k_red.remove(0)],
        c_red: [c_red.remove(0), c_red.remove(0), c_red.remove(0)],
        m_red: [m_red.remove(0), m_red.remove(0), m_red.remove(0)],
        source_red: [
            source_red.remove(0),
            source_red.remove(0),
            source_red.remove(0),
        ],
        epsilon: fom.materials.epsilon,
        revision: basis.revision,
    })
}

/// Solves the three reduced systems at `omega` by dense LU. The residual of
/// each solve must sit at the rounding floor (1e-12 relative, with one step
/// of iterative refinement allowed), else the system is reported singular.
pub fn online_solve(
    ops: &ReducedOperators,
    omega: f64,
) -> Result<[DVector<Complex64>; 3], PodError> {
    let mut out: Vec<DVector<Complex64>> = Vec::with_capacity(3);
    for dir in 0..3 {
        let a = ops.system(dir, omega);
        let rhs = ops.source_red[dir].map(|v| Complex64::new(0.0, omega) * v);
        let rhs_norm = rhs.norm();
        let lu = a.clone().lu();
        let p = match lu.solve(&rhs) {
            Some(p) => p,
            None => return Err(PodError::SingularReducedSystem { omega, direction: dir }),
        };
        let residual = (&a * &p - &rhs).norm();
        if rhs_norm > 0.0 && residual > 1e-12 * rhs_norm {
            let correction = lu.solve(&(&rhs - &a * &p));
            let refined = match correction {
                Some(dp) => &p + &dp,
                None => return Err(PodError::SingularReducedSystem { omega, direction: dir }),
            };
            let r2 = (&a * &refined - &rhs).norm();
            if r2 > 1e-12 * rhs_norm {
                return Err(PodError::SingularReducedSystem { omega, direction: dir });
            }
            out.push(refined);
        } else {
            out.push(p);
        }
    }
    Ok([out.remove(0), out.remove(0), out.remove(0)])
}

/// Lifts reduced coefficients back to the full space: `q = U_i p`.
pub fn reconstruct(
    basis: &ReducedBasis,
    direction: usize,
    p: &DVector<Complex64>,
) -> Result<Vec<Complex64>, PodError> {
    let u = &basis.bases[direction].basis;
    if p.len() != u.ncols() {
        return Err(PodError::DimensionMismatch(format!(
            "reduced vector has {} entries, basis has {} modes",
            p.len(),
            u.ncols()
        )));
    }
    let q = u * p;
    Ok(q.iter().cloned().collect())
}

// ---------------------------------------------------------------------------
// Matrix Method precompute
// ---------------------------------------------------------------------------

/// Everything the `O(M^2)` per-frequency tensor evaluation needs: projected
/// cross blocks, contracted postprocessing rows, the static scalar block and
/// the magnetostatic tensor.
#[derive(Debug, Clone)]
pub struct MmPrecompute {
    /// `U_i^H K U_j` per ordered pair.
    pub k_blocks: [[DenseComplexMatrix; 3]; 3],
    /// `U_i^H C U_j` per ordered pair.
    pub c_blocks: [[DenseComplexMatrix; 3]; 3],
    /// `o_i^T C2 U_j` (length `M_j`).
    pub oc2_rows: [[DVector<Complex64>; 3]; 3],
    /// `U_j^T t_i` (length `M_j`, unconjugated pairing).
    pub t_rows: [[DVector<Complex64>; 3]; 3],
    /// `o_i^T C1 o_j + c_ij + s_i^T o_j + s_j^T o_i`.
    pub static_block: [[f64; 3]; 3],
    pub n0: [[f64; 3]; 3],
    pub alpha: f64,
    pub revision: u64,
}

/// Builds the Matrix Method precompute; the only `N_d`-sized work happens
/// here, offline.
pub fn mm_precompute(
    fom: &FullOrderModel,
    basis: &ReducedBasis,
) -> Result<MmPrecompute, PodError> {
    let n0 = compute_n0(fom)?;
    let ku: Vec<DenseComplexMatrix> = (0..3)
        .map(|d| fom.stiffness.mul_dense(&basis.bases[d].basis))
        .collect();
    let cu: Vec<DenseComplexMatrix> = (0..3)
        .map(|d| fom.conduction.mul_dense(&basis.bases[d].basis))
        .collect();
    let c2u: Vec<DenseComplexMatrix> = (0..3)
        .map(|d| fom.c2().mul_dense(&basis.bases[d].basis))
        .collect();

    let complex =
        |v: &[f64]| DVector::from_iterator(v.len(), v.iter().map(|&x| Complex64::new(x, 0.0)));

    let mut k_blocks: Vec<Vec<DenseComplexMatrix>> = Vec::with_capacity(3);
    let mut c_blocks: Vec<Vec<DenseComplexMatrix>> = Vec::with_capacity(3);
    let mut oc2_rows: Vec<Vec<DVector<Complex64>>> = Vec::with_capacity(3);
    let mut t_rows: Vec<Vec<DVector<Complex64>>> = Vec::with_capacity(3);
    let mut static_block = [[0.0; 3]; 3];
    for i in 0..3 {
        let uh = basis.bases[i].basis.adjoint();
        let o_i = complex(&fom.theta0[i]);
        let t_i = complex(&fom.t_moment[i]);
        let mut k_row = Vec::with_capacity(3);
        let mut c_row = Vec::with_capacity(3);
        let mut o_row = Vec::with_capacity(3);
        let mut t_row = Vec::with_capacity(3);
        for j in 0..3 {
            k_row.push(&uh * &ku[j]);
            c_row.push(&uh * &cu[j]);
            o_row.push(c2u[j].transpose() * &o_i);
            t_row.push(basis.bases[j].basis.transpose() * &t_i);
            static_block[i][j] = static_i_block(fom, i, j)?;
        }
        k_blocks.push(k_row);
        c_blocks.push(c_row);
        oc2_rows.push(o_row);
        t_rows.push(t_row);
    }

    fn unpack<T>(mut v: Vec<Vec<T>>) -> [[T; 3]; 3] {
        let r2 = v.pop().unwrap();
        let r1 = v.pop().unwrap();
        let r0 = v.pop().unwrap();
        fn arr<T>(mut r: Vec<T>) -> [T; 3] {
            let c2 = r.pop().unwrap();
            let c1 = r.pop().unwrap();
            let c0 = r.pop().unwrap();
            [c0, c1, c2]
        }
        [arr(r0), arr(r1), arr(r2)]
    }

    Ok(MmPrecompute {
        k_blocks: unpack(k_blocks),
        c_blocks: unpack(c_blocks),
        oc2_rows: unpack(oc2_rows),
        t_rows: unpack(t_rows),
        static_block,
        n0,
        alpha: fom.materials.alpha,
        revision: basis.revision,
    })
}

#[inline]
fn herm_triple(
    p_i: &DVector<Complex64>,
    block: &DenseComplexMatrix,
    p_j: &DVector<Complex64>,
) -> Complex64 {
    // conj(p_i)^T B p_j without temporaries.
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 0..block.ncols() {
        let mut col = Complex64::new(0.0, 0.0);
        for k in 0..block.nrows() {
            col += p_i[k].conj() * block[(k, l)];
        }
        acc += col * p_j[l];
    }
    acc
}

#[inline]
fn plain_dot(a: &DVector<Complex64>, b: &DVector<Complex64>) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..a.len() {
        acc += a[k] * b[k];
    }
    acc
}

/// One tensor entry pair `(R_ij, I_ij)` from reduced solutions; `O(M^2)`,
/// touching nothing of size `N_d`.
pub fn mpt_mm_entry(
    pre: &MmPrecompute,
    i: usize,
    j: usize,
    p_i: &DVector<Complex64>,
    p_j: &DVector<Complex64>,
    omega: f64,
) -> Result<(f64, f64), PodError> {
    let kb = &pre.k_blocks[i][j];
    if p_i.len() != kb.nrows() || p_j.len() != kb.ncols() {
        return Err(PodError::DimensionMismatch(format!(
            "reduced vectors ({}, {}) do not match block {}x{}",
            p_i.len(),
            p_j.len(),
            kb.nrows(),
            kb.ncols()
        )));
    }
    let alpha3 = pre.alpha.powi(3);
    let r = -0.25 * alpha3 * herm_triple(p_i, kb, p_j).re;

    let dynamic = herm_triple(p_i, &pre.c_blocks[i][j], p_j)
        + plain_dot(&pre.oc2_rows[i][j], p_j)
        + plain_dot(&pre.oc2_rows[j][i], p_i).conj()
        + plain_dot(&pre.t_rows[i][j], p_j)
        + plain_dot(&pre.t_rows[j][i], p_i).conj();
    let i_val = 0.25 * omega * alpha3 * (pre.static_block[i][j] + dynamic.re);
    Ok((r, i_val))
}

/// Whole tensor at `omega` from the reduced solutions of all directions.
pub fn mpt_mm(
    pre: &MmPrecompute,
    p: &[DVector<Complex64>; 3],
    omega: f64,
) -> Result<MptTensor, PodError> {
    let mut r_part = [[0.0; 3]; 3];
    let mut i_part = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let (r, iv) = mpt_mm_entry(pre, i, j, &p[i], &p[j], omega)?;
            r_part[i][j] = r;
            r_part[j][i] = r;
            i_part[i][j] = iv;
            i_part[j][i] = iv;
        }
    }
    let (tensor, _defect) = MptTensor {
        omega,
        n0: pre.n0,
        r_part,
        i_part,
    }
    .symmetrized();
    Ok(tensor)
}

// ---------------------------------------------------------------------------
// Bundled reduced-order model
// ---------------------------------------------------------------------------

/// Basis, projected operators and the Matrix Method precompute built from
/// one snapshot set.
#[derive(Debug, Clone)]
pub struct Rom {
    pub basis: ReducedBasis,
    pub ops: ReducedOperators,
    pub mm: MmPrecompute,
}

impl Rom {
    pub fn build(
        fom: &FullOrderModel,
        snapshots: &SnapshotSet,
        tol_sigma: f64,
    ) -> Result<Self, PodError> {
        let basis = build_reduced_basis(snapshots, tol_sigma)?;
        let ops = project_operators(fom, &basis)?;
        let mm = mm_precompute(fom, &basis)?;
        Ok(Self { basis, ops, mm })
    }

    /// Online Matrix Method tensor at one frequency.
    pub fn evaluate_mm(&self, omega: f64) -> Result<MptTensor, PodError> {
        let p = online_solve(&self.ops, omega)?;
        mpt_mm(&self.mm, &p, omega)
    }

    /// Online tensor routed through full-space postprocessing (IM or FMM on
    /// the reconstructed solution) for method comparisons.
    pub fn evaluate_reconstructed(
        &self,
        fom: &FullOrderModel,
        omega: f64,
        method: Method,
    ) -> Result<MptTensor, PodError> {
        let p = online_solve(&self.ops, omega)?;
        if method == Method::Mm {
            return mpt_mm(&self.mm, &p, omega);
        }
        let q: Vec<Vec<Complex64>> = (0..3)
            .map(|d| reconstruct(&self.basis, d, &p[d]))
            .collect::<Result<_, _>>()?;
        let mut r_part = [[0.0; 3]; 3];
        let mut i_part = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in i..3 {
                let (r, iv) = match method {
                    Method::Fmm => (
                        crate::mpt::compute_r_fmm(fom, &q[i], &q[j])?,
                        crate::mpt::compute_i_fmm(fom, i, j, &q[i], &q[j], omega)?,
                    ),
                    Method::Im => (
                        crate::mpt::compute_r_im(fom, i, j, &q[i], &q[j])?,
                        crate::mpt::compute_i_im(fom, i, j, &q[i], &q[j], omega)?,
                    ),
                    Method::Mm => unreachable!(),
                };
                r_part[i][j] = r;
                r_part[j][i] = r;
                i_part[i][j] = iv;
                i_part[j][i] = iv;
            }
        }
        let (tensor, _defect) = MptTensor {
            omega,
            n0: self.mm.n0,
            r_part,
            i_part,
        }
        .symmetrized();
        Ok(tensor)
    }
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct BasisHeader {
    tol_sigma: f64,
    modes: [usize; 3],
    frequencies: Vec<f64>,
    sigma: [Vec<f64>; 3],
}

/// Writes the per-direction bases as Matrix Market array files plus a JSON
/// header with the truncation settings and snapshot frequencies.
pub fn save_basis(dir: &Path, basis: &ReducedBasis, frequencies: &[f64]) -> Result<(), PodError> {
    std::fs::create_dir_all(dir).map_err(|e| {
        PodError::Fom(crate::fom::FomError::Io {
            path: dir.display().to_string(),
            source: e,
        })
    })?;
    for d in 0..3 {
        mm_io::write_dense_complex(&dir.join(format!("U{}.mtx", d + 1)), &basis.bases[d].basis)?;
    }
    let header = BasisHeader {
        tol_sigma: basis.tol_sigma,
        modes: basis.modes(),
        frequencies: frequencies.to_vec(),
        sigma: [
            basis.bases[0].sigma.clone(),
            basis.bases[1].sigma.clone(),
            basis.bases[2].sigma.clone(),
        ],
    };
    let path = dir.join("basis.json");
    std::fs::write(&path, serde_json::to_string_pretty(&header).unwrap()).map_err(|e| {
        PodError::Fom(crate::fom::FomError::Io {
            path: path.display().to_string(),
            source: e,
        })
    })?;
    Ok(())
}

/// Reads back a serialized basis; the returned basis gets a fresh revision.
pub fn load_basis(dir: &Path) -> Result<(ReducedBasis, Vec<f64>), PodError> {
    let path = dir.join("basis.json");
    let text = std::fs::read_to_string(&path).map_err(|e| {
        PodError::Fom(crate::fom::FomError::Io {
            path: path.display().to_string(),
            source: e,
        })
    })?;
    let header: BasisHeader = serde_json::from_str(&text).map_err(|e| {
        PodError::Fom(crate::fom::FomError::ParseError {
            file: path.display().to_string(),
            line: e.line(),
            message: e.to_string(),
        })
    })?;
    let mut bases: Vec<Tsvd> = Vec::with_capacity(3);
    for d in 0..3 {
        let u = mm_io::read_dense_complex(&dir.join(format!("U{}.mtx", d + 1)))?;
        if u.ncols() != header.modes[d] {
            return Err(PodError::DimensionMismatch(format!(
                "U{} has {} columns, header says {}",
                d + 1,
                u.ncols(),
                header.modes[d]
            )));
        }
        bases.push(Tsvd {
            basis: u,
            right: DenseComplexMatrix::zeros(header.frequencies.len(), header.modes[d]),
            sigma: header.sigma[d].clone(),
            retained: header.modes[d],
            tol_sigma: header.tol_sigma,
        });
    }
    Ok((
        ReducedBasis {
            bases: [bases.remove(0), bases.remove(0), bases.remove(0)],
            tol_sigma: header.tol_sigma,
            revision: BASIS_REVISION.fetch_add(1, Ordering::Relaxed),
        },
        header.frequencies,
    ))
}
