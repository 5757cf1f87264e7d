//! Tensor evaluation: the frequency-independent magnetostatic block, the
//! sparse matrix route (FMM), the element-quadrature route (IM), and
//! full-order frequency sweeps built from them.

use super::tensor::{check_ascending, Method, MptTensor, SpectralSignature};
use super::MptError;
use crate::fom::{solve_full_order, FullOrderModel, SolverConfig};
use crate::linalg::quad_form;
use num_complex::Complex64;
use rayon::prelude::*;

/// Full-order evaluation strategies (MM needs reduced operators and lives in
/// the reduced-order pipeline).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FullOrderMethod {
    Im,
    Fmm,
}

impl From<FullOrderMethod> for Method {
    fn from(m: FullOrderMethod) -> Method {
        match m {
            FullOrderMethod::Im => Method::Im,
            FullOrderMethod::Fmm => Method::Fmm,
        }
    }
}

fn to_complex(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

fn dot_real_complex(a: &[f64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(&x, y)| x * y).sum()
}

fn dot_real_real(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// The frequency-independent magnetostatic tensor
/// `N0_ij = a^3 d_ij |B| (1 - 1/mu_r) + (a^3/4) o_i^T K o_j`.
///
/// Homogeneous `mu_r` is assumed for the volume term; the quadratic form uses
/// the assembled curl-curl matrix, which carries the `mu_tilde^-1` weight.
pub fn compute_n0(fom: &FullOrderModel) -> Result<[[f64; 3]; 3], MptError> {
    for dir in 0..3 {
        if fom.theta0[dir].len() != fom.m_dofs {
            return Err(MptError::MissingTheta0);
        }
    }
    if !fom.shared_basis {
        return Err(MptError::MissingPostprocData(
            "N0 needs the shared-basis convention (o_i in the solution space)".into(),
        ));
    }
    let alpha3 = fom.materials.alpha.powi(3);
    let vol_term = alpha3 * fom.unit_volume() * (1.0 - 1.0 / fom.materials.mu_r);
    let o: Vec<Vec<Complex64>> = (0..3).map(|d| to_complex(&fom.theta0[d])).collect();
    let mut n0 = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let form = quad_form(&o[i], &fom.stiffness, &o[j], false)?;
            let mut value = 0.25 * alpha3 * form.re;
            if i == j {
                value += vol_term;
            }
            n0[i][j] = value;
            n0[j][i] = value;
        }
    }
    Ok(n0)
}

/// `R_ij = -(a^3/4) Re(conj(q_i)^T K q_j)` (full matrix route).
pub fn compute_r_fmm(
    fom: &FullOrderModel,
    qi: &[Complex64],
    qj: &[Complex64],
) -> Result<f64, MptError> {
    let form = quad_form(qi, &fom.stiffness, qj, true)?;
    if form.im.abs() > 1e-9 * form.norm().max(1e-300) {
        log::warn!(
            "FMM real block discards imaginary residue {:e} (relative)",
            form.im.abs() / form.norm()
        );
    }
    Ok(-0.25 * fom.materials.alpha.powi(3) * form.re)
}

/// The omega-independent scalar block of the imaginary part:
/// `o_i^T C1 o_j + c_ij + s_i^T o_j + s_j^T o_i`.
pub fn static_i_block(fom: &FullOrderModel, i: usize, j: usize) -> Result<f64, MptError> {
    let oi = to_complex(&fom.theta0[i]);
    let oj = to_complex(&fom.theta0[j]);
    let c1_form = quad_form(&oi, fom.c1(), &oj, false)?;
    Ok(c1_form.re
        + fom.c_scalar[i][j]
        + dot_real_real(&fom.s_moment[i], &fom.theta0[j])
        + dot_real_real(&fom.s_moment[j], &fom.theta0[i]))
}

/// `I_ij` via the full matrix route:
/// `(w a^3/4) [static block + Re(conj(q_i)^T C q_j + o_i^T C2 q_j
///  + o_j^T C2 conj(q_i) + t_i^T q_j + t_j^T conj(q_i))]`.
pub fn compute_i_fmm(
    fom: &FullOrderModel,
    i: usize,
    j: usize,
    qi: &[Complex64],
    qj: &[Complex64],
    omega: f64,
) -> Result<f64, MptError> {
    let static_block = static_i_block(fom, i, j)?;
    let oi = to_complex(&fom.theta0[i]);
    let oj = to_complex(&fom.theta0[j]);
    let qi_conj: Vec<Complex64> = qi.iter().map(|z| z.conj()).collect();

    let qq = quad_form(qi, &fom.conduction, qj, true)?;
    let oq = quad_form(&oi, fom.c2(), qj, false)?;
    let oq_conj = quad_form(&oj, fom.c2(), &qi_conj, false)?;
    let tq = dot_real_complex(&fom.t_moment[i], qj);
    let tq_conj = dot_real_complex(&fom.t_moment[j], &qi_conj);

    let dynamic = (qq + oq + oq_conj + tq + tq_conj).re;
    Ok(0.25 * omega * fom.materials.alpha.powi(3) * (static_block + dynamic))
}

/// `R_ij` by element quadrature; needs the model's quadrature capability.
pub fn compute_r_im(
    fom: &FullOrderModel,
    i: usize,
    j: usize,
    qi: &[Complex64],
    qj: &[Complex64],
) -> Result<f64, MptError> {
    let im = fom.im.as_ref().ok_or(MptError::UnsupportedForIngestedModel)?;
    Ok(im.r_entry(i, j, qi, qj)?)
}

/// `I_ij` by element quadrature.
pub fn compute_i_im(
    fom: &FullOrderModel,
    i: usize,
    j: usize,
    qi: &[Complex64],
    qj: &[Complex64],
    omega: f64,
) -> Result<f64, MptError> {
    let im = fom.im.as_ref().ok_or(MptError::UnsupportedForIngestedModel)?;
    Ok(im.i_entry(i, j, qi, qj, omega)?)
}

/// Assembles one frequency's tensor from freshly solved full-order
/// coefficient vectors.
pub fn full_order_tensor(
    fom: &FullOrderModel,
    omega: f64,
    solver: &SolverConfig,
    method: FullOrderMethod,
    n0: &[[f64; 3]; 3],
) -> Result<MptTensor, MptError> {
    let mut q: Vec<Vec<Complex64>> = Vec::with_capacity(3);
    for dir in 0..3 {
        let sol = solve_full_order(fom, dir, omega, solver).map_err(|e| {
            MptError::SolverAtFrequency {
                omega,
                message: e.to_string(),
            }
        })?;
        q.push(sol);
    }

    let mut r_part = [[0.0; 3]; 3];
    let mut i_part = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let (r, im) = match method {
                FullOrderMethod::Fmm => (
                    compute_r_fmm(fom, &q[i], &q[j])?,
                    compute_i_fmm(fom, i, j, &q[i], &q[j], omega)?,
                ),
                FullOrderMethod::Im => (
                    compute_r_im(fom, i, j, &q[i], &q[j])?,
                    compute_i_im(fom, i, j, &q[i], &q[j], omega)?,
                ),
            };
            r_part[i][j] = r;
            r_part[j][i] = r;
            i_part[i][j] = im;
            i_part[j][i] = im;
        }
    }
    let (tensor, _defect) = MptTensor {
        omega,
        n0: *n0,
        r_part,
        i_part,
    }
    .symmetrized();
    Ok(tensor)
}

/// Full-order frequency sweep. `N0` is computed once and reused. Frequencies
/// evaluate in parallel; results are collected in frequency order, so the
/// output does not depend on the thread count.
pub fn assemble_signature(
    fom: &FullOrderModel,
    frequencies: &[f64],
    solver: &SolverConfig,
    method: FullOrderMethod,
) -> Result<SpectralSignature, MptError> {
    check_ascending(frequencies)?;
    let n0 = compute_n0(fom)?;
    let tensors: Result<Vec<MptTensor>, MptError> = frequencies
        .par_iter()
        .map(|&omega| full_order_tensor(fom, omega, solver, method, &n0))
        .collect();
    SpectralSignature::new(tensors?, method.into())
}

/// Relative Frobenius error `|approx - exact|_F / |exact|_F` of the complex
/// tensor `r_tilde + i I`.
pub fn frobenius_error(
    approx: &MptTensor,
    exact: &[[Complex64; 3]; 3],
) -> Result<f64, MptError> {
    let mut num = 0.0;
    let mut den = 0.0;
    let a = approx.complex();
    for i in 0..3 {
        for j in 0..3 {
            num += (a[i][j] - exact[i][j]).norm_sqr();
            den += exact[i][j].norm_sqr();
        }
    }
    if den == 0.0 {
        return Err(MptError::ZeroReference);
    }
    Ok((num / den).sqrt())
}
