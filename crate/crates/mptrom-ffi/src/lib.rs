//! C ABI for the mptrom library.
//!
//! Models and signatures live behind opaque handles; every entry point
//! returns an [`MptromStatus`] code and the last error message is retrievable
//! per thread via [`mptrom_last_error`]. Handles must be released with their
//! matching `_free` function.

use mptrom::cli::{ModelConfig, RunConfig, TolerancesConfig};
use mptrom::fom::{FullOrderModel, GradingScheme, SolverConfig};
use mptrom::mpt::{Method, SpectralSignature};
use mptrom::pod::{build_snapshots, Rom};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::ptr;

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: impl std::fmt::Display) {
    let text = CString::new(message.to_string().replace('\0', " "))
        .unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MptromStatus {
    Ok = 0,
    InvalidArgument = 1,
    NullPointer = 2,
    NumericalFailure = 3,
    IoFailure = 4,
}

/// Opaque full-order model handle.
pub struct MptromModel {
    fom: FullOrderModel,
}

/// Opaque spectral signature handle.
pub struct MptromSignature {
    signature: SpectralSignature,
}

/// Boundary-layer grading schemes, mirroring the library's options.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MptromScheme {
    Uniform = 0,
    GeometricDecreasing = 1,
    GeometricIncreasing = 2,
}

/// Tensor evaluation strategies.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MptromMethod {
    Im = 0,
    Fmm = 1,
    Mm = 2,
}

/// Copies the last error message on this thread into `buffer` (truncated to
/// `length` bytes including the terminator). Returns the full message length.
///
/// # Safety
/// `buffer` must point to at least `length` writable bytes, or be null.
#[no_mangle]
pub unsafe extern "C" fn mptrom_last_error(buffer: *mut c_char, length: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes_with_nul();
        if !buffer.is_null() && length > 0 {
            let n = bytes.len().min(length);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buffer, n);
            // Guarantee termination after truncation.
            *buffer.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Builds the radially reduced conducting sphere model.
///
/// `target_omega` fixes the skin depth the boundary layers resolve;
/// `order_p`, `layers` and the two element counts control the
/// discretization. Pass 0 for `order_p`, `n_interior`, `n_exterior` to take
/// the defaults (3, 16, 30).
///
/// # Safety
/// `out` must be a valid pointer to a model-handle slot.
#[no_mangle]
pub unsafe extern "C" fn mptrom_sphere_model_new(
    alpha: f64,
    sigma_star: f64,
    mu_r: f64,
    epsilon: f64,
    target_omega: f64,
    scheme: MptromScheme,
    layers: usize,
    order_p: usize,
    n_interior: usize,
    n_exterior: usize,
    out: *mut *mut MptromModel,
) -> MptromStatus {
    if out.is_null() {
        set_error("output pointer is null");
        return MptromStatus::NullPointer;
    }
    let model_cfg = ModelConfig::RadialSphere {
        alpha,
        sigma_star,
        mu_r,
        grading_scheme: match scheme {
            MptromScheme::Uniform => GradingScheme::Uniform,
            MptromScheme::GeometricDecreasing => GradingScheme::GeometricDecreasing,
            MptromScheme::GeometricIncreasing => GradingScheme::GeometricIncreasing,
        },
        layers: if layers == 0 { 2 } else { layers },
        target_omega,
        order_p: if order_p == 0 { 3 } else { order_p },
        outer_radius: 1000.0,
        n_interior: if n_interior == 0 { 16 } else { n_interior },
        n_exterior: if n_exterior == 0 { 30 } else { n_exterior },
    };
    let tolerances = TolerancesConfig {
        epsilon,
        ..TolerancesConfig::default()
    };
    match mptrom::cli::build_model(&model_cfg, &tolerances) {
        Ok(fom) => {
            *out = Box::into_raw(Box::new(MptromModel { fom }));
            MptromStatus::Ok
        }
        Err(e) => {
            set_error(e);
            *out = ptr::null_mut();
            MptromStatus::InvalidArgument
        }
    }
}

/// Loads a model from a JSON manifest plus Matrix Market files.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn mptrom_model_from_manifest(
    path: *const c_char,
    out: *mut *mut MptromModel,
) -> MptromStatus {
    if path.is_null() || out.is_null() {
        set_error("null pointer argument");
        return MptromStatus::NullPointer;
    }
    let path = match CStr::from_ptr(path).to_str() {
        Ok(s) => PathBuf::from(s),
        Err(e) => {
            set_error(format!("manifest path is not valid UTF-8: {e}"));
            return MptromStatus::InvalidArgument;
        }
    };
    match mptrom::fom::load_fom_from_files(&path) {
        Ok(fom) => {
            *out = Box::into_raw(Box::new(MptromModel { fom }));
            MptromStatus::Ok
        }
        Err(e) => {
            set_error(e);
            *out = ptr::null_mut();
            MptromStatus::IoFailure
        }
    }
}

/// Degrees of freedom of a model.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mptrom_model_ndofs(
    model: *const MptromModel,
    out: *mut usize,
) -> MptromStatus {
    if model.is_null() || out.is_null() {
        set_error("null pointer argument");
        return MptromStatus::NullPointer;
    }
    *out = (*model).fom.n_dofs;
    MptromStatus::Ok
}

/// Releases a model handle. Null is a no-op.
///
/// # Safety
/// `model` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mptrom_model_free(model: *mut MptromModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Runs the reduced-order frequency sweep: `n_snapshots` log-spaced
/// full-order solves over `[omega_min, omega_max]`, truncated SVD at
/// `tol_sigma`, online evaluation of `n_output` log-spaced frequencies with
/// the chosen method.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn mptrom_signature_compute(
    model: *const MptromModel,
    omega_min: f64,
    omega_max: f64,
    n_snapshots: usize,
    n_output: usize,
    method: MptromMethod,
    tol_sigma: f64,
    rel_tol: f64,
    out: *mut *mut MptromSignature,
) -> MptromStatus {
    if model.is_null() || out.is_null() {
        set_error("null pointer argument");
        return MptromStatus::NullPointer;
    }
    *out = ptr::null_mut();
    let mut config = RunConfig::default();
    config.sweep.omega_min = omega_min;
    config.sweep.omega_max = omega_max;
    config.sweep.n_snapshots = n_snapshots;
    config.sweep.n_output = n_output;
    config.tolerances.tol_sigma = tol_sigma;
    config.tolerances.rel_tol = rel_tol;
    if let Err(e) = config.validate() {
        set_error(e);
        return MptromStatus::InvalidArgument;
    }
    let fom = &(*model).fom;
    let solver = SolverConfig::with_rel_tol(rel_tol);
    let method = match method {
        MptromMethod::Im => Method::Im,
        MptromMethod::Fmm => Method::Fmm,
        MptromMethod::Mm => Method::Mm,
    };

    let snaps = match build_snapshots(fom, &config.snapshot_frequencies(), &solver, 1) {
        Ok(s) => s,
        Err(e) => {
            set_error(e);
            return MptromStatus::NumericalFailure;
        }
    };
    let rom = match Rom::build(fom, &snaps, tol_sigma) {
        Ok(r) => r,
        Err(e) => {
            set_error(e);
            return MptromStatus::NumericalFailure;
        }
    };
    let mut tensors = Vec::with_capacity(n_output);
    for omega in config.output_frequencies() {
        match rom.evaluate_reconstructed(fom, omega, method) {
            Ok(t) => tensors.push(t),
            Err(e) => {
                set_error(e);
                return MptromStatus::NumericalFailure;
            }
        }
    }
    match SpectralSignature::new(tensors, method) {
        Ok(signature) => {
            *out = Box::into_raw(Box::new(MptromSignature { signature }));
            MptromStatus::Ok
        }
        Err(e) => {
            set_error(e);
            MptromStatus::NumericalFailure
        }
    }
}

/// Number of frequencies in a signature.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn mptrom_signature_len(
    signature: *const MptromSignature,
    out: *mut usize,
) -> MptromStatus {
    if signature.is_null() || out.is_null() {
        set_error("null pointer argument");
        return MptromStatus::NullPointer;
    }
    *out = (*signature).signature.len();
    MptromStatus::Ok
}

/// One sweep row: the frequency plus the six independent entries of the real
/// part (`11, 22, 33, 12, 13, 23`) and of the imaginary part, in that order.
///
/// # Safety
/// `re` and `im` must each point to six writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mptrom_signature_row(
    signature: *const MptromSignature,
    index: usize,
    omega: *mut f64,
    re: *mut f64,
    im: *mut f64,
) -> MptromStatus {
    if signature.is_null() || omega.is_null() || re.is_null() || im.is_null() {
        set_error("null pointer argument");
        return MptromStatus::NullPointer;
    }
    let sig = &(*signature).signature;
    if index >= sig.len() {
        set_error(format!(
            "row {index} out of bounds for a {}-row signature",
            sig.len()
        ));
        return MptromStatus::InvalidArgument;
    }
    let tensor = &sig.tensors[index];
    *omega = tensor.omega;
    let rt = tensor.r_tilde();
    let order = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];
    for (k, &(i, j)) in order.iter().enumerate() {
        *re.add(k) = rt[i][j];
        *im.add(k) = tensor.i_part[i][j];
    }
    MptromStatus::Ok
}

/// Releases a signature handle. Null is a no-op.
///
/// # Safety
/// `signature` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mptrom_signature_free(signature: *mut MptromSignature) {
    if !signature.is_null() {
        drop(Box::from_raw(signature));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_sweep_through_the_c_surface() {
        unsafe {
            let mut model: *mut MptromModel = ptr::null_mut();
            let status = mptrom_sphere_model_new(
                1e-3,
                1e6,
                32.0,
                1e-10,
                1e8,
                MptromScheme::GeometricIncreasing,
                2,
                2,
                8,
                16,
                &mut model,
            );
            assert_eq!(status, MptromStatus::Ok);
            assert!(!model.is_null());

            let mut n_dofs = 0usize;
            assert_eq!(mptrom_model_ndofs(model, &mut n_dofs), MptromStatus::Ok);
            assert!(n_dofs > 0);

            let mut sig: *mut MptromSignature = ptr::null_mut();
            let status = mptrom_signature_compute(
                model,
                1e1,
                1e8,
                7,
                12,
                MptromMethod::Mm,
                1e-6,
                1e-8,
                &mut sig,
            );
            assert_eq!(status, MptromStatus::Ok);

            let mut len = 0usize;
            assert_eq!(mptrom_signature_len(sig, &mut len), MptromStatus::Ok);
            assert_eq!(len, 12);

            let mut omega = 0.0;
            let mut re = [0.0; 6];
            let mut im = [0.0; 6];
            assert_eq!(
                mptrom_signature_row(sig, 0, &mut omega, re.as_mut_ptr(), im.as_mut_ptr()),
                MptromStatus::Ok
            );
            assert_eq!(omega, 1e1);
            // Magnetostatic-dominated low end: positive diagonal, tiny I.
            assert!(re[0] > 0.0);
            assert!(im[0].abs() < re[0]);

            // Out-of-bounds row reports an error message.
            assert_eq!(
                mptrom_signature_row(sig, 99, &mut omega, re.as_mut_ptr(), im.as_mut_ptr()),
                MptromStatus::InvalidArgument
            );
            let mut buf = [0 as c_char; 128];
            let n = mptrom_last_error(buf.as_mut_ptr(), buf.len());
            assert!(n > 1);

            mptrom_signature_free(sig);
            mptrom_model_free(model);
        }
    }

    #[test]
    fn invalid_arguments_are_reported() {
        unsafe {
            let mut model: *mut MptromModel = ptr::null_mut();
            let status = mptrom_sphere_model_new(
                -1.0,
                1e6,
                32.0,
                1e-10,
                1e8,
                MptromScheme::Uniform,
                2,
                2,
                8,
                16,
                &mut model,
            );
            assert_eq!(status, MptromStatus::InvalidArgument);
            assert!(model.is_null());
        }
    }
}
