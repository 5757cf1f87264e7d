//! MPT tensor assembly and postprocessing: evaluation strategies, the exact
//! sphere solution, invariants, size scaling, the error metric, and the
//! dipole-pair voltage predictor.

pub mod csv;
mod eval;
mod scale;
mod tensor;
mod voltage;
mod wait;

pub use eval::{
    assemble_signature, compute_i_fmm, compute_i_im, compute_n0, compute_r_fmm, compute_r_im,
    frobenius_error, full_order_tensor, static_i_block, FullOrderMethod,
};
pub use scale::scale_tensor;
pub use tensor::{tensor_invariants, Method, MptTensor, SpectralSignature};
pub use voltage::{dipole_field, predict_voltage, DipoleCoil};
pub use wait::{isotropic_tensor, wait_sphere_oracle};

use crate::fom::FomError;
use crate::linalg::LinalgError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MptError {
    #[error("frequencies must be strictly ascending and positive")]
    FrequenciesNotAscending,
    #[error("solver failed at omega = {omega:e}: {message}")]
    SolverAtFrequency { omega: f64, message: String },
    #[error("magnetostatic solutions are missing or sized wrongly")]
    MissingTheta0,
    #[error("missing postprocessing data: {0}")]
    MissingPostprocData(String),
    #[error("reference tensor is zero; relative error undefined")]
    ZeroReference,
    #[error("coil position coincides with the object position")]
    CoincidentPositions,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("model does not expose element-level quadrature")]
    UnsupportedForIngestedModel,
    #[error("{file}:{line}: {message}")]
    ParseError {
        file: String,
        line: usize,
        message: String,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Fom(#[from] FomError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}
