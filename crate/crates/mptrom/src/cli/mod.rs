//! Configuration and command implementations behind the `mptrom` binary.
//!
//! One JSON document drives a run; command-line flags override individual
//! keys. Every command writes machine-readable artifacts (CSV tables and a
//! JSON run report) into the output directory. Exit codes are stable:
//! 0 success, 2 configuration/validation problems, 3 numerical failures.

mod commands;
mod config;

pub use commands::{
    cmd_adapt, cmd_convergence, cmd_ingest_check, cmd_oracle, cmd_scale, cmd_signature,
};
pub use config::{
    build_model, ConvergenceConfig, ModelConfig, RunConfig, SweepConfig, TolerancesConfig,
};

use crate::adapt::AdaptError;
use crate::certify::CertifyError;
use crate::fom::FomError;
use crate::linalg::LinalgError;
use crate::mpt::MptError;
use crate::pod::PodError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("[{stage}] configuration error: {message}")]
    Config { stage: String, message: String },
    #[error("[{stage}] numerical failure: {message}")]
    Numerical { stage: String, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numerical { .. } => 3,
        }
    }

    fn config(stage: &str, message: impl std::fmt::Display) -> Self {
        CliError::Config {
            stage: stage.into(),
            message: message.to_string(),
        }
    }

    fn numerical(stage: &str, message: impl std::fmt::Display) -> Self {
        CliError::Numerical {
            stage: stage.into(),
            message: message.to_string(),
        }
    }
}

/// Tags an error with the pipeline stage it happened in, classifying it as a
/// configuration or numerical failure for the exit code.
pub(crate) trait StageExt<T> {
    fn stage(self, stage: &str) -> Result<T, CliError>;
}

fn is_numerical_fom(e: &FomError) -> bool {
    matches!(e, FomError::Linalg(LinalgError::NonConvergence { .. }))
}

impl<T> StageExt<T> for Result<T, FomError> {
    fn stage(self, stage: &str) -> Result<T, CliError> {
        self.map_err(|e| {
            if is_numerical_fom(&e) {
                CliError::numerical(stage, e)
            } else {
                CliError::config(stage, e)
            }
        })
    }
}

impl<T> StageExt<T> for Result<T, MptError> {
    fn stage(self, stage: &str) -> Result<T, CliError> {
        self.map_err(|e| match e {
            MptError::SolverAtFrequency { .. } => CliError::numerical(stage, e),
            MptError::Fom(ref inner) if is_numerical_fom(inner) => CliError::numerical(stage, e),
            _ => CliError::config(stage, e),
        })
    }
}

impl<T> StageExt<T> for Result<T, PodError> {
    fn stage(self, stage: &str) -> Result<T, CliError> {
        self.map_err(|e| match e {
            PodError::SnapshotSolves(_) | PodError::SingularReducedSystem { .. } => {
                CliError::numerical(stage, e)
            }
            PodError::Linalg(LinalgError::NonConvergence { .. }) => CliError::numerical(stage, e),
            _ => CliError::config(stage, e),
        })
    }
}

impl<T> StageExt<T> for Result<T, CertifyError> {
    fn stage(self, stage: &str) -> Result<T, CliError> {
        self.map_err(|e| match e {
            CertifyError::NonConvergence { .. } => CliError::numerical(stage, e),
            CertifyError::Pod(PodError::SnapshotSolves(_)) => CliError::numerical(stage, e),
            _ => CliError::config(stage, e),
        })
    }
}

impl<T> StageExt<T> for Result<T, AdaptError> {
    fn stage(self, stage: &str) -> Result<T, CliError> {
        self.map_err(|e| match e {
            AdaptError::Pod(PodError::SnapshotSolves(_))
            | AdaptError::Pod(PodError::SingularReducedSystem { .. })
            | AdaptError::Certify(CertifyError::NonConvergence { .. }) => {
                CliError::numerical(stage, e)
            }
            _ => CliError::config(stage, e),
        })
    }
}

impl<T> StageExt<T> for Result<T, std::io::Error> {
    fn stage(self, stage: &str) -> Result<T, CliError> {
        self.map_err(|e| CliError::config(stage, e))
    }
}
