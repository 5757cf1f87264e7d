//! Run configuration: one JSON document with protocol defaults.

use super::CliError;
use crate::adapt::Normalization;
use crate::certify::NormChoice;
use crate::fom::{
    build_radial_sphere_fom, load_fom_from_files, nondim_skin_depth, FullOrderModel,
    GradingScheme, MaterialParams, MeshGrading, RadialSphereParams, SolverConfig,
};
use crate::mpt::Method;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModelConfig {
    RadialSphere {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default = "default_sigma")]
        sigma_star: f64,
        #[serde(default = "default_mu_r")]
        mu_r: f64,
        #[serde(default = "default_scheme")]
        grading_scheme: GradingScheme,
        #[serde(default = "default_layers")]
        layers: usize,
        /// The boundary-layer thicknesses target the skin depth at this
        /// frequency (the top of the sweep by default).
        #[serde(default = "default_target_omega")]
        target_omega: f64,
        #[serde(default = "default_order_p")]
        order_p: usize,
        #[serde(default = "default_outer_radius")]
        outer_radius: f64,
        #[serde(default = "default_n_interior")]
        n_interior: usize,
        #[serde(default = "default_n_exterior")]
        n_exterior: usize,
    },
    Manifest {
        path: PathBuf,
    },
}

fn default_alpha() -> f64 {
    1e-3
}
fn default_sigma() -> f64 {
    1e6
}
fn default_mu_r() -> f64 {
    32.0
}
fn default_scheme() -> GradingScheme {
    GradingScheme::GeometricIncreasing
}
fn default_layers() -> usize {
    2
}
fn default_target_omega() -> f64 {
    1e8
}
fn default_order_p() -> usize {
    3
}
fn default_outer_radius() -> f64 {
    1000.0
}
fn default_n_interior() -> usize {
    16
}
fn default_n_exterior() -> usize {
    30
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::RadialSphere {
            alpha: default_alpha(),
            sigma_star: default_sigma(),
            mu_r: default_mu_r(),
            grading_scheme: default_scheme(),
            layers: default_layers(),
            target_omega: default_target_omega(),
            order_p: default_order_p(),
            outer_radius: default_outer_radius(),
            n_interior: default_n_interior(),
            n_exterior: default_n_exterior(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Log,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_snapshots: usize,
    pub n_output: usize,
    pub spacing: Spacing,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            omega_min: 1e1,
            omega_max: 1e8,
            n_snapshots: 13,
            n_output: 160,
            spacing: Spacing::Log,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TolerancesConfig {
    pub tol_sigma: f64,
    pub tol_delta: f64,
    pub rel_tol: f64,
    pub epsilon: f64,
}

impl Default for TolerancesConfig {
    fn default() -> Self {
        Self {
            tol_sigma: 1e-6,
            tol_delta: 1e-3,
            rel_tol: 1e-8,
            epsilon: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdaptSection {
    pub n_star: usize,
    pub max_k: usize,
    #[serde(default)]
    pub theta: Option<f64>,
    /// Optional certification window `[lo, hi]` inside the sweep.
    #[serde(default)]
    pub window: Option<(f64, f64)>,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default)]
    pub norm_choice: NormChoice,
    /// Supply the stability constant instead of eigen-estimating it.
    #[serde(default)]
    pub alpha_lb: Option<f64>,
}

impl Default for AdaptSection {
    fn default() -> Self {
        Self {
            n_star: 2,
            max_k: 10,
            theta: None,
            window: None,
            normalization: Normalization::default(),
            norm_choice: NormChoice::default(),
            alpha_lb: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    pub layers: Vec<usize>,
    pub orders: Vec<usize>,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            layers: vec![1, 2, 3],
            orders: vec![1, 2, 3],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub sweep: SweepConfig,
    pub tolerances: TolerancesConfig,
    pub method: Method,
    pub adapt: AdaptSection,
    pub convergence: ConvergenceConfig,
    pub output_dir: PathBuf,
    pub parallel_width: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::default(),
            sweep: SweepConfig::default(),
            tolerances: TolerancesConfig::default(),
            method: Method::Mm,
            adapt: AdaptSection::default(),
            convergence: ConvergenceConfig::default(),
            output_dir: PathBuf::from("out"),
            parallel_width: 1,
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config {
                stage: "config".into(),
                message: format!("{}: {e}", path.display()),
            })?;
        let mut cfg: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::Config {
            stage: "config".into(),
            message: format!("{}: {e}", path.display()),
        })?;
        cfg.apply_env();
        Ok(cfg)
    }

    /// `MPTROM_THREADS` overrides the configured parallel width.
    pub fn apply_env(&mut self) {
        if let Ok(value) = std::env::var("MPTROM_THREADS") {
            if let Ok(width) = value.parse::<usize>() {
                self.parallel_width = width.max(1);
            } else {
                log::warn!("ignoring unparsable MPTROM_THREADS = {value:?}");
            }
        }
        if self.parallel_width == 0 {
            self.parallel_width = 1;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let stage = "config";
        if !(self.sweep.omega_min > 0.0 && self.sweep.omega_min < self.sweep.omega_max) {
            return Err(CliError::Config {
                stage: stage.into(),
                message: format!(
                    "sweep.omega_min/omega_max invalid: {} .. {}",
                    self.sweep.omega_min, self.sweep.omega_max
                ),
            });
        }
        if self.sweep.n_output == 0 {
            return Err(CliError::Config {
                stage: stage.into(),
                message: "sweep.n_output must be >= 1 (empty frequency list)".into(),
            });
        }
        if self.sweep.n_snapshots < 2 {
            return Err(CliError::Config {
                stage: stage.into(),
                message: "sweep.n_snapshots must be >= 2".into(),
            });
        }
        if self.sweep.n_output < self.sweep.n_snapshots {
            return Err(CliError::Config {
                stage: stage.into(),
                message: "sweep.n_output must be >= sweep.n_snapshots".into(),
            });
        }
        for (name, v) in [
            ("tolerances.tol_sigma", self.tolerances.tol_sigma),
            ("tolerances.tol_delta", self.tolerances.tol_delta),
            ("tolerances.rel_tol", self.tolerances.rel_tol),
            ("tolerances.epsilon", self.tolerances.epsilon),
        ] {
            if !(v > 0.0) {
                return Err(CliError::Config {
                    stage: stage.into(),
                    message: format!("{name} must be > 0, got {v}"),
                });
            }
        }
        Ok(())
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig::with_rel_tol(self.tolerances.rel_tol)
    }

    pub fn snapshot_frequencies(&self) -> Vec<f64> {
        log_spaced(self.sweep.omega_min, self.sweep.omega_max, self.sweep.n_snapshots)
    }

    pub fn output_frequencies(&self) -> Vec<f64> {
        log_spaced(self.sweep.omega_min, self.sweep.omega_max, self.sweep.n_output)
    }

    /// Builds the configured model (generated or ingested).
    pub fn build_model(&self) -> Result<FullOrderModel, CliError> {
        build_model(&self.model, &self.tolerances)
    }

    pub fn is_radial_model(&self) -> bool {
        matches!(self.model, ModelConfig::RadialSphere { .. })
    }

    pub fn dump(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Builds a model from its config section (generated sphere or manifest).
pub fn build_model(
    model: &ModelConfig,
    tolerances: &TolerancesConfig,
) -> Result<FullOrderModel, CliError> {
    let stage = "model";
    match model {
        ModelConfig::RadialSphere {
            alpha,
            sigma_star,
            mu_r,
            grading_scheme,
            layers,
            target_omega,
            order_p,
            outer_radius,
            n_interior,
            n_exterior,
        } => {
            let materials = MaterialParams::new(*alpha, *sigma_star, *mu_r, tolerances.epsilon)
                .map_err(|e| CliError::Config {
                    stage: stage.into(),
                    message: e.to_string(),
                })?;
            let tau = nondim_skin_depth(*target_omega, &materials).map_err(|e| {
                CliError::Config {
                    stage: stage.into(),
                    message: e.to_string(),
                }
            })?;
            let grading =
                MeshGrading::new(*grading_scheme, *layers, tau).map_err(|e| CliError::Config {
                    stage: stage.into(),
                    message: e.to_string(),
                })?;
            let mut params = RadialSphereParams::new(materials, grading);
            params.order_p = *order_p;
            params.outer_radius = *outer_radius;
            params.n_interior = *n_interior;
            params.n_exterior = *n_exterior;
            build_radial_sphere_fom(&params).map_err(|e| CliError::Config {
                stage: stage.into(),
                message: e.to_string(),
            })
        }
        ModelConfig::Manifest { path } => {
            load_fom_from_files(path).map_err(|e| CliError::Config {
                stage: stage.into(),
                message: e.to_string(),
            })
        }
    }
}

pub(crate) fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| 10f64.powf(lo.log10() + (hi.log10() - lo.log10()) * k as f64 / (n - 1) as f64))
        .collect()
}
