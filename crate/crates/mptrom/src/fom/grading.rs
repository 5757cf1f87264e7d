//! Boundary-layer thickness schemes for resolving the skin depth.

use super::FomError;
use serde::{Deserialize, Serialize};

/// How the `L` boundary layers just inside the conductor surface are sized
/// relative to the target non-dimensional skin depth `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradingScheme {
    /// All layers `tau / L` thick; total thickness `tau`.
    Uniform,
    /// Doubling thicknesses summing to `tau`: `t_1 (2^L - 1) = tau`.
    GeometricDecreasing,
    /// First layer `tau` thick, each next doubled; total `tau (2^L - 1)`.
    GeometricIncreasing,
}

/// Thin-object guard: the layers may not use up more than the conductor
/// half-extent. The built-in models work on the unit-scale object, so the
/// guard defaults to 1.
const UNIT_HALF_EXTENT: f64 = 1.0;

/// Layer thicknesses `t_1..t_L`, innermost-surface layer first.
pub fn layer_thicknesses(
    scheme: GradingScheme,
    layers: usize,
    tau: f64,
) -> Result<Vec<f64>, FomError> {
    layer_thicknesses_guarded(scheme, layers, tau, UNIT_HALF_EXTENT)
}

/// Same as [`layer_thicknesses`] with an explicit half-extent guard.
pub fn layer_thicknesses_guarded(
    scheme: GradingScheme,
    layers: usize,
    tau: f64,
    half_extent: f64,
) -> Result<Vec<f64>, FomError> {
    if layers == 0 {
        return Err(FomError::InvalidGrading("layer count must be >= 1".into()));
    }
    if !(tau > 0.0) {
        return Err(FomError::InvalidGrading(format!("tau = {tau}, must be > 0")));
    }
    let t = match scheme {
        GradingScheme::Uniform => vec![tau / layers as f64; layers],
        GradingScheme::GeometricDecreasing => {
            let t1 = tau / ((1u64 << layers) - 1) as f64;
            (0..layers).map(|l| t1 * (1u64 << l) as f64).collect()
        }
        GradingScheme::GeometricIncreasing => {
            (0..layers).map(|l| tau * (1u64 << l) as f64).collect()
        }
    };
    let total: f64 = t.iter().sum();
    if total > half_extent {
        return Err(FomError::ThinObjectViolation {
            total,
            half_extent,
        });
    }
    Ok(t)
}

/// A resolved layer structure: scheme, count, target depth and thicknesses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshGrading {
    pub scheme: GradingScheme,
    pub layers: usize,
    pub tau: f64,
    pub thicknesses: Vec<f64>,
}

impl MeshGrading {
    pub fn new(scheme: GradingScheme, layers: usize, tau: f64) -> Result<Self, FomError> {
        let thicknesses = layer_thicknesses(scheme, layers, tau)?;
        Ok(Self {
            scheme,
            layers,
            tau,
            thicknesses,
        })
    }

    pub fn total_thickness(&self) -> f64 {
        self.thicknesses.iter().sum()
    }
}
