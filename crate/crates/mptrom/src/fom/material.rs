//! Material and size parameters shared by every model.

use super::FomError;
use serde::{Deserialize, Serialize};

/// Permeability of free space, H/m.
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;

/// Object scale, conductivity, permeability and regularization for one model.
/// `nu_tilde = alpha^2 mu0 sigma_star` is the frequency-independent weight
/// baked into the conduction matrix, so that `nu = omega * nu_tilde`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    /// Object size scale in meters.
    pub alpha: f64,
    /// Conductivity in S/m.
    pub sigma_star: f64,
    /// Relative permeability (dimensionless).
    pub mu_r: f64,
    /// Regularization parameter for the exterior mass term.
    pub epsilon: f64,
    #[serde(default)]
    nu_tilde: f64,
}

impl MaterialParams {
    pub fn new(alpha: f64, sigma_star: f64, mu_r: f64, epsilon: f64) -> Result<Self, FomError> {
        if !(alpha > 0.0) {
            return Err(FomError::InvalidParameter(format!("alpha = {alpha}, must be > 0")));
        }
        if !(sigma_star > 0.0) {
            return Err(FomError::InvalidParameter(format!(
                "sigma_star = {sigma_star}, must be > 0"
            )));
        }
        if !(mu_r > 0.0) {
            return Err(FomError::InvalidParameter(format!("mu_r = {mu_r}, must be > 0")));
        }
        if !(epsilon > 0.0) {
            return Err(FomError::InvalidParameter(format!(
                "epsilon = {epsilon}, must be > 0"
            )));
        }
        Ok(Self {
            alpha,
            sigma_star,
            mu_r,
            epsilon,
            nu_tilde: alpha * alpha * MU0 * sigma_star,
        })
    }

    /// `alpha^2 mu0 sigma_star`.
    pub fn nu_tilde(&self) -> f64 {
        self.nu_tilde
    }

    /// `nu = omega * nu_tilde`, the non-dimensional conduction parameter.
    pub fn nu(&self, omega: f64) -> f64 {
        omega * self.nu_tilde
    }

    /// Recomputes the derived weight after deserialization.
    pub fn validated(mut self) -> Result<Self, FomError> {
        let fresh = Self::new(self.alpha, self.sigma_star, self.mu_r, self.epsilon)?;
        if self.nu_tilde != 0.0 {
            let rel = (self.nu_tilde - fresh.nu_tilde).abs() / fresh.nu_tilde;
            if rel > 1e-15 {
                return Err(FomError::InvalidParameter(format!(
                    "stored nu_tilde deviates from alpha^2 mu0 sigma_star by {rel:e}"
                )));
            }
        }
        self.nu_tilde = fresh.nu_tilde;
        Ok(self)
    }
}

/// Skin depth `sqrt(2 / (omega sigma mu0 mu_r))` in meters.
pub fn skin_depth(omega: f64, materials: &MaterialParams) -> Result<f64, FomError> {
    if !(omega > 0.0) {
        return Err(FomError::NonPositiveFrequency(omega));
    }
    Ok((2.0 / (omega * materials.sigma_star * MU0 * materials.mu_r)).sqrt())
}

/// Non-dimensional skin depth `tau = delta / alpha = sqrt(2 / (mu_r nu))`.
pub fn nondim_skin_depth(omega: f64, materials: &MaterialParams) -> Result<f64, FomError> {
    Ok(skin_depth(omega, materials)? / materials.alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(alpha: f64, sigma: f64, mu_r: f64) -> MaterialParams {
        MaterialParams::new(alpha, sigma, mu_r, 1e-10).unwrap()
    }

    #[test]
    fn skin_depth_reference_values() {
        let delta = skin_depth(1e8, &mat(1e-3, 1e6, 1.0)).unwrap();
        assert!((delta - 1.2616e-4).abs() < 1e-8, "delta = {delta}");

        // mu_r = 16 quarters the depth.
        let delta16 = skin_depth(1e8, &mat(1e-3, 1e6, 16.0)).unwrap();
        assert!((delta16 - delta / 4.0).abs() < 1e-18);
        assert!((delta16 - 3.1540e-5).abs() < 1e-9, "delta16 = {delta16}");
    }

    #[test]
    fn quadrupling_omega_halves_depth() {
        let m = mat(1e-3, 1e6, 2.0);
        let d1 = skin_depth(2.5e7, &m).unwrap();
        let d4 = skin_depth(1e8, &m).unwrap();
        assert!((d4 - d1 / 2.0).abs() <= 1e-15 * d1);
    }

    #[test]
    fn nondim_depth_consistency() {
        let m = mat(1e-3, 1e6, 1.0);
        let tau = nondim_skin_depth(1e8, &m).unwrap();
        assert!((tau - 0.12616).abs() < 1e-4, "tau = {tau}");
        // tau * alpha = delta, and tau = sqrt(2 / (mu_r nu)).
        let delta = skin_depth(1e8, &m).unwrap();
        assert!((tau * m.alpha - delta).abs() <= 1e-18);
        let via_nu = (2.0 / (m.mu_r * m.nu(1e8))).sqrt();
        assert!((tau - via_nu).abs() <= 1e-14 * tau);

        // Doubling mu_r shrinks tau by 1/sqrt(2).
        let m2 = mat(1e-3, 1e6, 2.0);
        let tau2 = nondim_skin_depth(1e8, &m2).unwrap();
        assert!((tau2 - tau / 2.0f64.sqrt()).abs() <= 1e-15);
    }

    #[test]
    fn rejects_nonpositive_frequency() {
        let m = mat(1e-3, 1e6, 1.0);
        assert!(matches!(
            skin_depth(0.0, &m),
            Err(FomError::NonPositiveFrequency(_))
        ));
        assert!(matches!(
            skin_depth(-1.0, &m),
            Err(FomError::NonPositiveFrequency(_))
        ));
    }

    #[test]
    fn nu_tilde_identity() {
        let m = mat(2e-3, 5e6, 3.0);
        let expect = 2e-3 * 2e-3 * MU0 * 5e6;
        assert!((m.nu_tilde() - expect).abs() <= 1e-15 * expect);
    }
}
