//! Dipole-model voltage prediction for an exciter-measurement coil pair.

use super::tensor::MptTensor;
use super::MptError;
use num_complex::Complex64;
use std::f64::consts::PI;

/// A coil idealized as a magnetic dipole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleCoil {
    /// Position in meters.
    pub position: [f64; 3],
    /// Dipole moment, A m^2.
    pub moment: [f64; 3],
}

/// Background magnetic field of a dipole coil at `point`:
/// `H(x) = (3 (m.r_hat) r_hat - m) / (4 pi |r|^3)`, the Hessian of the free
/// space Green's function applied to the moment.
pub fn dipole_field(coil: &DipoleCoil, point: [f64; 3]) -> Result<[f64; 3], MptError> {
    let r = [
        point[0] - coil.position[0],
        point[1] - coil.position[1],
        point[2] - coil.position[2],
    ];
    let dist_sq = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
    if dist_sq == 0.0 {
        return Err(MptError::CoincidentPositions);
    }
    let dist = dist_sq.sqrt();
    let r_hat = [r[0] / dist, r[1] / dist, r[2] / dist];
    let m_dot_r = coil.moment[0] * r_hat[0] + coil.moment[1] * r_hat[1] + coil.moment[2] * r_hat[2];
    let denom = 4.0 * PI * dist * dist * dist;
    let mut h = [0.0; 3];
    for k in 0..3 {
        h[k] = (3.0 * m_dot_r * r_hat[k] - coil.moment[k]) / denom;
    }
    Ok(h)
}

/// Induced voltage of the coil pair for an object with tensor `t` at
/// position `z`: `V = H0ms(z)_i M_ij H0(z)_j` with `M = r_tilde + i I`.
pub fn predict_voltage(
    exciter: &DipoleCoil,
    sensor: &DipoleCoil,
    z: [f64; 3],
    t: &MptTensor,
) -> Result<Complex64, MptError> {
    let h0 = dipole_field(exciter, z)?;
    let h0_ms = dipole_field(sensor, z)?;
    let m = t.complex();
    let mut v = Complex64::new(0.0, 0.0);
    for i in 0..3 {
        for j in 0..3 {
            v += h0_ms[i] * m[i][j] * h0[j];
        }
    }
    Ok(v)
}
