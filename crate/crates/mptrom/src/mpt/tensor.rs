//! Tensor containers and invariants.

use super::MptError;
use crate::linalg::eig3_sym;
use serde::{Deserialize, Serialize};

/// Which evaluation strategy produced a signature: element quadrature (IM),
/// full sparse matrix algebra (FMM), or reduced precomputed algebra (MM).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Im,
    Fmm,
    Mm,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Im => "IM",
            Method::Fmm => "FMM",
            Method::Mm => "MM",
        };
        f.write_str(s)
    }
}

/// One frequency's MPT split as `M = N0 + R + iI`; `r_tilde = N0 + R` is the
/// full real part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MptTensor {
    pub omega: f64,
    pub n0: [[f64; 3]; 3],
    pub r_part: [[f64; 3]; 3],
    pub i_part: [[f64; 3]; 3],
}

impl MptTensor {
    pub fn r_tilde(&self) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = self.n0[i][j] + self.r_part[i][j];
            }
        }
        out
    }

    /// Largest relative Frobenius asymmetry across the three blocks.
    pub fn symmetry_defect(&self) -> f64 {
        let defect = |m: &[[f64; 3]; 3]| {
            let num = ((m[0][1] - m[1][0]).powi(2)
                + (m[0][2] - m[2][0]).powi(2)
                + (m[1][2] - m[2][1]).powi(2))
            .sqrt();
            let den = frob3(m).max(1e-300);
            num / den
        };
        defect(&self.n0).max(defect(&self.r_part)).max(defect(&self.i_part))
    }

    /// Symmetrizes every block by averaging, returning the prior defect.
    pub fn symmetrized(mut self) -> (Self, f64) {
        let defect = self.symmetry_defect();
        for m in [&mut self.n0, &mut self.r_part, &mut self.i_part] {
            for i in 0..3 {
                for j in (i + 1)..3 {
                    let avg = 0.5 * (m[i][j] + m[j][i]);
                    m[i][j] = avg;
                    m[j][i] = avg;
                }
            }
        }
        (self, defect)
    }

    /// Complex tensor `r_tilde + i I` as a flat 3x3 array.
    pub fn complex(&self) -> [[num_complex::Complex64; 3]; 3] {
        let rt = self.r_tilde();
        let mut out = [[num_complex::Complex64::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = num_complex::Complex64::new(rt[i][j], self.i_part[i][j]);
            }
        }
        out
    }
}

pub(crate) fn frob3(m: &[[f64; 3]; 3]) -> f64 {
    m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// Frequency sweep of tensors with optional certificates (six independent
/// entries `11, 22, 33, 12, 13, 23` per frequency).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralSignature {
    pub frequencies: Vec<f64>,
    pub tensors: Vec<MptTensor>,
    pub method: Method,
    pub certificates: Option<Vec<[f64; 6]>>,
}

impl SpectralSignature {
    pub fn new(tensors: Vec<MptTensor>, method: Method) -> Result<Self, MptError> {
        let frequencies: Vec<f64> = tensors.iter().map(|t| t.omega).collect();
        check_ascending(&frequencies)?;
        Ok(Self {
            frequencies,
            tensors,
            method,
            certificates: None,
        })
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }
}

pub(crate) fn check_ascending(freqs: &[f64]) -> Result<(), MptError> {
    if freqs.is_empty() {
        return Err(MptError::FrequenciesNotAscending);
    }
    if freqs[0] <= 0.0 {
        return Err(MptError::FrequenciesNotAscending);
    }
    for w in freqs.windows(2) {
        if !(w[1] > w[0]) {
            return Err(MptError::FrequenciesNotAscending);
        }
    }
    Ok(())
}

/// Eigenvalues (ascending) of the real and imaginary parts, the
/// orientation-independent classification features.
pub fn tensor_invariants(t: &MptTensor) -> Result<([f64; 3], [f64; 3]), MptError> {
    let re = eig3_sym(&t.r_tilde())?;
    let im = eig3_sym(&t.i_part)?;
    Ok((re, im))
}
