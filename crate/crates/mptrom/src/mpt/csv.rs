//! CSV export and import of spectral signatures.
//!
//! Schema (exact header, LF endings, shortest round-trip float formatting):
//!
//! ```text
//! omega,re11,re22,re33,re12,re13,re23,im11,im22,im33,im12,im13,im23[,d11,d22,d33,d12,d13,d23]
//! ```
//!
//! `re*` columns carry the full real part `r_tilde = N0 + R`; parsed
//! signatures therefore store it in `n0` with a zero `r_part`. The method
//! tag is not part of the file.

use super::tensor::{Method, MptTensor, SpectralSignature};
use super::MptError;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub const HEADER: &str = "omega,re11,re22,re33,re12,re13,re23,im11,im22,im33,im12,im13,im23";
pub const HEADER_CERT: &str = "omega,re11,re22,re33,re12,re13,re23,im11,im22,im33,im12,im13,im23,d11,d22,d33,d12,d13,d23";

/// The six independent entries of a symmetric 3x3 block in column order.
fn six(m: &[[f64; 3]; 3]) -> [f64; 6] {
    [m[0][0], m[1][1], m[2][2], m[0][1], m[0][2], m[1][2]]
}

fn from_six(v: &[f64; 6]) -> [[f64; 3]; 3] {
    [
        [v[0], v[3], v[4]],
        [v[3], v[1], v[5]],
        [v[4], v[5], v[2]],
    ]
}

pub fn signature_to_string(sig: &SpectralSignature) -> String {
    let mut out = String::new();
    let with_certs = sig.certificates.is_some();
    out.push_str(if with_certs { HEADER_CERT } else { HEADER });
    out.push('\n');
    for (k, t) in sig.tensors.iter().enumerate() {
        let _ = write!(out, "{:e}", t.omega);
        for v in six(&t.r_tilde()) {
            let _ = write!(out, ",{v:e}");
        }
        for v in six(&t.i_part) {
            let _ = write!(out, ",{v:e}");
        }
        if let Some(certs) = &sig.certificates {
            for v in certs[k] {
                let _ = write!(out, ",{v:e}");
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_signature(path: &Path, sig: &SpectralSignature) -> Result<(), MptError> {
    fs::write(path, signature_to_string(sig)).map_err(|e| MptError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Parses a signature CSV. The file does not carry an evaluation-method tag;
/// parsed signatures default to `MM`.
pub fn read_signature(path: &Path) -> Result<SpectralSignature, MptError> {
    let text = fs::read_to_string(path).map_err(|e| MptError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| MptError::ParseError {
        file: path.display().to_string(),
        line: 1,
        message: "empty file".into(),
    })?;
    let with_certs = match header.trim_end() {
        h if h == HEADER => false,
        h if h == HEADER_CERT => true,
        other => {
            return Err(MptError::ParseError {
                file: path.display().to_string(),
                line: 1,
                message: format!("unexpected header '{other}'"),
            })
        }
    };
    let want = if with_certs { 19 } else { 13 };

    let mut tensors = Vec::new();
    let mut certs = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| MptError::ParseError {
                file: path.display().to_string(),
                line: idx + 1,
                message: e.to_string(),
            })?;
        if fields.len() != want {
            return Err(MptError::ParseError {
                file: path.display().to_string(),
                line: idx + 1,
                message: format!("expected {want} fields, found {}", fields.len()),
            });
        }
        let re: [f64; 6] = fields[1..7].try_into().unwrap();
        let im: [f64; 6] = fields[7..13].try_into().unwrap();
        tensors.push(MptTensor {
            omega: fields[0],
            n0: from_six(&re),
            r_part: [[0.0; 3]; 3],
            i_part: from_six(&im),
        });
        if with_certs {
            certs.push(<[f64; 6]>::try_from(&fields[13..19]).unwrap());
        }
    }
    let mut sig = SpectralSignature::new(tensors, Method::Mm)?;
    if with_certs {
        sig.certificates = Some(certs);
    }
    Ok(sig)
}

/// JSON variant of the signature export, mirroring the CSV fields.
pub fn write_signature_json(path: &Path, sig: &SpectralSignature) -> Result<(), MptError> {
    let text = serde_json::to_string_pretty(sig).expect("signature serializes");
    fs::write(path, text).map_err(|e| MptError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Parses the JSON signature variant.
pub fn read_signature_json(path: &Path) -> Result<SpectralSignature, MptError> {
    let text = fs::read_to_string(path).map_err(|e| MptError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| MptError::ParseError {
        file: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Writes the eigenvalue invariants per frequency:
/// `omega,re_eig1,re_eig2,re_eig3,im_eig1,im_eig2,im_eig3`.
pub fn write_invariants(path: &Path, sig: &SpectralSignature) -> Result<(), MptError> {
    let mut out = String::from("omega,re_eig1,re_eig2,re_eig3,im_eig1,im_eig2,im_eig3\n");
    for t in &sig.tensors {
        let (re, im) = super::tensor_invariants(t)?;
        let _ = write!(out, "{:e}", t.omega);
        for v in re.into_iter().chain(im) {
            let _ = write!(out, ",{v:e}");
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| MptError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn sample() -> SpectralSignature {
        let tensors: Vec<MptTensor> = (1..=3)
            .map(|k| {
                let w = 10f64.powi(k);
                let v = 0.1 / k as f64;
                MptTensor {
                    omega: w,
                    n0: [
                        [v, 0.01 * v, 0.002 * v],
                        [0.01 * v, 1.1 * v, 0.0],
                        [0.002 * v, 0.0, 0.9 * v],
                    ],
                    r_part: [[0.0; 3]; 3],
                    i_part: [[0.5 * v; 3]; 3],
                }
            })
            .collect();
        SpectralSignature::new(tensors, Method::Fmm).unwrap()
    }

    #[test]
    fn roundtrip_preserves_values_exactly() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("sig.csv");
        let sig = sample();
        write_signature(&path, &sig).unwrap();
        let back = read_signature(&path).unwrap();
        assert_eq!(sig.frequencies, back.frequencies);
        for (a, b) in sig.tensors.iter().zip(&back.tensors) {
            assert_eq!(a.r_tilde(), b.r_tilde());
            assert_eq!(a.i_part, b.i_part);
        }
        // Re-writing the parsed signature reproduces the file byte-for-byte.
        let text1 = fs::read_to_string(&path).unwrap();
        let text2 = signature_to_string(&back);
        assert_eq!(text1, text2);
    }

    #[test]
    fn certificate_columns_roundtrip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("sig.csv");
        let mut sig = sample();
        sig.certificates = Some(vec![[1e-4, 2e-4, 3e-4, 4e-4, 5e-4, 6e-4]; 3]);
        write_signature(&path, &sig).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(HEADER_CERT));
        let back = read_signature(&path).unwrap();
        assert_eq!(sig.certificates, back.certificates);
    }

    #[test]
    fn header_mismatch_is_an_error() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "omega,nope\n1.0,2.0\n").unwrap();
        assert!(matches!(
            read_signature(&path),
            Err(MptError::ParseError { line: 1, .. })
        ));
    }

    #[test]
    fn lf_endings_and_locale_free_floats() {
        let sig = sample();
        let text = signature_to_string(&sig);
        assert!(!text.contains('\r'));
        assert!(text.lines().count() == 4);
        // Scientific notation with '.' decimal point.
        assert!(text.contains("e1") || text.contains("e-"));
    }
}
// JSON round trip lives with the other format tests.
#[cfg(test)]
mod json_tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn json_variant_mirrors_the_fields() {
        let tensors: Vec<MptTensor> = (1..=2)
            .map(|k| MptTensor {
                omega: 10f64.powi(k),
                n0: [[0.1 * k as f64; 3]; 3],
                r_part: [[-0.02; 3]; 3],
                i_part: [[0.5e-3; 3]; 3],
            })
            .collect();
        let mut sig = SpectralSignature::new(tensors, Method::Im).unwrap();
        sig.certificates = Some(vec![[1e-5; 6]; 2]);
        let dir = tempdir().unwrap();
        let path = dir.path().join("sig.json");
        write_signature_json(&path, &sig).unwrap();
        let back = read_signature_json(&path).unwrap();
        assert_eq!(sig.frequencies, back.frequencies);
        assert_eq!(sig.tensors, back.tensors);
        assert_eq!(sig.certificates, back.certificates);
        assert_eq!(back.method, Method::Im);
    }
}
