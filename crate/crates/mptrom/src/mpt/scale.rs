//! Size scaling of computed signatures.
//!
//! Scaling the object `B_alpha -> s B_alpha` maps the tensor exactly:
//! the value at the remapped frequency `w / s^2` is `s^3` times the original
//! value at `w`, provided the discretization is unchanged. This is pure
//! arithmetic on stored values; nothing is re-solved.

use super::tensor::{MptTensor, SpectralSignature};

fn scale_block(m: &[[f64; 3]; 3], s3: f64) -> [[f64; 3]; 3] {
    let mut out = *m;
    for row in &mut out {
        for v in row {
            *v *= s3;
        }
    }
    out
}

/// Applies the size-scaling map: frequencies divided by `s^2`, all tensor
/// blocks (and certificates) multiplied by `s^3`.
pub fn scale_tensor(signature: &SpectralSignature, s: f64) -> SpectralSignature {
    assert!(s > 0.0, "scale factor must be positive");
    let s2 = s * s;
    let s3 = s * s * s;
    let tensors: Vec<MptTensor> = signature
        .tensors
        .iter()
        .map(|t| MptTensor {
            omega: t.omega / s2,
            n0: scale_block(&t.n0, s3),
            r_part: scale_block(&t.r_part, s3),
            i_part: scale_block(&t.i_part, s3),
        })
        .collect();
    SpectralSignature {
        frequencies: tensors.iter().map(|t| t.omega).collect(),
        tensors,
        method: signature.method,
        certificates: signature.certificates.as_ref().map(|certs| {
            certs
                .iter()
                .map(|c| {
                    let mut out = *c;
                    for v in &mut out {
                        *v *= s3;
                    }
                    out
                })
                .collect()
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mpt::Method;

    fn sample_signature() -> SpectralSignature {
        let tensors: Vec<MptTensor> = (1..=4)
            .map(|k| {
                let w = 10f64.powi(k);
                let v = 1.0 / k as f64;
                MptTensor {
                    omega: w,
                    n0: [[v, 0.1 * v, 0.0], [0.1 * v, v, 0.0], [0.0, 0.0, v]],
                    r_part: [[-0.2 * v; 3]; 3],
                    i_part: [[0.5 * v; 3]; 3],
                }
            })
            .collect();
        let mut sig = SpectralSignature::new(tensors, Method::Mm).unwrap();
        sig.certificates = Some(vec![[1e-3; 6]; 4]);
        sig
    }

    #[test]
    fn unit_scale_is_identity() {
        let sig = sample_signature();
        let scaled = scale_tensor(&sig, 1.0);
        assert_eq!(sig.frequencies, scaled.frequencies);
        assert_eq!(sig.tensors, scaled.tensors);
    }

    #[test]
    fn doubling_size_remaps_exactly() {
        let sig = sample_signature();
        let scaled = scale_tensor(&sig, 2.0);
        for (orig, new) in sig.tensors.iter().zip(&scaled.tensors) {
            assert_eq!(new.omega, orig.omega / 4.0);
            assert_eq!(new.n0[0][0], 8.0 * orig.n0[0][0]);
            assert_eq!(new.i_part[1][2], 8.0 * orig.i_part[1][2]);
        }
        assert_eq!(scaled.certificates.as_ref().unwrap()[0][0], 8e-3);
    }

    #[test]
    fn round_trip_recovers_original() {
        let sig = sample_signature();
        let s = 1.7;
        let back = scale_tensor(&scale_tensor(&sig, s), 1.0 / s);
        for (orig, rt) in sig.tensors.iter().zip(&back.tensors) {
            assert!((rt.omega - orig.omega).abs() <= 1e-15 * orig.omega);
            for i in 0..3 {
                for j in 0..3 {
                    assert!(
                        (rt.n0[i][j] - orig.n0[i][j]).abs()
                            <= 1e-15 * orig.n0[i][j].abs().max(1e-300)
                    );
                }
            }
        }
    }
}
