//! Closed-form eigenvalues of 3x3 real symmetric matrices.

use super::LinalgError;
use std::f64::consts::PI;

const SYMMETRY_TOL: f64 = 1e-12;

fn check_symmetric(a: &[[f64; 3]; 3]) -> Result<(), LinalgError> {
    let defect = (a[0][1] - a[1][0])
        .abs()
        .max((a[0][2] - a[2][0]).abs())
        .max((a[1][2] - a[2][1]).abs());
    let scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    if defect > SYMMETRY_TOL * scale {
        return Err(LinalgError::NotSymmetric {
            defect,
            tol: SYMMETRY_TOL * scale,
        });
    }
    Ok(())
}

/// Eigenvalues of a 3x3 real symmetric matrix, ascending, via the
/// trigonometric solution of the characteristic cubic.
pub fn eig3_sym(a: &[[f64; 3]; 3]) -> Result<[f64; 3], LinalgError> {
    check_symmetric(a)?;
    Ok(eigenvalues_unchecked(a))
}

fn eigenvalues_unchecked(a: &[[f64; 3]; 3]) -> [f64; 3] {
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    let q = (a[0][0] + a[1][1] + a[2][2]) / 3.0;
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    if p == 0.0 {
        return [q, q, q];
    }
    // B = (A - qI) / p; r = det(B) / 2 lies in [-1, 1] up to rounding.
    let b = |i: usize, j: usize| (a[i][j] - if i == j { q } else { 0.0 }) / p;
    let det_b = b(0, 0) * (b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1))
        - b(0, 1) * (b(1, 0) * b(2, 2) - b(1, 2) * b(2, 0))
        + b(0, 2) * (b(1, 0) * b(2, 1) - b(1, 1) * b(2, 0));
    let r = (det_b / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;

    let e_hi = q + 2.0 * p * phi.cos();
    let e_lo = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let e_mid = 3.0 * q - e_hi - e_lo;
    let mut eigs = [e_lo, e_mid, e_hi];
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Eigenvalues (ascending) and an orthonormal eigenvector matrix whose
/// columns match the eigenvalue order. Satisfies
/// `|Q diag(l) Q^T - A|_F <= 1e-10 |A|_F`.
pub fn eig3_sym_with_vectors(a: &[[f64; 3]; 3]) -> Result<([f64; 3], [[f64; 3]; 3]), LinalgError> {
    check_symmetric(a)?;
    let eigs = eigenvalues_unchecked(a);
    let scale = eigs.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);

    // Degenerate spread: any orthonormal frame diagonalizes.
    if (eigs[2] - eigs[0]).abs() <= 1e-14 * scale {
        return Ok((eigs, identity3()));
    }

    let v_lo = eigenvector_for(a, eigs[0], &eigs);
    let v_hi = eigenvector_for(a, eigs[2], &eigs);
    // Re-orthogonalize the extremal pair, then complete the frame.
    let v_lo = normalize3(v_lo);
    let mut v_hi = sub3(v_hi, scale3(v_lo, dot3(v_hi, v_lo)));
    if norm3(v_hi) < 1e-8 {
        v_hi = orthogonal_complement(v_lo);
    }
    let v_hi = normalize3(v_hi);
    let v_mid = cross3(v_hi, v_lo);

    let q = [
        [v_lo[0], v_mid[0], v_hi[0]],
        [v_lo[1], v_mid[1], v_hi[1]],
        [v_lo[2], v_mid[2], v_hi[2]],
    ];
    Ok((eigs, q))
}

/// Eigenvector for `lambda` from the spectral projector built as the product
/// of `(A - e I)` over the *distinct* other eigenvalues. Eigenvalues closer
/// than the rounding scale count as repeated, which keeps the projector away
/// from the near-zero products that plague the naive three-factor form.
fn eigenvector_for(a: &[[f64; 3]; 3], lambda: f64, eigs: &[f64; 3]) -> [f64; 3] {
    let scale = eigs.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut distinct_others: Vec<f64> = Vec::new();
    for &e in eigs {
        if (e - lambda).abs() <= 1e-12 * scale {
            continue;
        }
        if !distinct_others.iter().any(|&d| (d - e).abs() <= 1e-12 * scale) {
            distinct_others.push(e);
        }
    }
    if distinct_others.is_empty() {
        return [1.0, 0.0, 0.0];
    }
    let mut proj = shift3(a, distinct_others[0]);
    for &e in &distinct_others[1..] {
        proj = matmul3(&proj, &shift3(a, e));
    }
    // Any nonzero column of the projector is an eigenvector; take the largest.
    let mut best = [proj[0][0], proj[1][0], proj[2][0]];
    for col in 1..3 {
        let cand = [proj[0][col], proj[1][col], proj[2][col]];
        if norm3(cand) > norm3(best) {
            best = cand;
        }
    }
    best
}

fn identity3() -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

fn shift3(a: &[[f64; 3]; 3], s: f64) -> [[f64; 3]; 3] {
    let mut out = *a;
    for i in 0..3 {
        out[i][i] -= s;
    }
    out
}

fn matmul3(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for (k, bk) in b.iter().enumerate() {
                out[i][j] += a[i][k] * bk[j];
            }
        }
    }
    out
}

fn dot3(x: [f64; 3], y: [f64; 3]) -> f64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

fn norm3(x: [f64; 3]) -> f64 {
    dot3(x, x).sqrt()
}

fn scale3(x: [f64; 3], s: f64) -> [f64; 3] {
    [x[0] * s, x[1] * s, x[2] * s]
}

fn sub3(x: [f64; 3], y: [f64; 3]) -> [f64; 3] {
    [x[0] - y[0], x[1] - y[1], x[2] - y[2]]
}

fn cross3(x: [f64; 3], y: [f64; 3]) -> [f64; 3] {
    [
        x[1] * y[2] - x[2] * y[1],
        x[2] * y[0] - x[0] * y[2],
        x[0] * y[1] - x[1] * y[0],
    ]
}

fn normalize3(x: [f64; 3]) -> [f64; 3] {
    let n = norm3(x);
    if n == 0.0 {
        [1.0, 0.0, 0.0]
    } else {
        scale3(x, 1.0 / n)
    }
}

fn orthogonal_complement(v: [f64; 3]) -> [f64; 3] {
    let trial = if v[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    normalize3(cross3(v, trial))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xorshift(state: &mut u64) -> f64 {
        *state ^= *state << 13;
        *state ^= *state >> 7;
        *state ^= *state << 17;
        (*state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }

    fn random_symmetric(seed: u64) -> [[f64; 3]; 3] {
        let mut s = seed;
        let d = [xorshift(&mut s), xorshift(&mut s), xorshift(&mut s)];
        let o = [xorshift(&mut s), xorshift(&mut s), xorshift(&mut s)];
        [
            [d[0] * 4.0, o[0], o[1]],
            [o[0], d[1] * 4.0, o[2]],
            [o[1], o[2], d[2] * 4.0],
        ]
    }

    fn reconstruct(eigs: &[f64; 3], q: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    out[i][j] += q[i][k] * eigs[k] * q[j][k];
                }
            }
        }
        out
    }

    fn frob(a: &[[f64; 3]; 3]) -> f64 {
        a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn identity_and_diagonal() {
        let eye = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert_eq!(eig3_sym(&eye).unwrap(), [1.0, 1.0, 1.0]);
        let d = [[3.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 2.0]];
        let eigs = eig3_sym(&d).unwrap();
        assert!((eigs[0] - 1.0).abs() < 1e-14);
        assert!((eigs[1] - 2.0).abs() < 1e-14);
        assert!((eigs[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let a = [[1.0, 0.5, 0.0], [0.4, 1.0, 0.0], [0.0, 0.0, 1.0]];
        assert!(matches!(eig3_sym(&a), Err(LinalgError::NotSymmetric { .. })));
    }

    #[test]
    fn roots_satisfy_characteristic_polynomial() {
        // Oracle: each returned eigenvalue is a root of det(A - l I).
        for seed in 1..=50u64 {
            let a = random_symmetric(seed * 31 + 1);
            let eigs = eig3_sym(&a).unwrap();
            let charpoly = |l: f64| {
                let m = shift3(&a, l);
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                    - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            };
            let scale = frob(&a).powi(3).max(1e-30);
            for &l in &eigs {
                assert!(
                    charpoly(l).abs() <= 1e-10 * scale,
                    "p({l}) = {} for seed {seed}",
                    charpoly(l)
                );
            }
            assert!(eigs[0] <= eigs[1] && eigs[1] <= eigs[2]);
        }
    }

    #[test]
    fn trace_and_determinant_invariants() {
        for seed in 1..=30u64 {
            let a = random_symmetric(seed * 97 + 5);
            let eigs = eig3_sym(&a).unwrap();
            let trace = a[0][0] + a[1][1] + a[2][2];
            let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
                - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
            let sum: f64 = eigs.iter().sum();
            let prod: f64 = eigs.iter().product();
            let scale = frob(&a).max(1.0);
            assert!((sum - trace).abs() <= 1e-10 * scale);
            assert!((prod - det).abs() <= 1e-10 * scale.powi(3));
        }
    }

    #[test]
    fn eigenvectors_reconstruct_matrix() {
        for seed in 1..=50u64 {
            let a = random_symmetric(seed * 13 + 3);
            let (eigs, q) = eig3_sym_with_vectors(&a).unwrap();
            let rec = reconstruct(&eigs, &q);
            let mut diff = [[0.0; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    diff[i][j] = rec[i][j] - a[i][j];
                }
            }
            assert!(
                frob(&diff) <= 1e-10 * frob(&a).max(1e-30),
                "reconstruction error {} for seed {seed}",
                frob(&diff)
            );
        }
    }

    #[test]
    fn handles_repeated_eigenvalues() {
        // diag(2, 2, 5) and a rotated copy of it.
        let a = [[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 5.0]];
        let (eigs, q) = eig3_sym_with_vectors(&a).unwrap();
        assert!((eigs[0] - 2.0).abs() < 1e-12 && (eigs[1] - 2.0).abs() < 1e-12);
        let rec = reconstruct(&eigs, &q);
        for i in 0..3 {
            for j in 0..3 {
                assert!((rec[i][j] - a[i][j]).abs() < 1e-10);
            }
        }

        // Rotation by 45 degrees in the (0, 2) plane.
        let s = 0.5f64.sqrt();
        let r = [[s, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, s]];
        let ar = matmul3(&matmul3(&r, &a), &transpose3(&r));
        let (eigs_r, q_r) = eig3_sym_with_vectors(&ar).unwrap();
        for k in 0..3 {
            assert!((eigs_r[k] - eigs[k]).abs() < 1e-10);
        }
        let rec_r = reconstruct(&eigs_r, &q_r);
        for i in 0..3 {
            for j in 0..3 {
                assert!((rec_r[i][j] - ar[i][j]).abs() < 1e-10);
            }
        }
    }

    fn transpose3(a: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = a[j][i];
            }
        }
        out
    }
}
