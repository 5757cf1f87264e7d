use super::*;
use crate::fom::{
    build_radial_sphere_fom, nondim_skin_depth, GradingScheme, MaterialParams, MeshGrading,
    RadialSphereParams, SolverConfig,
};
use crate::pod::{build_reduced_basis, build_snapshots, online_solve, project_operators, Rom};

fn sphere() -> FullOrderModel {
    let m = MaterialParams::new(1e-3, 1e6, 32.0, 1e-10).unwrap();
    let tau = nondim_skin_depth(1e8, &m).unwrap();
    let grading = MeshGrading::new(GradingScheme::GeometricIncreasing, 2, tau).unwrap();
    let mut params = RadialSphereParams::new(m, grading);
    params.n_interior = 8;
    params.n_exterior = 16;
    params.order_p = 2;
    build_radial_sphere_fom(&params).unwrap()
}

fn log_freqs(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 10f64.powf(1.0 + 7.0 * k as f64 / (n - 1) as f64))
        .collect()
}

#[test]
fn w_blocks_reproduce_explicit_residual() {
    let fom = sphere();
    let solver = SolverConfig::default();
    let snaps = build_snapshots(&fom, &log_freqs(7), &solver, 1).unwrap();
    let basis = build_reduced_basis(&snaps, 1e-6).unwrap();
    let ops = project_operators(&fom, &basis).unwrap();
    let fac = build_residual_factorization(&fom, &basis, NormChoice::Primal).unwrap();

    for &omega in &[2.3e3, 8.8e5, 4.1e7, 9.9e2, 6.4e6] {
        let p = online_solve(&ops, omega).unwrap();
        for dir in 0..3 {
            let w = coefficient_vector(&fac, dir, omega, &p[dir]).unwrap();
            let via_blocks = &fac.w_blocks[dir] * &w;
            let explicit = explicit_residual(&fom, &basis, dir, omega, &p[dir]).unwrap();
            let mut num = 0.0f64;
            let mut den = 0.0f64;
            for k in 0..explicit.len() {
                num += (via_blocks[k] - explicit[k]).norm_sqr();
                den += explicit[k].norm_sqr();
            }
            let rel = (num.sqrt()) / den.sqrt().max(1e-300);
            assert!(
                rel <= 1e-10,
                "residual reproduction at omega {omega}, direction {dir}: {rel}"
            );
        }
    }
}

#[test]
fn residual_norm_matches_explicit_metric_norm() {
    let fom = sphere();
    let solver = SolverConfig::default();
    let snaps = build_snapshots(&fom, &log_freqs(7), &solver, 1).unwrap();
    let basis = build_reduced_basis(&snaps, 1e-6).unwrap();
    let ops = project_operators(&fom, &basis).unwrap();
    let s = fom.norm_matrix();

    for norm_choice in [NormChoice::Primal, NormChoice::Dual] {
        let fac = build_residual_factorization(&fom, &basis, norm_choice).unwrap();
        for &omega in &[5.5e3, 2.2e6] {
            let p = online_solve(&ops, omega).unwrap();
            for dir in 0..3 {
                let fast = residual_norm(&fac, dir, omega, &p[dir]).unwrap();
                let explicit = explicit_residual(&fom, &basis, dir, omega, &p[dir]).unwrap();
                let slow = metric_norm(&s, norm_choice, &explicit).unwrap();
                assert!(
                    (fast - slow).abs() <= 1e-8 * slow.max(1e-300),
                    "{norm_choice:?} omega {omega} dir {dir}: {fast} vs {slow}"
                );
            }
        }
    }
}

#[test]
fn residual_collapses_at_snapshot_frequencies() {
    let fom = sphere();
    let solver = SolverConfig::default();
    let freqs = log_freqs(7);
    let snaps = build_snapshots(&fom, &freqs, &solver, 1).unwrap();
    // No truncation, so the Galerkin solution reproduces snapshots to the
    // solver floor: the reduced residual can be no worse than the snapshot's
    // own iterative-solve residual, measured in the same metric.
    let basis = build_reduced_basis(&snaps, 1e-14).unwrap();
    let ops = project_operators(&fom, &basis).unwrap();
    let fac = build_residual_factorization(&fom, &basis, NormChoice::Primal).unwrap();
    let s = fom.norm_matrix();

    for (col, &omega) in freqs.iter().enumerate() {
        let p = online_solve(&ops, omega).unwrap();
        let a = fom.system_matrix(omega);
        for dir in 0..3 {
            let norm = residual_norm(&fac, dir, omega, &p[dir]).unwrap();
            let snap: Vec<num_complex::Complex64> =
                snaps.data[dir].column(col).iter().cloned().collect();
            let src = crate::fom::assemble_source(&fom, dir, omega).unwrap();
            let aq = a.matvec_alloc(&snap);
            let snapshot_residual: Vec<num_complex::Complex64> =
                src.iter().zip(&aq).map(|(r, v)| r - v).collect();
            let snap_res_s = metric_norm(&s, NormChoice::Primal, &snapshot_residual).unwrap();
            // The Gram route evaluates |r|^2 as a difference of terms of the
            // size of the individual residual blocks; it cannot resolve
            // below sqrt(eps) times that scale. The term scale follows from
            // the diagonal Gram energies.
            let w = coefficient_vector(&fac, dir, omega, &p[dir]).unwrap();
            let g = fac.gram(dir, dir);
            let term_scale: f64 = (0..w.len())
                .map(|k| w[k].norm_sqr() * g[(k, k)].re.max(0.0))
                .sum::<f64>()
                .sqrt();
            let eval_floor = f64::EPSILON.sqrt() * term_scale;
            assert!(
                norm <= 100.0 * snap_res_s.max(eval_floor),
                "omega {omega} dir {dir}: residual {norm} vs floors {snap_res_s} / {eval_floor}"
            );
            let src_norm = metric_norm(&s, NormChoice::Primal, &src).unwrap();
            assert!(
                norm <= 1e-4 * src_norm,
                "omega {omega} dir {dir}: residual {norm} did not collapse vs source {src_norm}"
            );
        }
    }
}

#[test]
fn gram_blocks_are_hermitian_psd() {
    let fom = sphere();
    let solver = SolverConfig::default();
    let snaps = build_snapshots(&fom, &log_freqs(6), &solver, 1).unwrap();
    let basis = build_reduced_basis(&snaps, 1e-6).unwrap();
    let fac = build_residual_factorization(&fom, &basis, NormChoice::Primal).unwrap();
    for d in 0..3 {
        let g = fac.gram(d, d);
        let herm_defect = (g - g.adjoint()).norm();
        assert!(herm_defect <= 1e-10 * g.norm());
        let eigs = g.clone().symmetric_eigen().eigenvalues;
        let max = eigs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-10 * max, "eigenvalues in [{min}, {max}]");
    }
    // Cross blocks satisfy G(i,j) = G(j,i)^H exactly.
    for i in 0..3 {
        for j in 0..3 {
            let diff = (fac.gram(i, j).clone() - fac.gram(j, i).adjoint()).norm();
            assert_eq!(diff, 0.0);
        }
    }
}

#[test]
fn zero_coefficients_give_zero_norm_and_scaling_is_linear() {
    let fom = sphere();
    let solver = SolverConfig::default();
    let snaps = build_snapshots(&fom, &log_freqs(5), &solver, 1).unwrap();
    let basis = build_reduced_basis(&snaps, 1e-6).unwrap();
    let fac = build_residual_factorization(&fom, &basis, NormChoice::Primal).unwrap();
    let m = fac.modes[0];

    // w = 0 exactly: zero residual.
    let g = fac.gram(0, 0);
    let zero = nalgebra::DVector::from_element(1 + 3 * m, Complex64::new(0.0, 0.0));
    let q = (zero.adjoint() * g * &zero)[(0, 0)];
    assert_eq!(q.re.max(0.0).sqrt(), 0.0);

    // Doubling the coefficient vector doubles the norm.
    let ops = project_operators(&fom, &basis).unwrap();
    let p = online_solve(&ops, 3.7e4).unwrap();
    let w1 = coefficient_vector(&fac, 0, 3.7e4, &p[0]).unwrap();
    let n1 = (w1.adjoint() * g * &w1)[(0, 0)].re.max(0.0).sqrt();
    let w2 = w1.map(|z| z * 2.0);
    let n2 = (w2.adjoint() * g * &w2)[(0, 0)].re.max(0.0).sqrt();
    assert!((n2 - 2.0 * n1).abs() <= 1e-12 * n1);
}

#[test]
fn delta_diagonal_degeneracy_and_symmetry() {
    let fom = sphere();
    let solver = SolverConfig::default();
    let snaps = build_snapshots(&fom, &log_freqs(7), &solver, 1).unwrap();
    let basis = build_reduced_basis(&snaps, 1e-6).unwrap();
    let ops = project_operators(&fom, &basis).unwrap();
    let fac = build_residual_factorization(&fom, &basis, NormChoice::Primal).unwrap();
    let stability = StabilityConstant::user_supplied(0.25);

    let omega = 6.6e4;
    let p = online_solve(&ops, omega).unwrap();
    let cert = compute_delta(&fac, &stability, omega, &p, fom.materials.alpha).unwrap();

    // Diagonal: cross term vanishes, leaving 2 |r_i|^2.
    for d in 0..3 {
        let n = residual_norm(&fac, d, omega, &p[d]).unwrap();
        let want = fom.materials.alpha.powi(3) / (8.0 * 0.25) * 2.0 * n * n;
        assert!(
            (cert.delta[d][d] - want).abs() <= 1e-10 * want.max(1e-300),
            "delta[{d}][{d}] = {} vs {want}",
            cert.delta[d][d]
        );
    }
    for i in 0..3 {
        for j in 0..3 {
            assert!(cert.delta[i][j] >= 0.0);
            assert_eq!(cert.delta[i][j], cert.delta[j][i]);
        }
    }
}

#[test]
fn stale_factorization_detected() {
    let fom = sphere();
    let solver = SolverConfig::default();
    let snaps = build_snapshots(&fom, &log_freqs(5), &solver, 1).unwrap();
    let basis = build_reduced_basis(&snaps, 1e-6).unwrap();
    let fac = build_residual_factorization(&fom, &basis, NormChoice::Primal).unwrap();
    let wrong = nalgebra::DVector::from_element(fac.modes[0] + 2, Complex64::new(0.0, 0.0));
    assert!(matches!(
        residual_norm(&fac, 0, 1e4, &wrong),
        Err(CertifyError::StaleFactorization { .. })
    ));
}

#[test]
fn stability_proxy_is_exact_for_s_equals_a() {
    // Feed a model whose system matrix at the probe equals its norm matrix:
    // take the radial sphere's S = K + M_full as both. The generalized
    // singular value is exactly 1, so the estimate is the 0.5 safety factor.
    let fom = sphere();
    let s = fom.norm_matrix();
    let empty =
        crate::linalg::SparseComplexMatrix::from_triplets(fom.n_dofs, fom.n_dofs, &[]).unwrap();
    let mut fake = fom.clone();
    fake.stiffness = s.clone();
    fake.conduction = empty.clone();
    fake.reg_mass = empty;
    fake.norm_mass = None;
    fake.norm_override = Some(s);

    let est = estimate_alpha_lb(&fake, &[1.0]).unwrap();
    assert!(
        (est.alpha_lb - 0.5).abs() < 1e-6,
        "alpha_lb = {}",
        est.alpha_lb
    );
    assert_eq!(est.provenance, Provenance::EigenEstimated);
}

#[test]
fn alpha_lb_shrinks_with_larger_probe_sets() {
    let fom = sphere();
    let single = estimate_alpha_lb(&fom, &[1e4]).unwrap();
    let triple = estimate_alpha_lb(&fom, &[1e4, 1e6, 1e8]).unwrap();
    assert!(triple.alpha_lb <= single.alpha_lb * (1.0 + 1e-12));
    assert!(triple.alpha_lb > 0.0);
}

#[test]
fn certificates_bound_true_error_on_a_coarse_sweep() {
    // Small-scale preview of the acceptance criterion: true full-order
    // tensors vs reduced predictions, certificates from the estimated
    // stability constant.
    let fom = sphere();
    let solver = SolverConfig::default();
    let snap_freqs = log_freqs(7);
    let snaps = build_snapshots(&fom, &snap_freqs, &solver, 1).unwrap();
    let rom = Rom::build(&fom, &snaps, 1e-6).unwrap();
    let fac = build_residual_factorization(&fom, &rom.basis, NormChoice::Primal).unwrap();
    let stability = estimate_alpha_lb(&fom, &snap_freqs).unwrap();

    let n0 = crate::mpt::compute_n0(&fom).unwrap();
    let grid: Vec<f64> = (0..15)
        .map(|k| 10f64.powf(1.0 + 7.0 * k as f64 / 14.0))
        .collect();
    let mut worst_ratio: f64 = 0.0;
    for &omega in &grid {
        let p = online_solve(&rom.ops, omega).unwrap();
        let approx = crate::pod::mpt_mm(&rom.mm, &p, omega).unwrap();
        let truth = crate::mpt::full_order_tensor(
            &fom,
            omega,
            &solver,
            crate::mpt::FullOrderMethod::Fmm,
            &n0,
        )
        .unwrap();
        let cert = compute_delta(&fac, &stability, omega, &p, fom.materials.alpha).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let err_r = (approx.r_tilde()[i][j] - truth.r_tilde()[i][j]).abs();
                let err_i = (approx.i_part[i][j] - truth.i_part[i][j]).abs();
                let err = err_r.max(err_i);
                assert!(
                    cert.delta[i][j] >= err,
                    "violation at omega {omega} ({i},{j}): delta {} < err {err}",
                    cert.delta[i][j]
                );
                if cert.delta[i][j] > 0.0 {
                    worst_ratio = worst_ratio.max(err / cert.delta[i][j]);
                }
            }
        }
    }
    // The bound should hold with real margin, not by hair's breadth.
    assert!(worst_ratio < 1.0, "worst effectivity inverse {worst_ratio}");
}

#[test]
fn cross_revision_factorizations_are_rejected() {
    let fom = sphere();
    let solver = SolverConfig::default();
    let snaps = build_snapshots(&fom, &log_freqs(5), &solver, 1).unwrap();
    let basis_a = build_reduced_basis(&snaps, 1e-6).unwrap();
    let basis_b = build_reduced_basis(&snaps, 1e-6).unwrap();
    let fac = build_residual_factorization(&fom, &basis_a, NormChoice::Primal).unwrap();
    assert!(fac.check_revision(basis_a.revision).is_ok());
    assert!(matches!(
        fac.check_revision(basis_b.revision),
        Err(CertifyError::RevisionMismatch { .. })
    ));
}
