use super::*;
use crate::fom::{
    build_radial_sphere_fom, nondim_skin_depth, GradingScheme, MaterialParams, MeshGrading,
    RadialSphereParams,
};

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

fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 10f64.powf(lo.log10() + (hi.log10() - lo.log10()) * k as f64 / (n - 1) as f64))
        .collect()
}

fn cert(omega: f64, value: f64) -> ErrorCertificate {
    ErrorCertificate {
        omega,
        delta: [[value; 3]; 3],
    }
}

#[test]
fn single_interval_constant_certificates() {
    let snaps = [1.0, 10.0];
    let certs: Vec<ErrorCertificate> = [1.0, 2.0, 5.0]
        .iter()
        .map(|&w| cert(w, 0.25))
        .collect();
    let intervals = interval_max_errors(&certs, &snaps).unwrap();
    assert_eq!(intervals.len(), 1);
    assert_eq!(intervals[0].lambda, 0.25);
    assert_eq!(intervals[0].argmax_omega, 1.0);
}

#[test]
fn peaked_certificate_locates_argmax() {
    let snaps = [1.0, 10.0, 100.0];
    let certs = vec![
        cert(2.0, 0.1),
        cert(5.0, 0.9),
        cert(8.0, 0.2),
        cert(20.0, 0.3),
        cert(100.0, 0.05),
    ];
    let intervals = interval_max_errors(&certs, &snaps).unwrap();
    assert_eq!(intervals.len(), 2);
    assert_eq!(intervals[0].argmax_omega, 5.0);
    assert_eq!(intervals[0].lambda, 0.9);
    // Top snapshot belongs to the closed last interval.
    assert_eq!(intervals[1].argmax_omega, 20.0);
    assert!((global_lambda(&intervals) - 0.9).abs() == 0.0);
}

#[test]
fn empty_interval_is_skipped_with_others_kept() {
    let snaps = [1.0, 10.0, 100.0];
    let certs = vec![cert(2.0, 0.1)];
    let intervals = interval_max_errors(&certs, &snaps).unwrap();
    assert_eq!(intervals.len(), 1);
    assert_eq!(intervals[0].index, 0);

    let nothing: Vec<ErrorCertificate> = vec![cert(1000.0, 1.0)];
    assert!(matches!(
        interval_max_errors(&nothing, &snaps),
        Err(AdaptError::EmptyGrid)
    ));
}

#[test]
fn top_n_star_selection() {
    let intervals = vec![
        IntervalError {
            index: 0,
            lo: 1.0,
            hi: 10.0,
            lambda: 5.0,
            argmax_omega: 3.0,
        },
        IntervalError {
            index: 1,
            lo: 10.0,
            hi: 100.0,
            lambda: 1.0,
            argmax_omega: 30.0,
        },
        IntervalError {
            index: 2,
            lo: 100.0,
            hi: 1000.0,
            lambda: 3.0,
            argmax_omega: 300.0,
        },
    ];
    let snaps = [1.0, 10.0, 100.0, 1000.0];
    let grid: Vec<f64> = vec![];
    let picked = select_new_snapshots(&intervals, &snaps, &grid, 2, None).unwrap();
    assert_eq!(picked, vec![3.0, 300.0]);
}

#[test]
fn theta_threshold_selection() {
    let intervals = vec![
        IntervalError {
            index: 0,
            lo: 1.0,
            hi: 10.0,
            lambda: 5.0,
            argmax_omega: 3.0,
        },
        IntervalError {
            index: 1,
            lo: 10.0,
            hi: 100.0,
            lambda: 1.0,
            argmax_omega: 30.0,
        },
        IntervalError {
            index: 2,
            lo: 100.0,
            hi: 1000.0,
            lambda: 3.0,
            argmax_omega: 300.0,
        },
    ];
    let snaps = [1.0, 10.0, 100.0, 1000.0];
    // theta = 1: only the global maximum interval.
    let only_max = select_new_snapshots(&intervals, &snaps, &[], 2, Some(1.0)).unwrap();
    assert_eq!(only_max, vec![3.0]);
    // theta = 0.5: intervals with lambda >= 2.5, i.e. 5.0 and 3.0.
    let half = select_new_snapshots(&intervals, &snaps, &[], 2, Some(0.5)).unwrap();
    assert_eq!(half, vec![3.0, 300.0]);
}

#[test]
fn duplicate_candidates_fall_back_to_log_midpoint() {
    let intervals = vec![IntervalError {
        index: 0,
        lo: 1.0,
        hi: 100.0,
        lambda: 2.0,
        // Argmax right on an existing snapshot.
        argmax_omega: 1.0,
    }];
    let snaps = [1.0, 100.0];
    let picked = select_new_snapshots(&intervals, &snaps, &[], 1, None).unwrap();
    assert!((picked[0] - 10.0).abs() < 1e-12, "picked {picked:?}");
}

#[test]
fn immediate_stop_with_large_tolerance() {
    let fom = sphere();
    let grid = log_spaced(1e1, 1e8, 25);
    let mut config = AdaptConfig::new(grid);
    config.tol_delta = f64::MAX;
    config.parallel_width = 2;
    let initial = log_spaced(1e1, 1e8, 7);
    let outcome = run_adaptive(&fom, &initial, &config).unwrap();
    assert_eq!(outcome.state.iterations.len(), 1);
    assert_eq!(outcome.state.iterations[0].k, 1);
    assert_eq!(outcome.state.iterations[0].n_snapshots, 7);
    assert_eq!(outcome.state.stopped_reason, StoppedReason::Tolerance);
    assert_eq!(outcome.signature.len(), 25);
    assert!(outcome.signature.certificates.is_some());
}

#[test]
fn snapshot_counts_grow_by_n_star_and_lambda_declines() {
    let fom = sphere();
    let grid = log_spaced(1e1, 1e8, 30);
    let mut config = AdaptConfig::new(grid);
    config.tol_delta = f64::MIN_POSITIVE;
    config.max_k = 3;
    config.n_star = 2;
    let initial = log_spaced(1e1, 1e8, 7);
    let outcome = run_adaptive(&fom, &initial, &config).unwrap();
    let counts: Vec<usize> = outcome
        .state
        .iterations
        .iter()
        .map(|r| r.n_snapshots)
        .collect();
    assert_eq!(counts, vec![7, 9, 11]);
    assert_eq!(outcome.state.stopped_reason, StoppedReason::MaxIterations);
    // Snapshot set sorted and strictly increasing.
    for w in outcome.state.snapshot_frequencies.windows(2) {
        assert!(w[1] > w[0]);
    }
    // Enrichment improves the certificate maximum.
    let first = outcome.state.iterations.first().unwrap().lambda;
    let last = outcome.state.iterations.last().unwrap().lambda;
    assert!(
        last < first,
        "lambda did not improve: {first} -> {last}"
    );
}

#[test]
fn adaptive_run_is_deterministic_across_parallel_widths() {
    let fom = sphere();
    let grid = log_spaced(1e1, 1e8, 20);
    let run = |width: usize| {
        let mut config = AdaptConfig::new(grid.clone());
        config.tol_delta = f64::MIN_POSITIVE;
        config.max_k = 2;
        config.parallel_width = width;
        run_adaptive(&fom, &log_spaced(1e1, 1e8, 5), &config).unwrap()
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a.state.snapshot_frequencies, b.state.snapshot_frequencies);
    for (ra, rb) in a.state.iterations.iter().zip(&b.state.iterations) {
        assert_eq!(ra.lambda.to_bits(), rb.lambda.to_bits());
        assert_eq!(ra.new_omegas, rb.new_omegas);
    }
    for (ta, tb) in a.signature.tensors.iter().zip(&b.signature.tensors) {
        assert_eq!(ta, tb);
    }
}

#[test]
fn comparison_table_has_identical_first_row() {
    let fom = sphere();
    let grid = log_spaced(1e1, 1e8, 20);
    let mut config = AdaptConfig::new(grid);
    config.max_k = 4;
    let rows = compare_log_vs_adaptive(&fom, &[5, 7], &config).unwrap();
    assert_eq!(rows.len(), 2);
    // Both arms start from the same 5 log-spaced snapshots.
    let r0 = rows[0];
    assert_eq!(r0.n_snapshots, 5);
    assert!(
        (r0.lambda_log - r0.lambda_adaptive).abs() <= 1e-12 * r0.lambda_log,
        "first row differs: {} vs {}",
        r0.lambda_log,
        r0.lambda_adaptive
    );
}

#[test]
fn lambda_matches_brute_force_maximum_over_the_window() {
    // Independent oracle: the global maximum equals the largest certificate
    // entry over every grid point inside [omega_1, omega_N].
    let snaps = [1.0, 10.0, 100.0];
    let certs: Vec<ErrorCertificate> = [
        (0.5, 0.11),
        (2.0, 0.42),
        (7.0, 0.09),
        (30.0, 0.77),
        (100.0, 0.15),
        (400.0, 5.0), // outside the top snapshot; must be ignored
    ]
    .iter()
    .map(|&(w, v)| cert(w, v))
    .collect();
    let intervals = interval_max_errors(&certs, &snaps).unwrap();
    let lambda = global_lambda(&intervals);
    let brute = certs
        .iter()
        .filter(|c| c.omega >= snaps[0] && c.omega <= snaps[2])
        .map(|c| c.max_entry())
        .fold(0.0f64, f64::max);
    assert_eq!(lambda, brute);
}

#[test]
fn adaption_window_restricts_enrichment() {
    let fom = sphere();
    let grid = log_spaced(1e1, 1e8, 40);
    let mut config = AdaptConfig::new(grid);
    config.tol_delta = f64::MIN_POSITIVE;
    config.max_k = 3;
    config.window = Some((1e2, 1e5));
    let outcome = run_adaptive(&fom, &log_spaced(1e1, 1e8, 7), &config).unwrap();
    for rec in &outcome.state.iterations {
        for &w in &rec.new_omegas {
            assert!(
                (1e2..=1e5).contains(&w),
                "snapshot {w:e} chosen outside the adaption window"
            );
        }
    }
    // The final sweep still covers the full output grid.
    assert_eq!(outcome.signature.len(), 40);
}
