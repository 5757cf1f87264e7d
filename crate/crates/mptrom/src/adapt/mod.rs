//! Greedy adaptive snapshot selection: certify the current reduced model on
//! a dense output grid, find the snapshot intervals with the largest
//! certificates, add snapshots at the observed worst frequencies, rebuild,
//! and stop once the normalized certificate maximum drops below tolerance or
//! the iteration cap is reached.

use crate::certify::{
    build_residual_factorization, compute_delta, estimate_alpha_lb, CertifyError,
    ErrorCertificate, NormChoice, ResidualFactorization, StabilityConstant,
};
use crate::fom::{FomError, FullOrderModel, SolverConfig};
use crate::mpt::{Method, MptError, MptTensor, SpectralSignature};
use crate::pod::{build_snapshots, online_solve, PodError, Rom};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AdaptError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("no grid point falls into any snapshot interval")]
    EmptyGrid,
    #[error("no admissible new snapshot candidates remain")]
    NoCandidates,
    #[error(transparent)]
    Pod(#[from] PodError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error(transparent)]
    Mpt(#[from] MptError),
    #[error(transparent)]
    Fom(#[from] FomError),
}

/// Whether the stopping quantity divides by the physical object volume
/// `a^3 |B|` or the dimensionless `|B|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    PhysicalVolume,
    UnitVolume,
}

#[derive(Debug, Clone)]
pub struct AdaptConfig {
    /// Stopping tolerance on `Lambda / |B_alpha|`.
    pub tol_delta: f64,
    /// Snapshots added per iteration (at most one per interval).
    pub n_star: usize,
    /// Iteration cap (certifications counted from 1).
    pub max_k: usize,
    /// Optional threshold variant: enrich every interval whose maximum
    /// reaches `theta * Lambda` instead of the top `n_star`.
    pub theta: Option<f64>,
    /// Dense evaluation grid for certification and the final sweep.
    pub output_frequencies: Vec<f64>,
    /// Restricts certification (not the final sweep) to a sub-range.
    pub window: Option<(f64, f64)>,
    pub normalization: Normalization,
    pub tol_sigma: f64,
    pub solver: SolverConfig,
    pub parallel_width: usize,
    pub norm_choice: NormChoice,
    /// Stability constant; estimated from the initial snapshots when absent.
    pub stability: Option<StabilityConstant>,
}

impl AdaptConfig {
    pub fn new(output_frequencies: Vec<f64>) -> Self {
        Self {
            tol_delta: 1e-3,
            n_star: 2,
            max_k: 10,
            theta: None,
            output_frequencies,
            window: None,
            normalization: Normalization::default(),
            tol_sigma: 1e-6,
            solver: SolverConfig::default(),
            parallel_width: 1,
            norm_choice: NormChoice::default(),
            stability: None,
        }
    }

    fn validate(&self) -> Result<(), AdaptError> {
        if !(self.tol_delta > 0.0) {
            return Err(AdaptError::InvalidConfig("tol_delta must be > 0".into()));
        }
        if self.n_star == 0 {
            return Err(AdaptError::InvalidConfig("n_star must be >= 1".into()));
        }
        if self.max_k <= 1 {
            return Err(AdaptError::InvalidConfig("max_k must be > 1".into()));
        }
        if let Some(theta) = self.theta {
            if !(theta > 0.0 && theta <= 1.0) {
                return Err(AdaptError::InvalidConfig(format!(
                    "theta = {theta} must lie in (0, 1]"
                )));
            }
        }
        if self.output_frequencies.is_empty() {
            return Err(AdaptError::InvalidConfig(
                "output frequency grid is empty".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub n_snapshots: usize,
    pub lambda: f64,
    pub lambda_normalized: f64,
    pub new_omegas: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StoppedReason {
    Tolerance,
    MaxIterations,
}

/// Snapshot history and per-iteration bookkeeping of one adaptive run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdaptState {
    pub snapshot_frequencies: Vec<f64>,
    pub iterations: Vec<IterationRecord>,
    pub stopped_reason: StoppedReason,
}

/// Maximum certificate entry of one snapshot interval and where it occurs.
#[derive(Debug, Clone, Copy)]
pub struct IntervalError {
    /// Index `n` of the interval `[omega_n, omega_n+1)`.
    pub index: usize,
    pub lo: f64,
    pub hi: f64,
    pub lambda: f64,
    pub argmax_omega: f64,
}

/// Per-interval maxima of the certificates over the grid. Intervals are
/// half-open `[omega_n, omega_n+1)`; the last closes at the top snapshot.
/// Grid points outside every interval are ignored; intervals without grid
/// points are skipped with a warning.
pub fn interval_max_errors(
    certificates: &[ErrorCertificate],
    snapshot_freqs: &[f64],
) -> Result<Vec<IntervalError>, AdaptError> {
    if snapshot_freqs.len() < 2 {
        return Err(AdaptError::InvalidConfig(
            "need at least two snapshots to form intervals".into(),
        ));
    }
    let n_intervals = snapshot_freqs.len() - 1;
    let mut out: Vec<IntervalError> = Vec::with_capacity(n_intervals);
    let mut any = false;
    for n in 0..n_intervals {
        let lo = snapshot_freqs[n];
        let hi = snapshot_freqs[n + 1];
        let last = n + 1 == n_intervals;
        let mut best: Option<(f64, f64)> = None;
        for cert in certificates {
            let inside = cert.omega >= lo && (cert.omega < hi || (last && cert.omega <= hi));
            if !inside {
                continue;
            }
            let value = cert.max_entry();
            if best.map_or(true, |(b, _)| value > b) {
                best = Some((value, cert.omega));
            }
        }
        match best {
            Some((lambda, argmax_omega)) => {
                any = true;
                out.push(IntervalError {
                    index: n,
                    lo,
                    hi,
                    lambda,
                    argmax_omega,
                });
            }
            None => {
                log::warn!("no grid point falls in snapshot interval [{lo:e}, {hi:e}); skipped");
            }
        }
    }
    if !any {
        return Err(AdaptError::EmptyGrid);
    }
    Ok(out)
}

/// Global certificate maximum over the intervals.
pub fn global_lambda(intervals: &[IntervalError]) -> f64 {
    intervals.iter().map(|iv| iv.lambda).fold(0.0, f64::max)
}

/// Picks the new snapshot frequencies: by default the argmax frequencies of
/// the `n_star` largest interval maxima (at most one per interval); with
/// `theta` set, every interval whose maximum reaches `theta * Lambda`.
/// A candidate that collides with an existing snapshot falls back to the
/// interval's log-midpoint, then to the nearest distinct grid point.
pub fn select_new_snapshots(
    intervals: &[IntervalError],
    snapshot_freqs: &[f64],
    grid: &[f64],
    n_star: usize,
    theta: Option<f64>,
) -> Result<Vec<f64>, AdaptError> {
    if intervals.is_empty() {
        return Err(AdaptError::NoCandidates);
    }
    let lambda = global_lambda(intervals);
    let mut ranked: Vec<&IntervalError> = intervals.iter().collect();
    ranked.sort_by(|a, b| b.lambda.partial_cmp(&a.lambda).unwrap());
    let chosen: Vec<&IntervalError> = match theta {
        Some(theta) => ranked
            .into_iter()
            .filter(|iv| iv.lambda >= theta * lambda)
            .collect(),
        None => ranked.into_iter().take(n_star).collect(),
    };

    let is_taken = |omega: f64, picked: &[f64]| {
        snapshot_freqs.contains(&omega) || picked.contains(&omega)
    };
    let mut picked: Vec<f64> = Vec::with_capacity(chosen.len());
    for iv in chosen {
        let mut candidate = iv.argmax_omega;
        if is_taken(candidate, &picked) {
            candidate = (iv.lo * iv.hi).sqrt();
        }
        if is_taken(candidate, &picked) {
            // Nearest distinct grid point inside the interval, by log distance.
            let mut alternatives: Vec<f64> = grid
                .iter()
                .cloned()
                .filter(|&w| w > iv.lo && w < iv.hi && !is_taken(w, &picked))
                .collect();
            alternatives.sort_by(|a, b| {
                let da = (a.ln() - iv.argmax_omega.ln()).abs();
                let db = (b.ln() - iv.argmax_omega.ln()).abs();
                da.partial_cmp(&db).unwrap()
            });
            match alternatives.first() {
                Some(&w) => candidate = w,
                None => continue,
            }
        }
        picked.push(candidate);
    }
    if picked.is_empty() {
        return Err(AdaptError::NoCandidates);
    }
    picked.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(picked)
}

/// Everything produced by one adaptive run.
pub struct AdaptOutcome {
    pub rom: Rom,
    pub factorization: ResidualFactorization,
    pub stability: StabilityConstant,
    /// Final online sweep over the full output grid, certificates attached.
    pub signature: SpectralSignature,
    pub state: AdaptState,
    /// Certified signatures per iteration (over the certification window).
    pub per_iteration_signatures: Vec<SpectralSignature>,
}

fn certification_grid(config: &AdaptConfig) -> Vec<f64> {
    match config.window {
        Some((lo, hi)) => config
            .output_frequencies
            .iter()
            .cloned()
            .filter(|&w| w >= lo && w <= hi)
            .collect(),
        None => config.output_frequencies.clone(),
    }
}

fn certified_sweep(
    fom: &FullOrderModel,
    rom: &Rom,
    fac: &ResidualFactorization,
    stability: &StabilityConstant,
    grid: &[f64],
) -> Result<(SpectralSignature, Vec<ErrorCertificate>), AdaptError> {
    fac.check_revision(rom.ops.revision)?;
    let mut tensors: Vec<MptTensor> = Vec::with_capacity(grid.len());
    let mut certs: Vec<ErrorCertificate> = Vec::with_capacity(grid.len());
    for &omega in grid {
        let p = online_solve(&rom.ops, omega)?;
        tensors.push(crate::pod::mpt_mm(&rom.mm, &p, omega)?);
        certs.push(compute_delta(fac, stability, omega, &p, fom.materials.alpha)?);
    }
    let mut sig = SpectralSignature::new(tensors, Method::Mm)?;
    sig.certificates = Some(certs.iter().map(|c| c.six()).collect());
    Ok((sig, certs))
}

fn normalization_volume(fom: &FullOrderModel, normalization: Normalization) -> f64 {
    match normalization {
        Normalization::PhysicalVolume => fom.volume_b_alpha,
        Normalization::UnitVolume => fom.unit_volume(),
    }
}

/// Runs the adaptive loop from log-spaced initial snapshots.
pub fn run_adaptive(
    fom: &FullOrderModel,
    initial_snapshots: &[f64],
    config: &AdaptConfig,
) -> Result<AdaptOutcome, AdaptError> {
    config.validate()?;
    let cert_grid = certification_grid(config);
    if cert_grid.is_empty() {
        return Err(AdaptError::EmptyGrid);
    }

    let mut snaps = build_snapshots(fom, initial_snapshots, &config.solver, config.parallel_width)?;
    let stability = match config.stability {
        Some(s) => s,
        None => estimate_alpha_lb(fom, initial_snapshots)?,
    };
    let volume = normalization_volume(fom, config.normalization);

    let mut iterations: Vec<IterationRecord> = Vec::new();
    let mut per_iteration_signatures: Vec<SpectralSignature> = Vec::new();
    let mut k = 1usize;
    let (rom, fac, stopped_reason) = loop {
        let rom = Rom::build(fom, &snaps, config.tol_sigma)?;
        let fac = build_residual_factorization(fom, &rom.basis, config.norm_choice)?;
        let (sig, certs) = certified_sweep(fom, &rom, &fac, &stability, &cert_grid)?;
        per_iteration_signatures.push(sig);
        let intervals = interval_max_errors(&certs, &snaps.frequencies)?;
        let lambda = global_lambda(&intervals);
        let lambda_normalized = lambda / volume;
        iterations.push(IterationRecord {
            k,
            n_snapshots: snaps.len(),
            lambda,
            lambda_normalized,
            new_omegas: Vec::new(),
        });

        if lambda_normalized <= config.tol_delta {
            break (rom, fac, StoppedReason::Tolerance);
        }
        if k >= config.max_k {
            break (rom, fac, StoppedReason::MaxIterations);
        }
        k += 1;
        let new_omegas = select_new_snapshots(
            &intervals,
            &snaps.frequencies,
            &cert_grid,
            config.n_star,
            config.theta,
        )?;
        iterations
            .last_mut()
            .expect("iteration recorded above")
            .new_omegas = new_omegas.clone();
        let extra = build_snapshots(fom, &new_omegas, &config.solver, config.parallel_width)?;
        snaps = snaps.merged_with(&extra)?;
    };

    let (signature, _) = certified_sweep(
        fom,
        &rom,
        &fac,
        &stability,
        &config.output_frequencies,
    )?;
    Ok(AdaptOutcome {
        rom,
        factorization: fac,
        stability,
        signature,
        state: AdaptState {
            snapshot_frequencies: snaps.frequencies.clone(),
            iterations,
            stopped_reason,
        },
        per_iteration_signatures,
    })
}

/// One row of the log-spaced vs adaptive comparison.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComparisonRow {
    pub n_snapshots: usize,
    pub lambda_log: f64,
    pub lambda_adaptive: f64,
}

fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 10f64.powf(lo.log10() + (hi.log10() - lo.log10()) * k as f64 / (n - 1) as f64))
        .collect()
}

/// Certificate maxima of non-adaptive log-spaced snapshot sets versus the
/// adaptive run grown to the same snapshot counts. `n_values` must be
/// ascending and compatible with growth by `n_star` per iteration.
pub fn compare_log_vs_adaptive(
    fom: &FullOrderModel,
    n_values: &[usize],
    config: &AdaptConfig,
) -> Result<Vec<ComparisonRow>, AdaptError> {
    config.validate()?;
    if n_values.len() < 2 {
        return Err(AdaptError::InvalidConfig(
            "need at least two snapshot counts".into(),
        ));
    }
    let n0 = n_values[0];
    let n_max = *n_values.last().unwrap();
    let cert_grid = certification_grid(config);
    let (lo, hi) = (
        *cert_grid.first().ok_or(AdaptError::EmptyGrid)?,
        *cert_grid.last().ok_or(AdaptError::EmptyGrid)?,
    );

    // Adaptive arm: grow once, reading lambda at each recorded count.
    let mut adaptive_config = config.clone();
    adaptive_config.tol_delta = f64::MIN_POSITIVE;
    adaptive_config.max_k = 1 + (n_max - n0).div_ceil(config.n_star);
    let outcome = run_adaptive(fom, &log_spaced(lo, hi, n0), &adaptive_config)?;
    let lambda_adaptive = |n: usize| -> Option<f64> {
        outcome
            .state
            .iterations
            .iter()
            .find(|rec| rec.n_snapshots == n)
            .map(|rec| rec.lambda)
    };

    let stability = Some(outcome.stability);
    let mut rows = Vec::with_capacity(n_values.len());
    for &n in n_values {
        let freqs = log_spaced(lo, hi, n);
        let snaps = build_snapshots(fom, &freqs, &config.solver, config.parallel_width)?;
        let rom = Rom::build(fom, &snaps, config.tol_sigma)?;
        let fac = build_residual_factorization(fom, &rom.basis, config.norm_choice)?;
        let (_, certs) = certified_sweep(
            fom,
            &rom,
            &fac,
            &stability.expect("stability fixed above"),
            &cert_grid,
        )?;
        let intervals = interval_max_errors(&certs, &snaps.frequencies)?;
        let lambda_log = global_lambda(&intervals);
        let lambda_adapt = lambda_adaptive(n).ok_or_else(|| {
            AdaptError::InvalidConfig(format!(
                "adaptive run never reached {n} snapshots (counts {:?})",
                outcome
                    .state
                    .iterations
                    .iter()
                    .map(|r| r.n_snapshots)
                    .collect::<Vec<_>>()
            ))
        })?;
        rows.push(ComparisonRow {
            n_snapshots: n,
            lambda_log,
            lambda_adaptive: lambda_adapt,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests;
