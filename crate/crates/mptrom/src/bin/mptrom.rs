//! Command-line front end: config-driven MPT spectral signature runs.

use clap::{Args, Parser, Subcommand};
use mptrom::cli::{
    cmd_adapt, cmd_convergence, cmd_ingest_check, cmd_oracle, cmd_scale, cmd_signature, CliError,
    ModelConfig, RunConfig,
};
use mptrom::fom::GradingScheme;
use mptrom::mpt::Method;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mptrom",
    about = "Magnetic polarizability tensor spectral signatures with certified reduced-order sweeps",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonOpts {
    /// JSON configuration file; flags override individual keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for emitted artifacts.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Worker count for snapshot solves (MPTROM_THREADS wins over this).
    #[arg(long)]
    threads: Option<usize>,
    /// Print the fully resolved configuration and exit.
    #[arg(long)]
    dump_config: bool,

    /// Sweep range lower end, rad/s.
    #[arg(long)]
    omega_min: Option<f64>,
    /// Sweep range upper end, rad/s.
    #[arg(long)]
    omega_max: Option<f64>,
    /// Number of snapshot frequencies.
    #[arg(long)]
    n_snapshots: Option<usize>,
    /// Number of output frequencies.
    #[arg(long)]
    n_output: Option<usize>,
    /// Tensor evaluation method: IM, FMM or MM.
    #[arg(long)]
    method: Option<String>,
    /// TSVD truncation tolerance.
    #[arg(long)]
    tol_sigma: Option<f64>,
    /// Adaptive stopping tolerance on the normalized certificate maximum.
    #[arg(long)]
    tol_delta: Option<f64>,
    /// Iterative solver relative tolerance.
    #[arg(long)]
    rel_tol: Option<f64>,

    /// Sphere radius scale in meters (radial model).
    #[arg(long)]
    alpha: Option<f64>,
    /// Conductivity in S/m (radial model).
    #[arg(long)]
    sigma_star: Option<f64>,
    /// Relative permeability (radial model).
    #[arg(long)]
    mu_r: Option<f64>,
    /// Element order (radial model).
    #[arg(long)]
    order_p: Option<usize>,
    /// Boundary layer count (radial model).
    #[arg(long)]
    layers: Option<usize>,
    /// Grading scheme: uniform, geometric_decreasing or geometric_increasing.
    #[arg(long)]
    scheme: Option<String>,
    /// Model manifest path (switches to the ingested model).
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// PODP frequency sweep emitting signature.csv, invariants.csv, report.json.
    Signature(CommonOpts),
    /// Greedy adaptive snapshot selection with certified per-iteration output.
    Adapt(CommonOpts),
    /// Full-order accuracy against the exact sphere solution.
    Oracle(CommonOpts),
    /// Grading scheme / layer / order convergence study.
    Convergence(CommonOpts),
    /// Rescale a signature CSV for a size-scaled object.
    Scale {
        /// Input signature CSV.
        input: PathBuf,
        /// Size scale factor s (frequencies divide by s^2, values scale by s^3).
        #[arg(long, short = 's')]
        scale: f64,
        /// Output CSV path.
        #[arg(long, short = 'o')]
        output: PathBuf,
    },
    /// Validate a model manifest without running anything.
    IngestCheck {
        /// Path to manifest.json.
        manifest: PathBuf,
    },
}

fn resolve_config(opts: &CommonOpts) -> Result<RunConfig, CliError> {
    let mut config = match &opts.config {
        Some(path) => RunConfig::from_file(path)?,
        None => {
            let mut c = RunConfig::default();
            c.apply_env();
            c
        }
    };
    if let Some(dir) = &opts.output_dir {
        config.output_dir = dir.clone();
    }
    if let Some(threads) = opts.threads {
        if std::env::var("MPTROM_THREADS").is_err() {
            config.parallel_width = threads.max(1);
        }
    }
    if let Some(v) = opts.omega_min {
        config.sweep.omega_min = v;
    }
    if let Some(v) = opts.omega_max {
        config.sweep.omega_max = v;
    }
    if let Some(v) = opts.n_snapshots {
        config.sweep.n_snapshots = v;
    }
    if let Some(v) = opts.n_output {
        config.sweep.n_output = v;
    }
    if let Some(m) = &opts.method {
        config.method = match m.to_uppercase().as_str() {
            "IM" => Method::Im,
            "FMM" => Method::Fmm,
            "MM" => Method::Mm,
            other => {
                return Err(CliError::Config {
                    stage: "config".into(),
                    message: format!("unknown method '{other}' (expected IM, FMM or MM)"),
                })
            }
        };
    }
    if let Some(v) = opts.tol_sigma {
        config.tolerances.tol_sigma = v;
    }
    if let Some(v) = opts.tol_delta {
        config.tolerances.tol_delta = v;
    }
    if let Some(v) = opts.rel_tol {
        config.tolerances.rel_tol = v;
    }
    if let Some(path) = &opts.manifest {
        config.model = ModelConfig::Manifest { path: path.clone() };
    }
    if let ModelConfig::RadialSphere {
        alpha,
        sigma_star,
        mu_r,
        order_p,
        layers,
        grading_scheme,
        ..
    } = &mut config.model
    {
        if let Some(v) = opts.alpha {
            *alpha = v;
        }
        if let Some(v) = opts.sigma_star {
            *sigma_star = v;
        }
        if let Some(v) = opts.mu_r {
            *mu_r = v;
        }
        if let Some(v) = opts.order_p {
            *order_p = v;
        }
        if let Some(v) = opts.layers {
            *layers = v;
        }
        if let Some(s) = &opts.scheme {
            *grading_scheme = match s.as_str() {
                "uniform" => GradingScheme::Uniform,
                "geometric_decreasing" => GradingScheme::GeometricDecreasing,
                "geometric_increasing" => GradingScheme::GeometricIncreasing,
                other => {
                    return Err(CliError::Config {
                        stage: "config".into(),
                        message: format!("unknown grading scheme '{other}'"),
                    })
                }
            };
        }
    }
    Ok(config)
}

fn run_with_config(
    opts: &CommonOpts,
    f: impl FnOnce(&RunConfig) -> Result<Vec<PathBuf>, CliError>,
) -> Result<(), CliError> {
    let config = resolve_config(opts)?;
    if opts.dump_config {
        println!("{}", config.dump());
        return Ok(());
    }
    let written = f(&config)?;
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Signature(opts) => run_with_config(opts, cmd_signature),
        Command::Adapt(opts) => run_with_config(opts, cmd_adapt),
        Command::Oracle(opts) => run_with_config(opts, cmd_oracle),
        Command::Convergence(opts) => run_with_config(opts, cmd_convergence),
        Command::Scale {
            input,
            scale,
            output,
        } => {
            let written = cmd_scale(input, *scale, output)?;
            for path in written {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::IngestCheck { manifest } => {
            let summary = cmd_ingest_check(manifest)?;
            println!("{summary}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
