use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dfdg::harness::{self, CommandOutput, ExperimentConfig};
use dfdg::Error;

#[derive(Parser)]
#[command(name = "dfdg", version, about = "Discrete gradient integrator experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and write it as CSV.
    Integrate(Common),
    /// Global error against step size, with fitted orders.
    Converge(Common),
    /// Energy error over time.
    EnergyDrift(Common),
    /// Energy evaluations per Newton iteration, measured against the formulas.
    Counts(Common),
    /// Errors of the finite-difference S4, residual and Jacobian.
    Inexactness(Common),
    /// Error against evaluation count and wall time.
    WorkPrecision(Common),
    /// Topographic Hamiltonian demo with containment check.
    Terrain(Common),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// harmonic, lennard-jones, double-pendulum or terrain.
    #[arg(long)]
    system: Option<String>,
    /// Harmonic oscillator dimension.
    #[arg(long)]
    dim: Option<String>,
    /// Comma-separated method labels, or `all`.
    #[arg(long)]
    method: Option<String>,
    /// Step size, or comma-separated step sizes.
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    h_max: Option<String>,
    #[arg(long)]
    levels: Option<String>,
    /// End time.
    #[arg(long)]
    time: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    /// Newton residual tolerance.
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    /// `fail` or `accept` when the iteration cap is hit.
    #[arg(long)]
    on_max_iter: Option<String>,
    #[arg(long)]
    tau1: Option<String>,
    #[arg(long)]
    tau2: Option<String>,
    #[arg(long)]
    eps_bar: Option<String>,
    /// Bound of the noise added to H.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated initial state.
    #[arg(long)]
    x0: Option<String>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<String>,
    /// Elevation grid file for the terrain system.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    synth_seed: Option<String>,
    #[arg(long)]
    synth_size: Option<String>,
    #[arg(long)]
    synth_bumps: Option<String>,
    /// Side of the potential raster written by `terrain`.
    #[arg(long)]
    raster: Option<String>,
}

impl Common {
    fn resolve(&self) -> dfdg::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        let overrides = [
            ("system", &self.system),
            ("dim", &self.dim),
            ("method", &self.method),
            ("h", &self.h),
            ("h_max", &self.h_max),
            ("levels", &self.levels),
            ("time", &self.time),
            ("steps", &self.steps),
            ("tol", &self.tol),
            ("max_iter", &self.max_iter),
            ("on_max_iter", &self.on_max_iter),
            ("tau1", &self.tau1),
            ("tau2", &self.tau2),
            ("eps_bar", &self.eps_bar),
            ("noise", &self.noise),
            ("seed", &self.seed),
            ("x0", &self.x0),
            ("out", &self.out),
            ("grid", &self.grid),
            ("synth_seed", &self.synth_seed),
            ("synth_size", &self.synth_size),
            ("synth_bumps", &self.synth_bumps),
            ("raster", &self.raster),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, v).map_err(|e| Error::Config(format!("--{}: {e}", key.replace('_', "-"))))?;
            }
        }
        Ok(cfg)
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "csv".into());
    path.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

fn emit(cfg: &ExperimentConfig, out: &CommandOutput) -> dfdg::Result<()> {
    match &cfg.out {
        Some(path) => {
            for file in &out.files {
                let target = match file.suffix {
                    None => path.clone(),
                    Some(s) => sibling(path, s),
                };
                std::fs::write(&target, &file.content).map_err(|e| Error::Io(format!("{}: {e}", target.display())))?;
                eprintln!("wrote {}", target.display());
            }
        }
        None => {
            print!("{}", out.primary());
            if out.files.len() > 1 {
                eprintln!("note: secondary outputs are written only with --out");
            }
        }
    }
    for line in &out.summary {
        eprintln!("{line}");
    }
    Ok(())
}

fn run(cli: Cli) -> dfdg::Result<CommandOutput> {
    let (common, name) = match &cli.command {
        Command::Integrate(c) => (c, "integrate"),
        Command::Converge(c) => (c, "converge"),
        Command::EnergyDrift(c) => (c, "energy-drift"),
        Command::Counts(c) => (c, "counts"),
        Command::Inexactness(c) => (c, "inexactness"),
        Command::WorkPrecision(c) => (c, "work-precision"),
        Command::Terrain(c) => (c, "terrain"),
    };
    let cfg = common.resolve()?;
    let out = match name {
        "integrate" => harness::cmd_integrate(&cfg)?.1,
        "converge" => harness::cmd_converge(&cfg)?.1,
        "energy-drift" => harness::cmd_energy_drift(&cfg)?.1,
        "counts" => harness::cmd_counts(&cfg)?.1,
        "inexactness" => harness::cmd_inexactness(&cfg)?.1,
        "work-precision" => harness::cmd_work_precision(&cfg)?.1,
        _ => harness::cmd_terrain(&cfg)?.1,
    };
    emit(&cfg, &out)?;
    Ok(out)
}

/// 2 for configuration and I/O problems, 1 for numerical failures.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Io(_)
        | Error::Parse { .. }
        | Error::Grid(_)
        | Error::InvalidParameter(_)
        | Error::DimensionMismatch { .. } => 2,
        Error::Step { source, .. } => exit_code(source),
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => match out.failure {
            None => ExitCode::SUCCESS,
            Some(reason) => {
                eprintln!("check failed: {reason}");
                ExitCode::from(1)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
