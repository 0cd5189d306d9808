use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use deltalayer_cli::{run, Experiment, RunConfig};

#[derive(Parser)]
#[command(
    name = "deltalayer",
    version,
    about = "Strong-coupling spectral experiments for δ′ surface interactions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; unknown keys are rejected.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (overrides the configuration).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for random trial functions (overrides the configuration).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Curvature identities and layer bounds.
    GeometryCheck,
    /// One-dimensional transverse eigenvalues and their bounds.
    Transverse,
    /// Spectrum of the comparison operator and its bracketing versions.
    Effective,
    /// Exact spectrum of the spherical shell interaction.
    Sphere,
    /// Bracketed strong-coupling expansion.
    Asymptotics,
    /// All experiments for the configured surface.
    Full,
}

impl From<Command> for Experiment {
    fn from(c: Command) -> Self {
        match c {
            Command::GeometryCheck => Experiment::GeometryCheck,
            Command::Transverse => Experiment::Transverse,
            Command::Effective => Experiment::Effective,
            Command::Sphere => Experiment::Sphere,
            Command::Asymptotics => Experiment::Asymptotics,
            Command::Full => Experiment::Full,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let mut config = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => RunConfig::default(),
    };
    if let Some(out) = cli.out {
        config.out = out;
    }
    if cli.jobs.is_some() {
        config.jobs = cli.jobs;
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let experiment = Experiment::from(cli.command);
    if let Some(configured) = config.experiment {
        if configured != experiment {
            log::warn!(
                "configuration names {}, running {}",
                configured.name(),
                experiment.name()
            );
        }
    }
    match run(&config, experiment) {
        Ok(summary) => {
            for w in &summary.manifest.warnings {
                eprintln!("warning: {w}");
            }
            for (outcome, check) in summary.failures() {
                eprintln!(
                    "FAIL [{}] {}: {}",
                    outcome.experiment.name(),
                    check.name,
                    check.detail
                );
            }
            let total = summary.manifest.checks.len();
            let failed = summary.failures().count();
            println!(
                "{}: {} of {total} checks passed; manifest {}",
                experiment.name(),
                total - failed,
                summary.manifest_path.display()
            );
            ExitCode::from(summary.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
