//! Configuration-driven runner for the deltalayer experiments.

pub mod config;
pub mod experiments;
pub mod output;
pub mod table;

use std::path::PathBuf;

use thiserror::Error;

pub use config::{ConfigError, Experiment, RunConfig};
pub use experiments::{Check, Outcome};
pub use output::Manifest;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numerical(#[from] deltalayer::Error),
    #[error("cannot write artifacts: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl RunError {
    /// 2 for configuration and precondition errors, 3 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        use deltalayer::Error as E;
        match self {
            RunError::Numerical(
                E::NoConvergence { .. }
                | E::NoRoot { .. }
                | E::Multiplicity { .. }
                | E::Factorization(_),
            ) => 3,
            RunError::Io(_) | RunError::Pool(_) => 3,
            _ => 2,
        }
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
    pub outcomes: Vec<Outcome>,
}

impl RunSummary {
    pub fn passed(&self) -> bool {
        self.manifest.passed
    }

    pub fn failures(&self) -> impl Iterator<Item = (&Outcome, &Check)> {
        self.outcomes
            .iter()
            .flat_map(|o| o.checks.iter().filter(|c| !c.pass).map(move |c| (o, c)))
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

/// Validates `config`, runs `experiment` on a pool of `config.jobs` workers
/// and writes the artifacts to `config.out`.
pub fn run(config: &RunConfig, experiment: Experiment) -> Result<RunSummary, RunError> {
    config.validate()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = config.jobs {
        pool = pool.num_threads(jobs);
    }
    let outcomes = pool
        .build()?
        .install(|| experiments::run(config, experiment))?;
    let (manifest, manifest_path) =
        output::write_artifacts(&config.out, config, experiment.name(), &outcomes)?;
    Ok(RunSummary {
        manifest,
        manifest_path,
        outcomes,
    })
}
