use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::experiments::{Check, Outcome};

/// Everything a run wrote.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub timestamp: String,
    pub experiment: String,
    pub config: RunConfig,
    pub files: Vec<String>,
    pub checks: Vec<ManifestCheck>,
    pub warnings: Vec<String>,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ManifestCheck {
    pub experiment: String,
    #[serde(flatten)]
    pub check: Check,
}

/// Writes every artifact of a run from a single thread.
pub fn write_artifacts(
    dir: &Path,
    config: &RunConfig,
    experiment: &str,
    outcomes: &[Outcome],
) -> std::io::Result<(Manifest, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let now = chrono::Utc::now();
    let stamp = now.format("%Y%m%dT%H%M%SZ").to_string();
    let mut files = Vec::new();
    for outcome in outcomes {
        let stem = format!(
            "{}-{}-{stamp}",
            outcome.experiment.name(),
            outcome.surface.name()
        );
        for table in &outcome.tables {
            let name = format!("{stem}-{}.csv", table.name);
            let body = table.to_csv().map_err(std::io::Error::other)?;
            std::fs::write(dir.join(&name), body)?;
            files.push(name);
        }
        let name = format!("{stem}.json");
        let report = serde_json::json!({
            "experiment": outcome.experiment.name(),
            "surface": outcome.surface,
            "checks": outcome.checks,
            "warnings": outcome.warnings,
            "report": outcome.report,
        });
        std::fs::write(dir.join(&name), serde_json::to_string_pretty(&report)?)?;
        files.push(name);
    }
    let manifest = Manifest {
        tool: "deltalayer".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        timestamp: now.to_rfc3339(),
        experiment: experiment.into(),
        config: config.clone(),
        files,
        checks: outcomes
            .iter()
            .flat_map(|o| {
                o.checks.iter().map(|c| ManifestCheck {
                    experiment: o.experiment.name().into(),
                    check: c.clone(),
                })
            })
            .collect(),
        warnings: outcomes
            .iter()
            .flat_map(|o| o.warnings.iter().cloned())
            .collect(),
        passed: outcomes.iter().all(Outcome::passed),
    };
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
    Ok((manifest, path))
}
