use std::path::{Path, PathBuf};

use deltalayer::asymptotics::geometric_betas;
use deltalayer::Surface;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    GeometryCheck,
    Transverse,
    Effective,
    Sphere,
    Asymptotics,
    Full,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::GeometryCheck => "geometry-check",
            Experiment::Transverse => "transverse",
            Experiment::Effective => "effective",
            Experiment::Sphere => "sphere",
            Experiment::Asymptotics => "asymptotics",
            Experiment::Full => "full",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Geometric,
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing,
}

fn default_spacing() -> Spacing {
    Spacing::Geometric
}

impl Default for BetaGrid {
    fn default() -> Self {
        Self {
            start: 0.05,
            stop: 0.005,
            count: 4,
            spacing: Spacing::Geometric,
        }
    }
}

impl BetaGrid {
    pub fn values(&self) -> Vec<f64> {
        match self.spacing {
            Spacing::Geometric => geometric_betas(self.start, self.stop, self.count),
            Spacing::Linear if self.count == 1 => vec![self.start],
            Spacing::Linear => (0..self.count)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshConfig {
    /// Surface meshes for the comparison operator, ascending.
    pub resolutions: Vec<usize>,
    /// Grid used to sample curvature sup-norms and layer potentials.
    pub sample_resolution: usize,
    /// Intervals of the one-dimensional finite-difference checks.
    pub oracle_intervals: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self {
            resolutions: vec![32, 64, 128],
            sample_resolution: 32,
            oracle_intervals: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative agreement of secular roots with finite differences.
    pub oracle: f64,
    /// Relative slack of the eigenvalue bracket.
    pub sandwich: f64,
    /// Identity residuals of the surface geometry.
    pub geometry: f64,
    /// Intercept error of the linear expansion, relative to `max(|μ|, 1)`.
    pub intercept: f64,
    /// Allowed quadratic-to-linear ratio of the expansion fit.
    pub quadratic_ratio: f64,
    /// Saturation error of the transverse ground state.
    pub saturation: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            oracle: 1e-5,
            sandwich: 1e-9,
            geometry: 1e-10,
            intercept: 1e-10,
            quadratic_ratio: 0.1,
            saturation: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransverseConfig {
    pub width_ratios: Vec<f64>,
    /// Robin coefficient of the lower operator.
    pub theta: f64,
    /// Random trial functions for the form inequality.
    pub trials: usize,
}

impl Default for TransverseConfig {
    fn default() -> Self {
        Self {
            width_ratios: vec![2.5, 3.0, 5.0, 10.0],
            theta: 0.0,
            trials: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EffectiveConfig {
    /// Eigenvalues per operator.
    pub count: usize,
    /// Layer half-widths of the expansion fit.
    pub d_grid: Vec<f64>,
}

impl Default for EffectiveConfig {
    fn default() -> Self {
        Self {
            count: 4,
            d_grid: vec![0.02, 0.04, 0.06, 0.08],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SphereConfig {
    pub l_max: usize,
    /// Highest angular momentum compared with the radial finite differences.
    pub oracle_l_max: usize,
}

impl Default for SphereConfig {
    fn default() -> Self {
        Self {
            l_max: 4,
            oracle_l_max: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AsymptoticsConfig {
    pub j_max: usize,
    /// Use the closed-form surface spectrum (sphere only) instead of a mesh.
    pub analytic: bool,
}

impl Default for AsymptoticsConfig {
    fn default() -> Self {
        Self {
            j_max: 8,
            analytic: true,
        }
    }
}

/// Fully resolved run configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub experiment: Option<Experiment>,
    #[serde(default = "default_surface")]
    pub surface: Surface,
    #[serde(default)]
    pub beta: BetaGrid,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub transverse: TransverseConfig,
    #[serde(default)]
    pub effective: EffectiveConfig,
    #[serde(default)]
    pub sphere: SphereConfig,
    #[serde(default)]
    pub asymptotics: AsymptoticsConfig,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn default_surface() -> Surface {
    Surface::Sphere { radius: 1.0 }
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty configuration uses defaults")
    }
}

impl RunConfig {
    pub fn from_toml(text: &str, path: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text, path)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        self.surface.validate().map_err(ConfigError::Invalid)?;
        let b = &self.beta;
        if b.count == 0 {
            return invalid("beta.count must be at least 1".into());
        }
        for (name, v) in [("beta.start", b.start), ("beta.stop", b.stop)] {
            if !(v > 0.0 && v < 1.0) {
                return invalid(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("tolerances.oracle", t.oracle),
            ("tolerances.sandwich", t.sandwich),
            ("tolerances.geometry", t.geometry),
            ("tolerances.intercept", t.intercept),
            ("tolerances.quadratic_ratio", t.quadratic_ratio),
            ("tolerances.saturation", t.saturation),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        let m = &self.mesh;
        if m.resolutions.is_empty() || m.resolutions.iter().any(|&n| n < 4) {
            return invalid(format!(
                "mesh.resolutions must be non-empty and at least 4, got {:?}",
                m.resolutions
            ));
        }
        if m.resolutions.windows(2).any(|w| w[0] >= w[1]) {
            return invalid("mesh.resolutions must be strictly increasing".into());
        }
        if m.sample_resolution < 4 {
            return invalid("mesh.sample_resolution must be at least 4".into());
        }
        if m.oracle_intervals < 1000 {
            return invalid("mesh.oracle_intervals must be at least 1000".into());
        }
        let tr = &self.transverse;
        if tr.width_ratios.is_empty() || tr.width_ratios.iter().any(|&r| !(r > 0.0)) {
            return invalid("transverse.width_ratios must be positive".into());
        }
        if !(tr.theta >= 0.0) {
            return invalid(format!(
                "transverse.theta must be non-negative, got {}",
                tr.theta
            ));
        }
        if self.effective.count == 0 {
            return invalid("effective.count must be at least 1".into());
        }
        if self.effective.d_grid.len() < 4 || self.effective.d_grid.iter().any(|&d| !(d > 0.0)) {
            return invalid("effective.d_grid needs at least four positive values".into());
        }
        if self.jobs == Some(0) {
            return invalid("jobs must be at least 1".into());
        }
        Ok(())
    }
}
