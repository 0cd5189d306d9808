use faer::linalg::solvers::SolveLstsq;
use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eigen::eigen_lowest;
use super::mesh::SurfaceMesh;
use super::operator::{assemble_s, assemble_u, Sign};
use crate::error::{Error, Result};
use crate::geometry::{layer_jet, sup_norms, SupNorms, Surface, SurfaceChart};

/// Sampled bounds `d v⁻ ≤ V₁ ≤ d v⁺` over the layer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VBounds {
    pub d: f64,
    pub v_minus: f64,
    pub v_plus: f64,
    pub refinement_change: f64,
    pub stable: bool,
}

impl VBounds {
    pub fn pair(&self) -> (f64, f64) {
        (self.v_minus, self.v_plus)
    }
}

const TRANSVERSE_SAMPLES: usize = 17;

fn v1_extremes<C: SurfaceChart + ?Sized>(chart: &C, d: f64, n: usize) -> Result<(f64, f64)> {
    let points = chart.domain().sample_points(n);
    let us: Vec<f64> = (0..TRANSVERSE_SAMPLES)
        .map(|k| (-d + 2.0 * d * k as f64 / (TRANSVERSE_SAMPLES - 1) as f64).clamp(-d, d))
        .collect();
    points
        .par_iter()
        .map(|&s| -> Result<(f64, f64)> {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for &u in &us {
                let v = layer_jet(chart, s, u, d)?.v1 / d;
                lo = lo.min(v);
                hi = hi.max(v);
            }
            Ok((lo, hi))
        })
        .try_reduce(
            || (f64::INFINITY, f64::NEG_INFINITY),
            |a, b| Ok((a.0.min(b.0), a.1.max(b.1))),
        )
}

/// `v⁻ = min V₁/d` and `v⁺ = max V₁/d` over an `n × n` surface grid times
/// transverse samples, checked against a grid of `2n`.
pub fn estimate_v_pm<C: SurfaceChart + ?Sized>(
    chart: &C,
    d: f64,
    n_samples: usize,
) -> Result<VBounds> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!(
            "half-width must be positive, got {d}"
        )));
    }
    let coarse = v1_extremes(chart, d, n_samples)?;
    let fine = v1_extremes(chart, d, 2 * n_samples)?;
    let scale = fine.0.abs().max(fine.1.abs());
    let change = if scale < 1e-9 {
        0.0
    } else {
        ((fine.0 - coarse.0).abs().max((fine.1 - coarse.1).abs())) / scale
    };
    let stable = change < 0.05;
    if !stable {
        log::warn!(
            "v± for {} at d = {d} changed by {:.2}% under refinement",
            chart.label(),
            100.0 * change
        );
    }
    Ok(VBounds {
        d,
        v_minus: fine.0,
        v_plus: fine.1,
        refinement_change: change,
        stable,
    })
}

/// `l(l+1)/R²` with multiplicity `2l + 1`, the first `count` values.
pub fn sphere_surface_spectrum(radius: f64, count: usize) -> Vec<f64> {
    (0..)
        .flat_map(|l: usize| {
            std::iter::repeat((l * (l + 1)) as f64 / (radius * radius)).take(2 * l + 1)
        })
        .take(count)
        .collect()
}

/// Spectrum of `U^±_d` on the sphere: `C_±(d) l(l+1)/R² + v^± d`.
pub fn sphere_u_spectrum(
    radius: f64,
    d: f64,
    sign: Sign,
    norms: &SupNorms,
    v_pm: (f64, f64),
    count: usize,
) -> Result<Vec<f64>> {
    if !(d >= 0.0) || d >= norms.rho {
        return Err(Error::LayerWidth(format!(
            "half-width d = {d} must lie in [0, ρ = {})",
            norms.rho
        )));
    }
    let (c, v) = match sign {
        Sign::Plus => (norms.c_plus(d), v_pm.1),
        Sign::Minus => (norms.c_minus(d), v_pm.0),
    };
    Ok(sphere_surface_spectrum(radius, count)
        .into_iter()
        .map(|mu| c * mu + v * d)
        .collect())
}

/// Which spectra feed a Lemma 2 fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SpectrumSource {
    /// Closed form; sphere only.
    Analytic,
    /// Tensor mesh of the given resolution.
    Mesh { resolution: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Options {
    pub source: SpectrumSource,
    /// Allowed `|intercept - μ_j|` relative to `max(|μ_j|, 1)`.
    pub intercept_tol: f64,
    /// Allowed ratio of the quadratic to the linear term at the largest d.
    pub quadratic_ratio_tol: f64,
    /// Sampling resolution for sup-norms and v±.
    pub sample_resolution: usize,
}

impl Default for Lemma2Options {
    fn default() -> Self {
        Self {
            source: SpectrumSource::Analytic,
            intercept_tol: 1e-10,
            quadratic_ratio_tol: 0.1,
            sample_resolution: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Fit {
    pub j: usize,
    pub sign: Sign,
    pub direct: f64,
    pub intercept: f64,
    /// Estimate of the constant `C_j^±`.
    pub slope: f64,
    pub curvature: f64,
    pub intercept_error: f64,
    /// `|c| d_max / |b|` for the fit `a + b d + c d²`.
    pub quadratic_ratio: f64,
    pub residual_rms: f64,
    /// Closed-form slope when available.
    pub expected_slope: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Report {
    pub surface: String,
    pub source: SpectrumSource,
    pub d_grid: Vec<f64>,
    pub v_bounds: Vec<VBounds>,
    pub direct: Vec<f64>,
    /// `minus[k][j]`, `plus[k][j]` at `d_grid[k]`.
    pub minus: Vec<Vec<f64>>,
    pub plus: Vec<Vec<f64>>,
    /// `μ_j⁻(d) ≤ μ_j ≤ μ_j⁺(d)` at every d and j (with a relative slack).
    pub ordering_ok: bool,
    pub fits: Vec<Lemma2Fit>,
}

impl Lemma2Report {
    pub fn pass(&self) -> bool {
        self.ordering_ok && self.fits.iter().all(|f| f.pass)
    }
}

/// Least-squares fit `y ≈ a + b x + c x²`; returns `([a, b, c], rms)`.
pub fn quadratic_fit(x: &[f64], y: &[f64]) -> Result<([f64; 3], f64)> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::Domain(
            "quadratic fit needs at least three points".into(),
        ));
    }
    let a = Mat::from_fn(x.len(), 3, |i, j| x[i].powi(j as i32));
    let mut rhs = Mat::from_fn(y.len(), 1, |i, _| y[i]);
    a.qr().solve_lstsq_in_place(rhs.as_mut());
    let coef = [rhs[(0, 0)], rhs[(1, 0)], rhs[(2, 0)]];
    let rms = (x
        .iter()
        .zip(y)
        .map(|(&xi, &yi)| (coef[0] + coef[1] * xi + coef[2] * xi * xi - yi).powi(2))
        .sum::<f64>()
        / x.len() as f64)
        .sqrt();
    Ok((coef, rms))
}

/// Fits `μ_j^±(d) = a + b d + c d²` over `d_grid` for `j ≤ j_max` and
/// compares the intercepts with the directly computed `μ_j`.
pub fn verify_lemma2(
    surface: &Surface,
    d_grid: &[f64],
    j_max: usize,
    options: &Lemma2Options,
) -> Result<Lemma2Report> {
    if d_grid.len() < 4 {
        return Err(Error::Domain(
            "Lemma 2 fit needs at least four values of d".into(),
        ));
    }
    let count = j_max + 1;
    let norms = sup_norms(surface, options.sample_resolution)?;
    if let Some(bad) = d_grid.iter().find(|&&d| !(d > 0.0 && d < norms.rho)) {
        return Err(Error::LayerWidth(format!(
            "d = {bad} outside (0, ρ = {})",
            norms.rho
        )));
    }
    let v_bounds: Vec<VBounds> = d_grid
        .iter()
        .map(|&d| estimate_v_pm(surface, d, options.sample_resolution))
        .collect::<Result<_>>()?;

    let (direct, minus, plus) = match (options.source, surface) {
        (SpectrumSource::Analytic, Surface::Sphere { radius }) => {
            let r = *radius;
            let direct = sphere_surface_spectrum(r, count);
            let side = |sign| -> Result<Vec<Vec<f64>>> {
                d_grid
                    .iter()
                    .zip(&v_bounds)
                    .map(|(&d, v)| sphere_u_spectrum(r, d, sign, &norms, v.pair(), count))
                    .collect()
            };
            (direct, side(Sign::Minus)?, side(Sign::Plus)?)
        }
        (SpectrumSource::Analytic, other) => {
            return Err(Error::Domain(format!(
                "no closed-form spectrum for {other}"
            )));
        }
        (SpectrumSource::Mesh { resolution }, _) => {
            let mesh = SurfaceMesh::new(surface, resolution)?;
            let direct = eigen_lowest(&assemble_s(&mesh)?, count)?;
            let side = |sign| -> Result<Vec<Vec<f64>>> {
                d_grid
                    .par_iter()
                    .zip(&v_bounds)
                    .map(|(&d, v)| {
                        eigen_lowest(&assemble_u(&mesh, d, sign, &norms, v.pair())?, count)
                    })
                    .collect()
            };
            (direct, side(Sign::Minus)?, side(Sign::Plus)?)
        }
    };

    let slack = 1e-9;
    let ordering_ok = (0..d_grid.len()).all(|k| {
        (0..count).all(|j| {
            let tol = slack * direct[j].abs().max(1.0);
            minus[k][j] <= direct[j] + tol && direct[j] <= plus[k][j] + tol
        })
    });

    let d_max = d_grid.iter().copied().fold(0.0, f64::max);
    let mut fits = Vec::new();
    for j in 0..count {
        for (sign, values) in [(Sign::Minus, &minus), (Sign::Plus, &plus)] {
            let y: Vec<f64> = values.iter().map(|row| row[j]).collect();
            let ([a, b, c], rms) = quadratic_fit(d_grid, &y)?;
            let intercept_error = (a - direct[j]).abs();
            let quadratic_ratio = if b == 0.0 && c == 0.0 {
                0.0
            } else {
                (c * d_max).abs() / b.abs()
            };
            let expected_slope = match (options.source, surface) {
                (SpectrumSource::Analytic, Surface::Sphere { .. }) => {
                    let v = match sign {
                        Sign::Plus => v_bounds[0].v_plus,
                        Sign::Minus => v_bounds[0].v_minus,
                    };
                    Some(sign.factor() * 2.0 * direct[j] / norms.rho + v)
                }
                _ => None,
            };
            let scale = direct[j].abs().max(1.0);
            let linear_is_negligible = (b * d_max).abs() <= 1e-9 * scale;
            let pass = intercept_error <= options.intercept_tol * scale
                && (linear_is_negligible || quadratic_ratio < options.quadratic_ratio_tol)
                && expected_slope.map_or(true, |e| (b - e).abs() <= 1e-8 * scale);
            fits.push(Lemma2Fit {
                j,
                sign,
                direct: direct[j],
                intercept: a,
                slope: b,
                curvature: c,
                intercept_error,
                quadratic_ratio,
                residual_rms: rms,
                expected_slope,
                pass,
            });
        }
    }
    Ok(Lemma2Report {
        surface: surface.to_string(),
        source: options.source,
        d_grid: d_grid.to_vec(),
        v_bounds,
        direct,
        minus,
        plus,
        ordering_ok,
        fits,
    })
}
