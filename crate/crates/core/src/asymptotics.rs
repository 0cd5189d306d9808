//! Bracketing bounds `t₋ + μ_j⁻(d) ≤ λ_j ≤ t₊ + μ_j⁺(d)` with `d = -β ln β`
//! and the resulting strong-coupling expansion `λ_j = -4/β² + μ_j + O(β|ln β|)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::effective::{
    assemble_s, assemble_u, eigen_lowest, estimate_v_pm, sphere_surface_spectrum,
    sphere_u_spectrum, Sign, SpectrumSource, SurfaceMesh,
};
use crate::error::{Error, Result};
use crate::geometry::{sup_norms, SupNorms, Surface};
use crate::sphere::{form_bound, sphere_eigenvalues};
use crate::transverse::{lemma1_gap, solve_transverse, TransverseProblem};

/// `d(β) = -β ln β`.
pub fn choose_d(beta: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Domain(format!(
            "d(β) = -β ln β needs 0 < β < 1, got {beta}"
        )));
    }
    if beta >= (-2.0f64).exp() {
        log::warn!(
            "β = {beta} ≥ e⁻²: d/β = {} ≤ 2, outside the transverse bound regime",
            -beta.ln()
        );
    }
    Ok(-beta * beta.ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeCheck {
    pub beta: f64,
    pub d: f64,
    pub width_ratio: f64,
    /// `β (‖M‖∞ + d‖K‖∞)`
    pub coupling: f64,
    pub in_regime: bool,
}

/// Checks `d < ρ`, `d/β > 2` and `β (‖M‖∞ + d‖K‖∞) < 1`.
pub fn regime_check(beta: f64, d: f64, norms: &SupNorms) -> Result<RegimeCheck> {
    if d >= norms.rho {
        return Err(Error::LayerWidth(format!("d = {d} ≥ ρ = {}", norms.rho)));
    }
    let coupling = beta * (norms.sup_mean + d * norms.sup_gauss);
    let width_ratio = d / beta;
    Ok(RegimeCheck {
        beta,
        d,
        width_ratio,
        coupling,
        in_regime: width_ratio > 2.0 && coupling < 1.0,
    })
}

/// Lower bound `-4/β² - 16 e^{-4d/β}/β²` on the essential spectrum of the
/// infinite-surface operator.
pub fn essential_threshold(beta: f64, d: f64) -> Result<f64> {
    if !(beta > 0.0 && d > 0.0) {
        return Err(Error::Domain(format!("need β, d > 0, got ({beta}, {d})")));
    }
    if d / beta <= 2.0 {
        log::warn!(
            "essential threshold at d/β = {} ≤ 2 is outside the bound regime",
            d / beta
        );
    }
    Ok(-4.0 / (beta * beta) - lemma1_gap(beta, d))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    Analytic,
    Mesh { resolution: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketSpectrum {
    pub beta: f64,
    pub d: f64,
    pub theta: f64,
    pub t_minus: f64,
    pub t_plus: f64,
    pub v_minus: f64,
    pub v_plus: f64,
    pub mu_minus: Vec<f64>,
    pub mu_plus: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub provenance: Provenance,
    pub regime: RegimeCheck,
}

impl BracketSpectrum {
    pub fn width(&self, j: usize) -> f64 {
        self.upper[j] - self.lower[j]
    }

    pub fn ordered(&self, rel_tol: f64) -> bool {
        self.lower
            .iter()
            .zip(&self.upper)
            .all(|(l, u)| *l <= *u + rel_tol * u.abs())
    }
}

/// Shared per-surface inputs of the bracket computation.
pub struct BracketContext {
    pub surface: Surface,
    pub norms: SupNorms,
    pub source: SpectrumSource,
    pub sample_resolution: usize,
    mesh: Option<SurfaceMesh>,
}

impl BracketContext {
    pub fn new(surface: Surface, source: SpectrumSource, sample_resolution: usize) -> Result<Self> {
        surface.validate().map_err(Error::Domain)?;
        let norms = sup_norms(&surface, sample_resolution)?;
        let mesh = match (source, surface) {
            (SpectrumSource::Analytic, Surface::Sphere { .. }) => None,
            (SpectrumSource::Analytic, other) => {
                return Err(Error::Domain(format!(
                    "no closed-form spectrum for {other}"
                )))
            }
            (SpectrumSource::Mesh { resolution }, _) => {
                Some(SurfaceMesh::new(&surface, resolution)?)
            }
        };
        Ok(Self {
            surface,
            norms,
            source,
            sample_resolution,
            mesh,
        })
    }

    fn provenance(&self) -> Provenance {
        match self.source {
            SpectrumSource::Analytic => Provenance::Analytic,
            SpectrumSource::Mesh { resolution } => Provenance::Mesh { resolution },
        }
    }

    /// Spectrum of `S`, first `count` values.
    pub fn surface_spectrum(&self, count: usize) -> Result<Vec<f64>> {
        match (&self.mesh, self.surface) {
            (None, Surface::Sphere { radius }) => Ok(sphere_surface_spectrum(radius, count)),
            (Some(mesh), _) => eigen_lowest(&assemble_s(mesh)?, count),
            (None, _) => unreachable!("analytic source is sphere-only"),
        }
    }

    fn u_spectrum(&self, d: f64, sign: Sign, v_pm: (f64, f64), count: usize) -> Result<Vec<f64>> {
        match (&self.mesh, self.surface) {
            (None, Surface::Sphere { radius }) => {
                sphere_u_spectrum(radius, d, sign, &self.norms, v_pm, count)
            }
            (Some(mesh), _) => eigen_lowest(&assemble_u(mesh, d, sign, &self.norms, v_pm)?, count),
            (None, _) => unreachable!("analytic source is sphere-only"),
        }
    }

    /// Bracket for `j ≤ j_max` at coupling `beta` with `d = d(β)`.
    pub fn bracket(&self, beta: f64, j_max: usize) -> Result<BracketSpectrum> {
        let d = choose_d(beta)?;
        let regime = regime_check(beta, d, &self.norms)?;
        if !regime.in_regime {
            return Err(Error::Regime(format!(
                "β = {beta}: d/β = {:.4}, β(‖M‖ + d‖K‖) = {:.4}",
                regime.width_ratio, regime.coupling
            )));
        }
        let theta = self.norms.robin_theta(d);
        let curvature = self.norms.sup_mean + d * self.norms.sup_gauss;
        let t_minus = solve_transverse(
            &TransverseProblem::minus(beta, d, theta).with_curvature_sup(curvature),
        )?;
        let t_plus =
            solve_transverse(&TransverseProblem::plus(beta, d).with_curvature_sup(curvature))?;
        let v = estimate_v_pm(&self.surface, d, self.sample_resolution)?;
        let count = j_max + 1;
        let mu_minus = self.u_spectrum(d, Sign::Minus, v.pair(), count)?;
        let mu_plus = self.u_spectrum(d, Sign::Plus, v.pair(), count)?;
        Ok(BracketSpectrum {
            beta,
            d,
            theta,
            t_minus: t_minus.eigenvalue,
            t_plus: t_plus.eigenvalue,
            v_minus: v.v_minus,
            v_plus: v.v_plus,
            lower: mu_minus.iter().map(|m| t_minus.eigenvalue + m).collect(),
            upper: mu_plus.iter().map(|m| t_plus.eigenvalue + m).collect(),
            mu_minus,
            mu_plus,
            provenance: self.provenance(),
            regime,
        })
    }
}

/// Bracket for one coupling, building the surface context on the fly.
pub fn bracket_spectrum(
    surface: &Surface,
    beta: f64,
    j_max: usize,
    source: SpectrumSource,
) -> Result<BracketSpectrum> {
    BracketContext::new(*surface, source, 32)?.bracket(beta, j_max)
}

/// `β |ln β|`.
pub fn envelope_scale(beta: f64) -> f64 {
    beta * beta.ln().abs()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsRow {
    pub beta: f64,
    pub d: f64,
    pub bracket: BracketSpectrum,
    pub mu: Vec<f64>,
    /// Exact eigenvalues (sphere) or bracket midpoints.
    pub lambda: Vec<f64>,
    pub exact: bool,
    /// `λ_j + 4/β² - μ_j`.
    pub residuals: Vec<f64>,
    /// Bracket widths `upper_j - lower_j`.
    pub widths: Vec<f64>,
    /// Whether `lower_j ≤ λ_j ≤ upper_j` within tolerance for every j.
    pub sandwich_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeViolation {
    pub j: usize,
    pub beta: f64,
    pub value: f64,
    pub limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsReport {
    pub surface: String,
    pub j_max: usize,
    pub rows: Vec<AsymptoticsRow>,
    /// Out-of-regime couplings, with the reason.
    pub skipped: Vec<(f64, String)>,
    /// `C` with `|r_j| ≤ C β|ln β|`, fitted at the largest β.
    pub envelope_constant: f64,
    pub envelope_violations: Vec<EnvelopeViolation>,
    /// `|r_j|` decreases strictly as β decreases, for every j.
    pub residuals_decreasing: bool,
    /// `C′` with `width_j ≤ C′ β|ln β|`, fitted at the largest β.
    pub width_constant: f64,
    pub width_violations: Vec<EnvelopeViolation>,
    pub sandwich_violations: Vec<EnvelopeViolation>,
}

impl AsymptoticsReport {
    pub fn pass(&self) -> bool {
        self.envelope_violations.is_empty()
            && self.residuals_decreasing
            && self.width_violations.is_empty()
            && self.sandwich_violations.is_empty()
    }
}

/// Relative tolerance of the sandwich comparison.
pub const SANDWICH_TOL: f64 = 1e-9;

fn fit_and_check(
    rows: &[AsymptoticsRow],
    value: impl Fn(&AsymptoticsRow, usize) -> f64,
    count: usize,
) -> (f64, Vec<EnvelopeViolation>) {
    let Some(top) = rows.iter().max_by(|a, b| a.beta.total_cmp(&b.beta)) else {
        return (f64::NAN, Vec::new());
    };
    let c = (0..count)
        .map(|j| value(top, j).abs() / envelope_scale(top.beta))
        .fold(0.0, f64::max);
    let mut violations = Vec::new();
    for row in rows {
        let limit = c * envelope_scale(row.beta);
        for j in 0..count {
            let v = value(row, j).abs();
            if v > limit * (1.0 + 1e-12) {
                violations.push(EnvelopeViolation {
                    j,
                    beta: row.beta,
                    value: v,
                    limit,
                });
            }
        }
    }
    (c, violations)
}

/// Residuals `λ_j + 4/β² - μ_j` over `betas`, with the envelope and bracket
/// width constants fitted at the largest in-regime β.
pub fn asymptotic_residuals(
    ctx: &BracketContext,
    betas: &[f64],
    j_max: usize,
) -> Result<AsymptoticsReport> {
    let count = j_max + 1;
    let mu = ctx.surface_spectrum(count)?;
    let outcomes: Vec<(f64, Result<AsymptoticsRow>)> = betas
        .par_iter()
        .map(|&beta| {
            let row = (|| -> Result<AsymptoticsRow> {
                let bracket = ctx.bracket(beta, j_max)?;
                let (lambda, exact) = match ctx.surface {
                    Surface::Sphere { radius } => {
                        let spectrum = sphere_eigenvalues(radius, beta, j_max)?;
                        let levels = spectrum.expanded();
                        if levels.len() < count {
                            return Err(Error::Domain(format!(
                                "only {} bound states at β = {beta}",
                                levels.len()
                            )));
                        }
                        (levels[..count].to_vec(), true)
                    }
                    _ => (
                        bracket
                            .lower
                            .iter()
                            .zip(&bracket.upper)
                            .map(|(l, u)| 0.5 * (l + u))
                            .collect(),
                        false,
                    ),
                };
                let base = 4.0 / (beta * beta);
                let residuals = (0..count).map(|j| lambda[j] + base - mu[j]).collect();
                let widths = (0..count).map(|j| bracket.width(j)).collect();
                let sandwich_ok = (0..count).all(|j| {
                    let tol = SANDWICH_TOL * lambda[j].abs();
                    bracket.lower[j] <= lambda[j] + tol && lambda[j] <= bracket.upper[j] + tol
                });
                Ok(AsymptoticsRow {
                    beta,
                    d: bracket.d,
                    bracket,
                    mu: mu.clone(),
                    lambda,
                    exact,
                    residuals,
                    widths,
                    sandwich_ok,
                })
            })();
            (beta, row)
        })
        .collect();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (beta, outcome) in outcomes {
        match outcome {
            Ok(row) => rows.push(row),
            Err(e @ (Error::Regime(_) | Error::LayerWidth(_))) => {
                skipped.push((beta, e.to_string()))
            }
            Err(e) => return Err(e),
        }
    }
    rows.sort_by(|a, b| b.beta.total_cmp(&a.beta));
    let (envelope_constant, envelope_violations) =
        fit_and_check(&rows, |r, j| r.residuals[j], count);
    let (width_constant, width_violations) = fit_and_check(&rows, |r, j| r.widths[j], count);
    let residuals_decreasing = rows
        .windows(2)
        .all(|w| (0..count).all(|j| w[1].residuals[j].abs() < w[0].residuals[j].abs()));
    let mut sandwich_violations = Vec::new();
    for row in rows.iter().filter(|r| r.exact) {
        for j in 0..count {
            let b = &row.bracket;
            let below = b.lower[j] - row.lambda[j];
            let above = row.lambda[j] - b.upper[j];
            let excess = below.max(above);
            if excess > SANDWICH_TOL * row.lambda[j].abs() {
                sandwich_violations.push(EnvelopeViolation {
                    j,
                    beta: row.beta,
                    value: excess,
                    limit: SANDWICH_TOL * row.lambda[j].abs(),
                });
            }
        }
    }
    Ok(AsymptoticsReport {
        surface: ctx.surface.to_string(),
        j_max,
        rows,
        skipped,
        envelope_constant,
        envelope_violations,
        residuals_decreasing,
        width_constant,
        width_violations,
        sandwich_violations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExistenceRow {
    pub beta: f64,
    pub d: f64,
    /// Upper bound `t₊ + μ₀⁺(d)` on the ground state (infinite surfaces) or
    /// the characteristic-function bound (closed surfaces).
    pub upper_bound: f64,
    /// `-4/β² + 16 e^{-4d/β}/β²`, or 0 for closed surfaces.
    pub reference: f64,
    pub separation: f64,
    pub required: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExistenceReport {
    pub surface: String,
    /// Ground state of `S` (infinite surfaces only).
    pub mu0: Option<f64>,
    pub rows: Vec<ExistenceRow>,
    pub skipped: Vec<(f64, String)>,
    /// Set for the plane, where no separation is claimed.
    pub control: bool,
}

impl ExistenceReport {
    pub fn pass(&self) -> bool {
        self.control || (!self.rows.is_empty() && self.rows.iter().all(|r| r.pass))
    }
}

/// Bound states below the threshold: for closed surfaces the
/// characteristic-function bound is negative; for infinite ones the upper
/// bound `t₊ + μ₀⁺(d)` lies at least `|μ₀|/2` below `-4/β² + 16 e^{-4d/β}/β²`.
pub fn bound_state_existence(ctx: &BracketContext, betas: &[f64]) -> Result<ExistenceReport> {
    if matches!(ctx.surface, Surface::Sphere { .. } | Surface::Torus { .. }) {
        let rows = betas
            .iter()
            .map(|&beta| -> Result<ExistenceRow> {
                let bound = form_bound(&ctx.surface, beta, 128)?;
                Ok(ExistenceRow {
                    beta,
                    d: f64::NAN,
                    upper_bound: bound,
                    reference: 0.0,
                    separation: -bound,
                    required: 0.0,
                    pass: bound < 0.0,
                })
            })
            .collect::<Result<_>>()?;
        return Ok(ExistenceReport {
            surface: ctx.surface.to_string(),
            mu0: None,
            rows,
            skipped: Vec::new(),
            control: false,
        });
    }
    let mu0 = ctx.surface_spectrum(1)?[0];
    let control = matches!(ctx.surface, Surface::Plane { .. });
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &beta in betas {
        match ctx.bracket(beta, 0) {
            Ok(b) => {
                let reference = -4.0 / (beta * beta) + lemma1_gap(beta, b.d);
                let separation = reference - b.upper[0];
                let required = 0.5 * mu0.abs();
                rows.push(ExistenceRow {
                    beta,
                    d: b.d,
                    upper_bound: b.upper[0],
                    reference,
                    separation,
                    required,
                    pass: mu0 < 0.0 && separation >= required,
                });
            }
            Err(e @ (Error::Regime(_) | Error::LayerWidth(_))) => {
                skipped.push((beta, e.to_string()))
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ExistenceReport {
        surface: ctx.surface.to_string(),
        mu0: Some(mu0),
        rows,
        skipped,
        control,
    })
}

/// Geometric grid of `count` couplings from `start` down to `stop`.
pub fn geometric_betas(start: f64, stop: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let ratio = (stop / start).powf(1.0 / (count - 1) as f64);
    (0..count)
        .map(|i| {
            if i + 1 == count {
                stop
            } else {
                start * ratio.powi(i as i32)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_choice_values() {
        assert!((choose_d(0.1).unwrap() - 0.230_258_509_299_404_6).abs() < 1e-15);
        let b = (-2.0f64).exp();
        assert!((choose_d(b).unwrap() / b - 2.0).abs() < 1e-14);
        let d = choose_d(0.01).unwrap();
        assert!((d - 0.046_051_701_859_880_91).abs() < 1e-15);
        assert!((d / 0.01 - 4.605_170_185_988_091).abs() < 1e-12);
        assert!(choose_d(1.0).is_err());
        assert!(choose_d(0.0).is_err());
    }

    #[test]
    fn threshold_formula() {
        let t = essential_threshold(0.1, 0.3).unwrap();
        assert!((t - (-400.0 - 1600.0 * (-12.0f64).exp())).abs() < 1e-10);
        assert!((t + 400.0098).abs() < 1e-4);
        let far = essential_threshold(0.1, 100.0).unwrap();
        assert_eq!(far, -4.0 / (0.1 * 0.1));
        let neumann = solve_transverse(&TransverseProblem::minus(0.1, 0.3, 0.0)).unwrap();
        assert!(neumann.eigenvalue >= t);
    }

    #[test]
    fn threshold_gap_shrinks_like_beta_squared() {
        // 16 e^{-4d/β}/β² = 16 β² at d = -β ln β
        for beta in [0.05, 0.02, 0.01] {
            let d = choose_d(beta).unwrap();
            let gap = essential_threshold(beta, d).unwrap() + 4.0 / (beta * beta);
            assert!((gap + 16.0 * beta * beta).abs() < 1e-10);
        }
    }

    #[test]
    fn sphere_bracket_orders() {
        let b = bracket_spectrum(
            &Surface::Sphere { radius: 1.0 },
            0.05,
            8,
            SpectrumSource::Analytic,
        )
        .unwrap();
        assert!(b.ordered(1e-12));
        assert!(b.t_minus <= b.t_plus);
        assert_eq!(b.lower.len(), 9);
    }

    #[test]
    fn out_of_regime_is_skipped() {
        let ctx = BracketContext::new(
            Surface::Sphere { radius: 1.0 },
            SpectrumSource::Analytic,
            16,
        )
        .unwrap();
        let report = asymptotic_residuals(&ctx, &[0.2, 0.05, 0.02], 0).unwrap();
        assert_eq!(report.skipped.len(), 1);
        assert_eq!(report.rows.len(), 2);
        assert!(report
            .rows
            .iter()
            .all(|r| r.bracket.regime.width_ratio > 2.0));
    }

    #[test]
    fn closed_surfaces_have_negative_bound() {
        for s in [
            Surface::Sphere { radius: 1.0 },
            Surface::Torus {
                major: 3.0,
                minor: 1.0,
            },
        ] {
            let ctx = BracketContext::new(s, SpectrumSource::Mesh { resolution: 8 }, 8).unwrap();
            let r = bound_state_existence(&ctx, &[0.01, 0.1, 1.0, 10.0]).unwrap();
            assert!(r.pass());
        }
    }

    #[test]
    fn beta_grid() {
        let g = geometric_betas(0.1, 0.001, 3);
        assert!((g[1] - 0.01).abs() < 1e-15);
        assert!((g[2] - 0.001).abs() < 1e-15);
    }
}
