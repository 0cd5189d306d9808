use deltalayer::asymptotics::{
    asymptotic_residuals, bound_state_existence, choose_d, BracketContext,
};
use deltalayer::effective::{
    assemble_s, refined_spectrum, verify_lemma2, Lemma2Options, SpectrumSource, SurfaceMesh,
};
use deltalayer::geometry::{check_xi_bounds, geometry_jet, sup_norms, SurfaceChart};
use deltalayer::sphere::{radial_fd_oracle, sphere_eigenvalues, variational_bound};
use deltalayer::transverse::{check_form_inequality, verify_lemma1, TrialSet};
use deltalayer::{fd_oracle, solve_transverse, Error, Surface, TransverseProblem};
use serde::Serialize;

use crate::config::{Experiment, RunConfig};
use crate::table::{Cell, Table};

/// A named pass/fail assertion of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

/// Tables, reports and checks produced by one experiment.
#[derive(Debug)]
pub struct Outcome {
    pub experiment: Experiment,
    pub surface: Surface,
    pub tables: Vec<Table>,
    pub report: serde_json::Value,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl Outcome {
    fn new(experiment: Experiment, surface: Surface) -> Self {
        Self {
            experiment,
            surface,
            tables: Vec::new(),
            report: serde_json::Value::Null,
            checks: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn json<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("reports serialize")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn run(config: &RunConfig, experiment: Experiment) -> Result<Vec<Outcome>, Error> {
    match experiment {
        Experiment::GeometryCheck => Ok(vec![geometry_check(config)?]),
        Experiment::Transverse => Ok(vec![transverse(config)?]),
        Experiment::Effective => Ok(vec![effective(config)?]),
        Experiment::Sphere => Ok(vec![sphere(config)?]),
        Experiment::Asymptotics => Ok(vec![asymptotics(config)?]),
        Experiment::Full => {
            let mut all = vec![
                geometry_check(config)?,
                transverse(config)?,
                effective(config)?,
            ];
            if matches!(config.surface, Surface::Sphere { .. }) {
                all.push(sphere(config)?);
            }
            all.push(asymptotics(config)?);
            Ok(all)
        }
    }
}

pub fn geometry_check(config: &RunConfig) -> Result<Outcome, Error> {
    let surface = config.surface;
    let label = surface.to_string();
    let n = config.mesh.sample_resolution;
    let tol = config.tolerances.geometry;
    let mut out = Outcome::new(Experiment::GeometryCheck, surface);
    let norms = sup_norms(&surface, n)?;

    let mut points = Table::new(
        "points",
        &[
            "surface",
            "s1",
            "s2",
            "gauss",
            "mean",
            "k1",
            "k2",
            "potential",
            "identity_residual",
        ],
    );
    let mut worst = 0.0f64;
    for s in surface.domain().sample_points(n) {
        let jet = match geometry_jet(&surface, s) {
            Ok(jet) => jet,
            Err(Error::SingularChart { .. }) => continue,
            Err(e) => return Err(e),
        };
        let residual =
            jet.effective_potential() + (jet.principal[0] - jet.principal[1]).powi(2) / 4.0;
        worst = worst.max(residual.abs());
        points.push(vec![
            Cell::text(&label),
            s[0].into(),
            s[1].into(),
            jet.gauss.into(),
            jet.mean.into(),
            jet.principal[0].into(),
            jet.principal[1].into(),
            jet.effective_potential().into(),
            residual.into(),
        ]);
    }
    out.checks.push(Check::new(
        "curvature identity",
        worst < tol,
        format!(
            "max |K - M² + (k₁-k₂)²/4| = {worst:.3e} over {} points",
            points.len()
        ),
    ));

    let mut layers = Table::new(
        "layer",
        &[
            "surface",
            "beta",
            "d",
            "rho",
            "c_minus",
            "c_plus",
            "min_xi",
            "max_xi",
            "min_metric_ratio",
            "max_metric_ratio",
            "max_det_defect",
            "ok",
        ],
    );
    let mut reports = Vec::new();
    for beta in config.beta.values() {
        let d = choose_d(beta)?;
        if d >= norms.rho {
            out.warnings.push(format!(
                "β = {beta}: d = {d} ≥ ρ = {}, layer skipped",
                norms.rho
            ));
            continue;
        }
        let r = check_xi_bounds(&surface, &norms, d, n)?;
        layers.push(vec![
            Cell::text(&label),
            beta.into(),
            d.into(),
            r.rho.into(),
            r.c_minus.into(),
            r.c_plus.into(),
            r.min_xi.into(),
            r.max_xi.into(),
            r.min_metric_ratio.into(),
            r.max_metric_ratio.into(),
            r.max_det_defect.into(),
            r.ok().into(),
        ]);
        out.checks.push(Check::new(
            format!("layer bounds at β = {beta}"),
            r.ok() && r.max_det_defect < tol,
            format!(
                "ξ ∈ [{:.6}, {:.6}] within [{:.6}, {:.6}], det defect {:.2e}",
                r.min_xi, r.max_xi, r.c_minus, r.c_plus, r.max_det_defect
            ),
        ));
        reports.push(r);
    }
    out.report = serde_json::json!({ "surface": surface, "sup_norms": json(&norms), "layers": json(&reports) });
    out.tables = vec![points, layers];
    Ok(out)
}

pub fn transverse(config: &RunConfig) -> Result<Outcome, Error> {
    let tc = &config.transverse;
    let betas = config.beta.values();
    let mut out = Outcome::new(Experiment::Transverse, config.surface);
    let report = verify_lemma1(&betas, &tc.width_ratios, tc.theta);

    let mut rows = Table::new(
        "bounds",
        &[
            "beta",
            "d",
            "width_ratio",
            "theta",
            "in_regime",
            "t_minus",
            "t_plus",
            "lower",
            "upper",
            "n_negative_minus",
            "n_negative_plus",
            "pass",
        ],
    );
    for r in &report.rows {
        rows.push(vec![
            r.beta.into(),
            r.d.into(),
            (r.d / r.beta).into(),
            tc.theta.into(),
            r.in_regime.into(),
            r.t_minus.unwrap_or(f64::NAN).into(),
            r.t_plus.unwrap_or(f64::NAN).into(),
            r.lower.into(),
            r.upper.into(),
            (r.n_negative_minus as i64).into(),
            (r.n_negative_plus as i64).into(),
            r.pass.into(),
        ]);
        if !r.in_regime {
            out.warnings.push(format!(
                "β = {}, d/β = {}: out of regime{}",
                r.beta,
                r.d / r.beta,
                r.message
                    .as_deref()
                    .map(|m| format!(" ({m})"))
                    .unwrap_or_default()
            ));
        }
    }
    let failing: Vec<String> = report
        .failing_rows()
        .map(|r| format!("(β={}, d/β={:.3})", r.beta, r.d / r.beta))
        .collect();
    out.checks.push(Check::new(
        "transverse eigenvalue bounds",
        failing.is_empty(),
        if failing.is_empty() {
            format!(
                "{} in-regime rows",
                report.rows.len() - report.out_of_regime
            )
        } else {
            format!("failing rows {}", failing.join(" "))
        },
    ));

    let mut oracle = Table::new(
        "oracle",
        &[
            "variant",
            "beta",
            "d",
            "theta",
            "intervals",
            "secular",
            "finite_difference",
            "relative",
        ],
    );
    let n = config.mesh.oracle_intervals;
    for &beta in &betas {
        let d = 3.0 * beta;
        for p in [
            TransverseProblem::plus(beta, d),
            TransverseProblem::minus(beta, d, tc.theta),
        ] {
            let exact = solve_transverse(&p)?.eigenvalue;
            let intervals = n;
            let fd = fd_oracle(&p, intervals)?;
            let e = rel(fd, exact);
            oracle.push(vec![
                Cell::text(p.variant.to_string()),
                beta.into(),
                d.into(),
                p.theta().into(),
                (intervals as i64).into(),
                exact.into(),
                fd.into(),
                e.into(),
            ]);
            out.checks.push(Check::new(
                format!("{} oracle at β = {beta}", p.variant),
                e < config.tolerances.oracle,
                format!("relative difference {e:.3e} at {intervals} intervals"),
            ));
        }
    }

    let (beta, d) = (betas[0], 3.0 * betas[0]);
    let form = check_form_inequality(
        beta,
        d,
        &TrialSet::Random {
            count: tc.trials,
            seed: config.seed,
        },
    )?;
    out.checks.push(Check::new(
        "form inequality",
        form.ok(config.tolerances.saturation),
        format!(
            "{} violations in {} trials at (β, d) = ({beta}, {d}), ground state error {:.2e}",
            form.violations, form.trials, form.ground_state_error
        ),
    ));
    out.report = serde_json::json!({ "bounds": json(&report), "form": json(&form) });
    out.tables = vec![rows, oracle];
    Ok(out)
}

fn mesh_source(config: &RunConfig) -> SpectrumSource {
    SpectrumSource::Mesh {
        resolution: *config.mesh.resolutions.last().expect("validated non-empty"),
    }
}

pub fn effective(config: &RunConfig) -> Result<Outcome, Error> {
    let surface = config.surface;
    let label = surface.to_string();
    let ec = &config.effective;
    let mut out = Outcome::new(Experiment::Effective, surface);
    let spectrum = refined_spectrum(&label, &config.mesh.resolutions, ec.count, |n| {
        assemble_s(&SurfaceMesh::new(&surface, n)?)
    })?;
    let mut levels = Table::new("spectrum", &["surface", "resolution", "j", "mu"]);
    for (n, values) in spectrum.resolutions.iter().zip(&spectrum.values) {
        for (j, mu) in values.iter().enumerate() {
            levels.push(vec![
                Cell::text(&label),
                (*n as i64).into(),
                (j as i64).into(),
                (*mu).into(),
            ]);
        }
    }
    let mut summary = Table::new(
        "extrapolated",
        &[
            "surface",
            "resolution",
            "j",
            "mu",
            "extrapolated",
            "error_estimate",
            "convergence_ratio",
        ],
    );
    let finest = *spectrum.resolutions.last().expect("non-empty");
    for j in 0..ec.count {
        let ratio = spectrum
            .convergence_ratios
            .as_ref()
            .map_or(f64::NAN, |r| r[j]);
        summary.push(vec![
            Cell::text(&label),
            (finest as i64).into(),
            (j as i64).into(),
            spectrum.eigenvalues[j].into(),
            spectrum.extrapolated[j].into(),
            spectrum.error_estimates[j].into(),
            ratio.into(),
        ]);
        let m = spectrum.values.len();
        let step = if m >= 2 {
            (spectrum.values[m - 1][j] - spectrum.values[m - 2][j]).abs()
        } else {
            0.0
        };
        if ratio.is_finite() && step > 1e-10 * spectrum.eigenvalues[j].abs().max(1.0) {
            out.checks.push(Check::new(
                format!("second-order convergence of μ_{j}"),
                (3.5..=4.5).contains(&ratio),
                format!("ratio {ratio:.4}"),
            ));
        }
    }

    let options = Lemma2Options {
        source: if matches!(surface, Surface::Sphere { .. }) {
            SpectrumSource::Analytic
        } else {
            mesh_source(config)
        },
        intercept_tol: config.tolerances.intercept,
        quadratic_ratio_tol: config.tolerances.quadratic_ratio,
        sample_resolution: config.mesh.sample_resolution,
    };
    let lemma = verify_lemma2(&surface, &ec.d_grid, ec.count - 1, &options)?;
    let mut fits = Table::new(
        "expansion",
        &[
            "surface",
            "sign",
            "j",
            "direct",
            "intercept",
            "slope",
            "curvature",
            "intercept_error",
            "quadratic_ratio",
            "residual_rms",
            "pass",
        ],
    );
    for f in &lemma.fits {
        fits.push(vec![
            Cell::text(&label),
            Cell::text(f.sign.to_string()),
            (f.j as i64).into(),
            f.direct.into(),
            f.intercept.into(),
            f.slope.into(),
            f.curvature.into(),
            f.intercept_error.into(),
            f.quadratic_ratio.into(),
            f.residual_rms.into(),
            f.pass.into(),
        ]);
        out.checks.push(Check::new(
            format!("expansion of μ_{}^{}", f.j, f.sign),
            f.pass,
            format!(
                "intercept error {:.3e}, quadratic/linear {:.3e}",
                f.intercept_error, f.quadratic_ratio
            ),
        ));
    }
    out.checks.push(Check::new(
        "bracketing order μ⁻ ≤ μ ≤ μ⁺",
        lemma.ordering_ok,
        format!("{} half-widths", lemma.d_grid.len()),
    ));
    out.report = serde_json::json!({ "spectrum": json(&spectrum), "expansion": json(&lemma) });
    out.tables = vec![levels, summary, fits];
    Ok(out)
}

pub fn sphere(config: &RunConfig) -> Result<Outcome, Error> {
    let Surface::Sphere { radius } = config.surface else {
        return Err(Error::Domain(format!(
            "the sphere experiment needs a sphere, got {}",
            config.surface
        )));
    };
    let sc = &config.sphere;
    let mut out = Outcome::new(Experiment::Sphere, config.surface);
    let mut table = Table::new(
        "levels",
        &[
            "radius",
            "beta",
            "l",
            "multiplicity",
            "kappa",
            "eigenvalue",
            "residual",
            "wronskian_defect",
            "fd_intervals",
            "finite_difference",
            "relative",
        ],
    );
    let mut spectra = Vec::new();
    for beta in config.beta.values() {
        let spectrum = sphere_eigenvalues(radius, beta, sc.l_max)?;
        if !spectrum.absent.is_empty() {
            out.warnings.push(format!(
                "β = {beta}: no bound state for l ∈ {:?}",
                spectrum.absent
            ));
        }
        let r_cut = radius + 20.0 * beta;
        for level in &spectrum.levels {
            let (intervals, fd) = if level.l <= sc.oracle_l_max {
                let n = config
                    .mesh
                    .oracle_intervals
                    .max((300.0 * level.kappa * r_cut).ceil() as usize);
                (n, radial_fd_oracle(radius, beta, level.l, n, r_cut)?)
            } else {
                (0, f64::NAN)
            };
            let e = rel(fd, level.eigenvalue);
            table.push(vec![
                radius.into(),
                beta.into(),
                (level.l as i64).into(),
                (level.multiplicity as i64).into(),
                level.kappa.into(),
                level.eigenvalue.into(),
                level.residual.into(),
                level.wronskian_defect.into(),
                (intervals as i64).into(),
                fd.into(),
                e.into(),
            ]);
            if intervals > 0 {
                out.checks.push(Check::new(
                    format!("radial oracle l = {} at β = {beta}", level.l),
                    e < config.tolerances.oracle,
                    format!("relative difference {e:.3e} at {intervals} intervals"),
                ));
            }
        }
        if let Some(ground) = spectrum.level(0) {
            let bound = variational_bound(radius, beta)?;
            out.checks.push(Check::new(
                format!("variational bound at β = {beta}"),
                ground.eigenvalue <= bound,
                format!("λ₀ = {:.10e} vs -3/(βR) = {bound:.10e}", ground.eigenvalue),
            ));
        }
        spectra.push(spectrum);
    }
    out.report = json(&spectra);
    out.tables = vec![table];
    Ok(out)
}

pub fn asymptotics(config: &RunConfig) -> Result<Outcome, Error> {
    let surface = config.surface;
    let label = surface.to_string();
    let ac = &config.asymptotics;
    let mut out = Outcome::new(Experiment::Asymptotics, surface);
    let source = if ac.analytic && matches!(surface, Surface::Sphere { .. }) {
        SpectrumSource::Analytic
    } else {
        mesh_source(config)
    };
    let ctx = BracketContext::new(surface, source, config.mesh.sample_resolution)?;
    let betas = config.beta.values();
    let report = asymptotic_residuals(&ctx, &betas, ac.j_max)?;
    for (beta, why) in &report.skipped {
        out.warnings.push(format!("β = {beta} skipped: {why}"));
    }
    let mut table = Table::new(
        "residuals",
        &[
            "surface", "source", "beta", "d", "t_minus", "t_plus", "j", "mu", "mu_minus",
            "mu_plus", "lower", "upper", "lambda", "exact", "residual",
        ],
    );
    let source_label = match source {
        SpectrumSource::Analytic => "analytic".to_string(),
        SpectrumSource::Mesh { resolution } => format!("mesh{resolution}"),
    };
    for row in &report.rows {
        let b = &row.bracket;
        for j in 0..=ac.j_max {
            table.push(vec![
                Cell::text(&label),
                Cell::text(&source_label),
                row.beta.into(),
                row.d.into(),
                b.t_minus.into(),
                b.t_plus.into(),
                (j as i64).into(),
                row.mu[j].into(),
                b.mu_minus[j].into(),
                b.mu_plus[j].into(),
                b.lower[j].into(),
                b.upper[j].into(),
                row.lambda[j].into(),
                row.exact.into(),
                row.residuals[j].into(),
            ]);
        }
    }
    if report.rows.len() >= 2 {
        out.checks.push(Check::new(
            "residual envelope",
            report.envelope_violations.is_empty(),
            format!(
                "C = {:.6}, {} violations",
                report.envelope_constant,
                report.envelope_violations.len()
            ),
        ));
        out.checks.push(Check::new(
            "residuals decrease with β",
            report.residuals_decreasing,
            String::new(),
        ));
        out.checks.push(Check::new(
            "bracket width envelope",
            report.width_violations.is_empty(),
            format!(
                "C′ = {:.6}, {} violations",
                report.width_constant,
                report.width_violations.len()
            ),
        ));
    }
    if report.rows.iter().any(|r| r.exact) {
        out.checks.push(Check::new(
            "eigenvalues inside the bracket",
            report.sandwich_violations.is_empty(),
            format!("{} violations", report.sandwich_violations.len()),
        ));
    }
    if report.rows.is_empty() {
        out.warnings
            .push("no in-regime coupling in the grid".into());
    }

    let existence = bound_state_existence(&ctx, &betas)?;
    let mut exist = Table::new(
        "existence",
        &[
            "surface",
            "beta",
            "d",
            "upper_bound",
            "reference",
            "separation",
            "required",
            "pass",
        ],
    );
    for r in &existence.rows {
        exist.push(vec![
            Cell::text(&label),
            r.beta.into(),
            r.d.into(),
            r.upper_bound.into(),
            r.reference.into(),
            r.separation.into(),
            r.required.into(),
            r.pass.into(),
        ]);
    }
    if existence.control {
        out.warnings
            .push("plane: no bound state separation is claimed".into());
    } else {
        out.checks.push(Check::new(
            "bound state below the threshold",
            existence.pass(),
            existence
                .mu0
                .map_or_else(String::new, |m| format!("μ₀ = {m:.6e}")),
        ));
    }
    out.report = serde_json::json!({ "residuals": json(&report), "existence": json(&existence) });
    out.tables = vec![table, exist];
    Ok(out)
}
