use rayon::prelude::*;
use serde::Serialize;

use super::chart::SurfaceChart;
use super::jet::{geometry_jet, layer_jet};
use crate::error::{Error, Result};

/// Sampled sup-norms of the curvatures and the derived layer constants.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupNorms {
    pub sup_k1: f64,
    pub sup_k2: f64,
    pub sup_mean: f64,
    pub sup_gauss: f64,
    /// `ρ = 1 / max(‖k₁‖∞, ‖k₂‖∞)`
    pub rho: f64,
    /// Ellipticity bounds `c₋ δ ≤ g ≤ c₊ δ` over the samples.
    pub metric_min: f64,
    pub metric_max: f64,
    /// Finest sampling resolution used.
    pub grid_resolution: usize,
    /// Largest relative change of any sup-norm under the last doubling.
    pub refinement_change: f64,
    /// Whether the last doubling changed every sup-norm by less than 5%.
    pub stable: bool,
}

impl SupNorms {
    /// `C₋(d) = (1 - d/ρ)²`
    pub fn c_minus(&self, d: f64) -> f64 {
        (1.0 - d / self.rho).powi(2)
    }

    /// `C₊(d) = (1 + d/ρ)²`
    pub fn c_plus(&self, d: f64) -> f64 {
        (1.0 + d / self.rho).powi(2)
    }

    /// Robin coefficient `(‖M‖∞ + d‖K‖∞)/C₋(d)` of the lower transverse operator.
    pub fn robin_theta(&self, d: f64) -> f64 {
        (self.sup_mean + d * self.sup_gauss) / self.c_minus(d)
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Extremes {
    k1: f64,
    k2: f64,
    mean: f64,
    gauss: f64,
    gmin: f64,
    gmax: f64,
}

fn sample_extremes<C: SurfaceChart + ?Sized>(chart: &C, n: usize) -> Result<Extremes> {
    let points = chart.domain().sample_points(n);
    let jets: Vec<_> = points
        .par_iter()
        .map(|&s| geometry_jet(chart, s))
        .collect::<Result<_>>()?;
    let mut e = Extremes {
        gmin: f64::INFINITY,
        gmax: 0.0,
        ..Default::default()
    };
    for jet in &jets {
        e.k1 = e.k1.max(jet.principal[0].abs());
        e.k2 = e.k2.max(jet.principal[1].abs());
        e.mean = e.mean.max(jet.mean.abs());
        e.gauss = e.gauss.max(jet.gauss.abs());
        let [[a, b], [_, c]] = jet.metric;
        let mid = 0.5 * (a + c);
        let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        e.gmin = e.gmin.min(mid - rad);
        e.gmax = e.gmax.max(mid + rad);
    }
    Ok(e)
}

fn rel_change(old: f64, new: f64) -> f64 {
    let scale = old.abs().max(new.abs());
    if scale == 0.0 {
        0.0
    } else {
        (new - old).abs() / scale
    }
}

/// Estimates curvature sup-norms on a sample grid of resolution
/// `resolution`, refined twice by doubling. The finest grid is reported.
pub fn sup_norms<C: SurfaceChart + ?Sized>(chart: &C, resolution: usize) -> Result<SupNorms> {
    if resolution < 2 {
        return Err(Error::Domain(
            "sup-norm sampling needs resolution >= 2".into(),
        ));
    }
    let coarse = sample_extremes(chart, resolution)?;
    let mid = sample_extremes(chart, 2 * resolution)?;
    let fine = sample_extremes(chart, 4 * resolution)?;
    let change = |a: &Extremes, b: &Extremes| {
        [
            rel_change(a.k1, b.k1),
            rel_change(a.k2, b.k2),
            rel_change(a.mean, b.mean),
            rel_change(a.gauss, b.gauss),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    };
    let last = change(&mid, &fine);
    let stable = last < 0.05;
    if !stable {
        log::warn!(
            "sup-norm estimate for {} unstable: {:.2}% change after two doublings (first doubling {:.2}%)",
            chart.label(),
            100.0 * last,
            100.0 * change(&coarse, &mid)
        );
    }
    let kmax = fine.k1.max(fine.k2);
    Ok(SupNorms {
        sup_k1: fine.k1,
        sup_k2: fine.k2,
        sup_mean: fine.mean,
        sup_gauss: fine.gauss,
        rho: if kmax > 0.0 {
            1.0 / kmax
        } else {
            f64::INFINITY
        },
        metric_min: fine.gmin,
        metric_max: fine.gmax,
        grid_resolution: 4 * resolution,
        refinement_change: last,
        stable,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct XiViolation {
    pub s: [f64; 2],
    pub u: f64,
    pub xi: f64,
}

/// Outcome of sampling `ξ` and `G_{μν}` over a layer.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct XiReport {
    pub d: f64,
    pub rho: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    pub min_xi: f64,
    pub max_xi: f64,
    /// Extreme eigenvalues of `g^{-1/2} G g^{-1/2}` over the samples.
    pub min_metric_ratio: f64,
    pub max_metric_ratio: f64,
    /// Largest `|G - g ξ²| / (g ξ²)` seen.
    pub max_det_defect: f64,
    pub samples: usize,
    pub violations: Vec<XiViolation>,
}

impl XiReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
            && self.min_metric_ratio >= self.c_minus * (1.0 - 1e-12)
            && self.max_metric_ratio <= self.c_plus * (1.0 + 1e-12)
    }
}

/// Generalized eigenvalues of the 2×2 pencil `(G, g)`.
fn pencil_eigenvalues(big: &[[f64; 2]; 2], g: &[[f64; 2]; 2]) -> [f64; 2] {
    // eigenvalues of g⁻¹G, written to stay accurate near a double root
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let inv = [
        [g[1][1] / det, -g[0][1] / det],
        [-g[1][0] / det, g[0][0] / det],
    ];
    let p: [[f64; 2]; 2] = std::array::from_fn(|i| {
        std::array::from_fn(|j| inv[i][0] * big[0][j] + inv[i][1] * big[1][j])
    });
    let mid = 0.5 * (p[0][0] + p[1][1]);
    let half_diff = 0.5 * (p[0][0] - p[1][1]);
    let rad = (half_diff * half_diff + p[0][1] * p[1][0]).max(0.0).sqrt();
    [mid - rad, mid + rad]
}

/// Checks `C₋(d) ≤ ξ ≤ C₊(d)` and `C₋ g ≤ G ≤ C₊ g` on an `n × n` surface
/// grid times `n + 1` transverse samples in `[-d, d]`.
pub fn check_xi_bounds<C: SurfaceChart + ?Sized>(
    chart: &C,
    norms: &SupNorms,
    d: f64,
    n_samples: usize,
) -> Result<XiReport> {
    if !(d > 0.0 && d < norms.rho) {
        return Err(Error::LayerWidth(format!(
            "half-width d = {d} must lie in (0, ρ = {})",
            norms.rho
        )));
    }
    let c_minus = norms.c_minus(d);
    let c_plus = norms.c_plus(d);
    let tol = 1e-12;
    let points = chart.domain().sample_points(n_samples);
    let us: Vec<f64> = (0..=n_samples)
        .map(|k| (-d + 2.0 * d * k as f64 / n_samples as f64).clamp(-d, d))
        .collect();
    let rows: Vec<_> = points
        .par_iter()
        .map(|&s| -> Result<_> {
            let jet = geometry_jet(chart, s)?;
            let mut out = Vec::with_capacity(us.len());
            for &u in &us {
                let layer = layer_jet(chart, s, u, d)?;
                let ratio = pencil_eigenvalues(&layer.metric, &jet.metric);
                let expected = jet.metric_det * layer.xi * layer.xi;
                let defect = (layer.metric_det - expected).abs() / expected;
                out.push((s, u, layer.xi, ratio, defect));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut report = XiReport {
        d,
        rho: norms.rho,
        c_minus,
        c_plus,
        min_xi: f64::INFINITY,
        max_xi: f64::NEG_INFINITY,
        min_metric_ratio: f64::INFINITY,
        max_metric_ratio: f64::NEG_INFINITY,
        max_det_defect: 0.0,
        samples: 0,
        violations: Vec::new(),
    };
    for (s, u, xi, ratio, defect) in rows.into_iter().flatten() {
        report.samples += 1;
        report.min_xi = report.min_xi.min(xi);
        report.max_xi = report.max_xi.max(xi);
        report.min_metric_ratio = report.min_metric_ratio.min(ratio[0]);
        report.max_metric_ratio = report.max_metric_ratio.max(ratio[1]);
        report.max_det_defect = report.max_det_defect.max(defect);
        if xi < c_minus * (1.0 - tol) || xi > c_plus * (1.0 + tol) {
            report.violations.push(XiViolation { s, u, xi });
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::chart::Surface;

    #[test]
    fn sphere_radius_two() {
        let norms = sup_norms(&Surface::Sphere { radius: 2.0 }, 8).unwrap();
        assert!((norms.rho - 2.0).abs() < 1e-12);
        assert!(norms.stable);
    }

    #[test]
    fn torus_reach_is_minor_radius() {
        let norms = sup_norms(
            &Surface::Torus {
                major: 3.0,
                minor: 1.0,
            },
            16,
        )
        .unwrap();
        assert!((norms.rho - 1.0).abs() < 1e-12);
        assert!((norms.sup_mean - 0.625).abs() < 1e-12);
        assert!((norms.sup_gauss - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bump_sup_attained_at_apex() {
        let bump = Surface::Bump {
            height: 1.0,
            sigma: 1.0,
            truncation: 12.0,
        };
        let norms = sup_norms(&bump, 24).unwrap();
        assert!(norms.rho.is_finite());
        assert!((norms.rho - 1.0).abs() < 1e-10);
        assert!(norms.refinement_change < 0.01);
    }

    #[test]
    fn plane_xi_is_one() {
        let plane = Surface::Plane { half_width: 2.0 };
        let norms = sup_norms(&plane, 4).unwrap();
        assert!(norms.rho.is_infinite());
        let report = check_xi_bounds(&plane, &norms, 0.5, 6).unwrap();
        assert_eq!(report.min_xi, 1.0);
        assert_eq!(report.max_xi, 1.0);
        assert!(report.ok());
    }

    #[test]
    fn sphere_xi_bounds_are_tight() {
        let sphere = Surface::Sphere { radius: 1.0 };
        let norms = sup_norms(&sphere, 8).unwrap();
        let report = check_xi_bounds(&sphere, &norms, 0.3, 10).unwrap();
        assert!((report.min_xi - 0.49).abs() < 1e-12);
        assert!((report.max_xi - 1.69).abs() < 1e-12);
        assert!((report.c_minus - 0.49).abs() < 1e-12);
        assert!((report.c_plus - 1.69).abs() < 1e-12);
        assert!(report.ok(), "{:?}", report.violations);
    }

    #[test]
    fn torus_xi_bounds_hold() {
        let torus = Surface::Torus {
            major: 3.0,
            minor: 1.0,
        };
        let norms = sup_norms(&torus, 16).unwrap();
        let report = check_xi_bounds(&torus, &norms, 0.4, 24).unwrap();
        assert!(report.ok());
        assert!(report.min_xi > report.c_minus && report.max_xi < report.c_plus * (1.0 + 1e-12));
        assert!(report.max_det_defect < 1e-10);
    }

    #[test]
    fn d_beyond_rho_rejected() {
        let sphere = Surface::Sphere { radius: 1.0 };
        let norms = sup_norms(&sphere, 4).unwrap();
        assert!(matches!(
            check_xi_bounds(&sphere, &norms, 1.2, 4),
            Err(Error::LayerWidth(_))
        ));
    }
}
