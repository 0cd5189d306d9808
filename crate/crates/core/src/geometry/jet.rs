use serde::Serialize;

use super::chart::SurfaceChart;
use crate::error::{Error, Result};
use crate::taylor::{cross, dot, Taylor};

/// Pointwise differential geometry of the surface.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometryJet {
    pub gamma: [f64; 3],
    pub tangents: [[f64; 3]; 2],
    pub normal: [f64; 3],
    /// `g_{μν} = γ,μ · γ,ν`
    pub metric: [[f64; 2]; 2],
    pub metric_det: f64,
    /// Weingarten tensor `h_μ^ν`, stored as `weingarten[μ][ν]`.
    pub weingarten: [[f64; 2]; 2],
    pub gauss: f64,
    pub mean: f64,
    /// Principal curvatures `[k₁, k₂]` with `k₁ >= k₂`.
    pub principal: [f64; 2],
}

impl GeometryJet {
    /// `K - M²`, the potential of the comparison operator.
    pub fn effective_potential(&self) -> f64 {
        self.gauss - self.mean * self.mean
    }

    pub fn sqrt_metric_det(&self) -> f64 {
        self.metric_det.sqrt()
    }
}

/// Layer-neighbourhood quantities at `(s, u)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LayerJet {
    pub u: f64,
    /// `ξ = 1 - 2Mu + Ku²`
    pub xi: f64,
    pub metric: [[f64; 2]; 2],
    pub metric_det: f64,
    /// `J = ln ξ / 2`
    pub j: f64,
    pub v1: f64,
    /// `V₂ = (K - M²)/ξ²`
    pub v2: f64,
    /// `ς = (M - Ku)/ξ`
    pub sigma: f64,
}

type Mat2 = [[Taylor; 2]; 2];

fn det2(m: &Mat2) -> Taylor {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn inv2(m: &Mat2) -> Mat2 {
    let inv_det = det2(m).recip();
    [
        [m[1][1] * inv_det, -m[0][1] * inv_det],
        [-m[1][0] * inv_det, m[0][0] * inv_det],
    ]
}

fn values2(m: &Mat2) -> [[f64; 2]; 2] {
    [
        [m[0][0].value(), m[0][1].value()],
        [m[1][0].value(), m[1][1].value()],
    ]
}

/// Surface quantities as Taylor jets in `s`.
struct SurfaceJets {
    gamma: [Taylor; 3],
    tangents: [[Taylor; 3]; 2],
    normal: [Taylor; 3],
    metric: Mat2,
    metric_det: Taylor,
    weingarten: Mat2,
    gauss: Taylor,
    mean: Taylor,
}

fn surface_jets<C: SurfaceChart + ?Sized>(
    chart: &C,
    s: [f64; 2],
    order: usize,
) -> Result<SurfaceJets> {
    let gamma = chart.expand(s, order);
    let tangents = [0, 1].map(|mu| gamma.map(|c| c.diff(mu)));
    let n_raw = cross(&tangents[0], &tangents[1]);
    let n_norm = dot(&n_raw, &n_raw).sqrt();
    if !(n_norm.value() > 1e-12) {
        return Err(Error::SingularChart {
            s1: s[0],
            s2: s[1],
            norm: n_norm.value(),
        });
    }
    let inv_norm = n_norm.recip();
    let normal = n_raw.map(|c| c * inv_norm);
    let metric: Mat2 =
        std::array::from_fn(|mu| std::array::from_fn(|nu| dot(&tangents[mu], &tangents[nu])));
    let metric_det = det2(&metric);
    let metric_inv = inv2(&metric);
    // h_μ^ν = -n,μ · γ,σ g^{σν}
    let dn = [0, 1].map(|mu| normal.map(|c| c.diff(mu)));
    let proj: Mat2 =
        std::array::from_fn(|mu| std::array::from_fn(|sig| -dot(&dn[mu], &tangents[sig])));
    let weingarten: Mat2 = std::array::from_fn(|mu| {
        std::array::from_fn(|nu| proj[mu][0] * metric_inv[0][nu] + proj[mu][1] * metric_inv[1][nu])
    });
    let gauss = det2(&weingarten);
    let mean = (weingarten[0][0] + weingarten[1][1]) * 0.5;
    Ok(SurfaceJets {
        gamma,
        tangents,
        normal,
        metric,
        metric_det,
        weingarten,
        gauss,
        mean,
    })
}

fn principal_curvatures(h: &[[f64; 2]; 2], mean: f64) -> [f64; 2] {
    let half_diff = 0.5 * (h[0][0] - h[1][1]);
    let disc = (half_diff * half_diff + h[0][1] * h[1][0]).max(0.0).sqrt();
    [mean + disc, mean - disc]
}

/// Metric, normal, Weingarten tensor and curvatures at `s`.
pub fn geometry_jet<C: SurfaceChart + ?Sized>(chart: &C, s: [f64; 2]) -> Result<GeometryJet> {
    let jets = surface_jets(chart, s, 2)?;
    let gauss = jets.gauss.value();
    let mean = jets.mean.value();
    let weingarten = values2(&jets.weingarten);
    Ok(GeometryJet {
        gamma: jets.gamma.map(|c| c.value()),
        tangents: jets.tangents.map(|t| t.map(|c| c.value())),
        normal: jets.normal.map(|c| c.value()),
        metric: values2(&jets.metric),
        metric_det: jets.metric_det.value(),
        principal: principal_curvatures(&weingarten, mean),
        weingarten,
        gauss,
        mean,
    })
}

/// Metric data only (`√g`, `g^{μν}`), from a first-order expansion. Used
/// for assembling fluxes where curvature is not needed.
pub fn metric_at<C: SurfaceChart + ?Sized>(chart: &C, s: [f64; 2]) -> Result<([[f64; 2]; 2], f64)> {
    let gamma = chart.expand(s, 1);
    let t = [0, 1].map(|mu| gamma.map(|c| c.diff(mu).value()));
    let g = [
        [dot(&t[0], &t[0]), dot(&t[0], &t[1])],
        [dot(&t[1], &t[0]), dot(&t[1], &t[1])],
    ];
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    if !(det > 1e-24) {
        return Err(Error::SingularChart {
            s1: s[0],
            s2: s[1],
            norm: det.max(0.0).sqrt(),
        });
    }
    Ok((g, det))
}

/// Layer quantities at `(s, u)` for a layer of half-width `d`.
///
/// `V₁` is evaluated from exact second derivatives of `J` when the chart
/// provides a fourth-order expansion; otherwise the expansion itself comes
/// from central differences.
pub fn layer_jet<C: SurfaceChart + ?Sized>(
    chart: &C,
    s: [f64; 2],
    u: f64,
    d: f64,
) -> Result<LayerJet> {
    if !(d > 0.0) || u.abs() > d {
        return Err(Error::Domain(format!(
            "layer point requires |u| <= d, got u = {u}, d = {d}"
        )));
    }
    let jets = surface_jets(chart, s, 4)?;
    let xi = jets.gauss * (u * u) - jets.mean * (2.0 * u) + 1.0;
    let xi_scale = 1.0 + (2.0 * jets.mean.value() * u).abs() + (jets.gauss.value() * u * u).abs();
    if !(xi.value() > 64.0 * f64::EPSILON * xi_scale) {
        return Err(Error::LayerWidth(format!(
            "ξ = {} <= 0 at s = ({}, {}), u = {u}: the layer self-intersects",
            xi.value(),
            s[0],
            s[1]
        )));
    }
    let j = xi.ln() * 0.5;
    // G_{μν} = (δ_μ^σ - u h_μ^σ)(δ_σ^ρ - u h_σ^ρ) g_{ρν}
    let shift: Mat2 = std::array::from_fn(|mu| {
        std::array::from_fn(|nu| {
            let delta = if mu == nu { 1.0 } else { 0.0 };
            -(jets.weingarten[mu][nu] * u) + delta
        })
    });
    let shift2: Mat2 = std::array::from_fn(|mu| {
        std::array::from_fn(|rho| shift[mu][0] * shift[0][rho] + shift[mu][1] * shift[1][rho])
    });
    let big_g: Mat2 = std::array::from_fn(|mu| {
        std::array::from_fn(|nu| {
            shift2[mu][0] * jets.metric[0][nu] + shift2[mu][1] * jets.metric[1][nu]
        })
    });
    let big_g_inv = inv2(&big_g);
    let sqrt_g = jets.metric_det.sqrt();
    let dj = [j.diff(0), j.diff(1)];
    // V₁ = g^{-1/2} ∂_ν (g^{1/2} G^{μν} J,μ) + J,μ G^{μν} J,ν
    let flux: [Taylor; 2] =
        std::array::from_fn(|nu| sqrt_g * (big_g_inv[0][nu] * dj[0] + big_g_inv[1][nu] * dj[1]));
    let divergence = flux[0].diff(0).value() + flux[1].diff(1).value();
    let mut quadratic = 0.0;
    for mu in 0..2 {
        for nu in 0..2 {
            quadratic += dj[mu].value() * big_g_inv[mu][nu].value() * dj[nu].value();
        }
    }
    let v1 = divergence / sqrt_g.value() + quadratic;
    let gauss = jets.gauss.value();
    let mean = jets.mean.value();
    let xi0 = xi.value();
    Ok(LayerJet {
        u,
        xi: xi0,
        metric: values2(&big_g),
        metric_det: det2(&big_g).value(),
        j: j.value(),
        v1,
        v2: (gauss - mean * mean) / (xi0 * xi0),
        sigma: (mean - gauss * u) / xi0,
    })
}
