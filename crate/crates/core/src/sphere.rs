//! Exact negative spectrum of the δ′ interaction on a sphere, by separation
//! of variables, and the characteristic-function variational bound.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_pair, scaled_i0};
use crate::error::{Error, Result};
use crate::geometry::{geometry_jet, Closure, SurfaceChart};
use crate::quadrature::gauss_legendre;
use crate::roots::bisect_newton;
use crate::tridiag::SymTridiagonal;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereLevel {
    pub l: usize,
    pub multiplicity: usize,
    pub kappa: f64,
    pub eigenvalue: f64,
    /// `|G(κ)|` for the normalized secular function at the root.
    pub residual: f64,
    /// Relative Wronskian defect of the Bessel values at the root.
    pub wronskian_defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereSpectrum {
    pub radius: f64,
    pub beta: f64,
    pub levels: Vec<SphereLevel>,
    /// Angular momenta with no bound state.
    pub absent: Vec<usize>,
}

impl SphereSpectrum {
    pub fn level(&self, l: usize) -> Option<&SphereLevel> {
        self.levels.iter().find(|lv| lv.l == l)
    }

    /// Eigenvalues in ascending order, each repeated `2l + 1` times.
    pub fn expanded(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .levels
            .iter()
            .flat_map(|lv| std::iter::repeat(lv.eigenvalue).take(lv.multiplicity))
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }

    /// Eigenvalue of index `j` in the expanded sequence together with its `l`.
    pub fn indexed(&self, j: usize) -> Option<(usize, f64)> {
        let mut levels: Vec<&SphereLevel> = self.levels.iter().collect();
        levels.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
        levels
            .iter()
            .flat_map(|lv| std::iter::repeat((lv.l, lv.eigenvalue)).take(lv.multiplicity))
            .nth(j)
    }
}

/// Normalized secular function `G(κ) = 1 + (2βκz²/π) i_l'(z) k_l'(z)` with
/// `z = κR`; its zeros are the bound states of angular momentum `l`.
pub fn secular_function(l: usize, radius: f64, beta: f64, kappa: f64) -> f64 {
    let z = kappa * radius;
    let p = bessel_pair(l, z);
    1.0 + 2.0 * beta * kappa * z * z / std::f64::consts::PI * p.di * p.dk
}

/// The `l = 0` secular function written with `i_0 = sinh z / z` and
/// `k_0 = (π/2) e^{-z} / z` directly.
pub fn secular_function_l0(radius: f64, beta: f64, kappa: f64) -> f64 {
    let z = kappa * radius;
    // e^{-z} i_0'(z) = (z e^{-z} cosh z - e^{-z} sinh z) / z²
    let di = (0.5 * z * (1.0 + (-2.0 * z).exp()) - z * scaled_i0(z)) / (z * z);
    let dk = -FRAC_PI_2 * (z + 1.0) / (z * z);
    1.0 + 2.0 * beta * kappa * z * z / std::f64::consts::PI * di * dk
}

fn solve_level(l: usize, radius: f64, beta: f64) -> Result<Option<SphereLevel>> {
    let g = |k: f64| secular_function(l, radius, beta, k);
    let centre = 2.0 / beta;
    let eps = 4.0 * (-4.0 * radius / beta).exp();
    let mut w = (10.0 * eps).max(1e-14);
    let floor = 1e-6;
    let (lo, hi) = loop {
        let lo = centre * (1.0 - w).max(floor);
        let hi = centre * (1.0 + w);
        if g(lo).signum() != g(hi).signum() {
            break (lo, hi);
        }
        if w >= 1.0 {
            return Ok(None);
        }
        w = (2.0 * w).min(1.0);
    };
    let scale = 1e-7;
    let root = bisect_newton(
        |k| {
            let h = scale * k;
            (g(k), (g(k + h) - g(k - h)) / (2.0 * h))
        },
        lo,
        hi,
        1e-14,
    )?;
    let residual = g(root.x).abs();
    if residual > 1e-10 {
        return Err(Error::NoConvergence {
            iterations: root.iterations,
            residual,
        });
    }
    Ok(Some(SphereLevel {
        l,
        multiplicity: 2 * l + 1,
        kappa: root.x,
        eigenvalue: -root.x * root.x,
        residual,
        wronskian_defect: bessel_pair(l, root.x * radius).wronskian_defect(root.x * radius),
    }))
}

/// Bound states for `l = 0..=l_max`.
pub fn sphere_eigenvalues(radius: f64, beta: f64, l_max: usize) -> Result<SphereSpectrum> {
    if !(radius > 0.0 && beta > 0.0) {
        return Err(Error::Domain(format!(
            "need R, β > 0, got ({radius}, {beta})"
        )));
    }
    let found: Vec<(usize, Option<SphereLevel>)> = (0..=l_max)
        .into_par_iter()
        .map(|l| solve_level(l, radius, beta).map(|lv| (l, lv)))
        .collect::<Result<_>>()?;
    let mut levels = Vec::new();
    let mut absent = Vec::new();
    for (l, lv) in found {
        match lv {
            Some(lv) => levels.push(lv),
            None => absent.push(l),
        }
    }
    Ok(SphereSpectrum {
        radius,
        beta,
        levels,
        absent,
    })
}

/// Largest β with a bound state of angular momentum `l ≥ 1` near `κ → 0`.
pub fn existence_threshold(radius: f64, l: usize) -> f64 {
    if l == 0 {
        f64::INFINITY
    } else {
        (2 * l + 1) as f64 * radius / (l * (l + 1)) as f64
    }
}

/// Lowest eigenvalue of the radial problem in `u = rψ` on `(0, r_cut)`,
/// discretized on a uniform grid with `n` intervals aligned to `R`.
///
/// The discrete form is `Σ (Δu)²/h + Σ l(l+1) u²/r² h + (u₊² - u₋²)/R
/// - (u₊ - u₋)²/β` with half mass at the two interface nodes, Dirichlet at
/// `r_cut` and `u(0) = 0`.
pub fn radial_fd_oracle(radius: f64, beta: f64, l: usize, n: usize, r_cut: f64) -> Result<f64> {
    if !(radius > 0.0 && beta > 0.0) {
        return Err(Error::Domain(format!(
            "need R, β > 0, got ({radius}, {beta})"
        )));
    }
    if r_cut < radius + 20.0 * beta {
        return Err(Error::Mesh(format!(
            "cut-off {r_cut} must be at least R + 20β"
        )));
    }
    if n < 1000 {
        return Err(Error::Mesh(format!(
            "radial mesh needs at least 1000 intervals, got {n}"
        )));
    }
    let m = ((radius * n as f64 / r_cut).round() as usize).max(2);
    let h = radius / m as f64;
    let total = (r_cut / h).ceil() as usize;
    // unknowns: r_1..r_m (inner, last is R-), then R+, r_{m+1}..r_{total-1}
    let size = total;
    let mut diag = vec![0.0; size];
    let mut off = vec![0.0; size - 1];
    let mut mass = vec![h; size];
    let ll = (l * (l + 1)) as f64;
    let inner = m - 1;
    let outer = m;
    for idx in 0..size {
        let r = if idx <= inner {
            (idx + 1) as f64 * h
        } else {
            radius + (idx - outer) as f64 * h
        };
        let w = if idx == inner || idx == outer {
            0.5
        } else {
            1.0
        };
        mass[idx] = w * h;
        diag[idx] += w * h * ll / (r * r);
    }
    // edge from u(0) = 0 to r_1
    diag[0] += 1.0 / h;
    for a in (0..size - 1).filter(|&a| a != inner) {
        diag[a] += 1.0 / h;
        diag[a + 1] += 1.0 / h;
        off[a] -= 1.0 / h;
    }
    // last node to the Dirichlet wall
    diag[size - 1] += 1.0 / h;
    diag[outer] += 1.0 / radius - 1.0 / beta;
    diag[inner] += -1.0 / radius - 1.0 / beta;
    off[inner] += 1.0 / beta;
    let matrix = SymTridiagonal::from_pencil(&diag, &off, &off, &mass)?;
    Ok(matrix.eigenvalue(0))
}

/// Area and enclosed volume of a closed chart, by tensor quadrature with
/// `n` points per periodic axis and Gauss–Legendre panels elsewhere.
pub fn surface_integrals<C: SurfaceChart + ?Sized>(chart: &C, n: usize) -> Result<(f64, f64)> {
    if !chart.is_closed() {
        return Err(Error::Domain(format!(
            "{} does not bound a volume",
            chart.label()
        )));
    }
    let rule = |axis: &crate::geometry::Axis| -> (Vec<f64>, Vec<f64>) {
        match axis.closure {
            Closure::Periodic => {
                let h = axis.length() / n as f64;
                ((0..n).map(|i| axis.lo + i as f64 * h).collect(), vec![h; n])
            }
            _ => {
                let panels = n.div_ceil(16).max(1);
                let (x, w) = gauss_legendre(16);
                let h = axis.length() / panels as f64;
                let mut pts = Vec::new();
                let mut wts = Vec::new();
                for p in 0..panels {
                    for (xi, wi) in x.iter().zip(&w) {
                        pts.push(axis.lo + h * (p as f64 + 0.5 * (xi + 1.0)));
                        wts.push(0.5 * h * wi);
                    }
                }
                (pts, wts)
            }
        }
    };
    let domain = chart.domain();
    let (x1, w1) = rule(&domain.axes[0]);
    let (x2, w2) = rule(&domain.axes[1]);
    let parts: Vec<(f64, f64)> = x1
        .par_iter()
        .zip(&w1)
        .map(|(&a, &wa)| -> Result<(f64, f64)> {
            let mut area = 0.0;
            let mut flux = 0.0;
            for (&b, &wb) in x2.iter().zip(&w2) {
                let jet = geometry_jet(chart, [a, b])?;
                let da = jet.sqrt_metric_det() * wa * wb;
                area += da;
                flux += da * (0..3).map(|c| jet.gamma[c] * jet.normal[c]).sum::<f64>();
            }
            Ok((area, flux))
        })
        .collect::<Result<_>>()?;
    let area: f64 = parts.iter().map(|p| p.0).sum();
    let flux: f64 = parts.iter().map(|p| p.1).sum();
    Ok((area, (flux / 3.0).abs()))
}

/// Upper bound `-area / (β · volume)` on the ground state, from the form
/// evaluated on the characteristic function of the enclosed region.
pub fn form_bound<C: SurfaceChart + ?Sized>(chart: &C, beta: f64, n: usize) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("beta must be positive, got {beta}")));
    }
    let (area, volume) = surface_integrals(chart, n)?;
    Ok(-area / (beta * volume))
}

/// `-3 / (βR)`: the characteristic-function bound for the sphere.
pub fn variational_bound(radius: f64, beta: f64) -> Result<f64> {
    if !(radius > 0.0 && beta > 0.0) {
        return Err(Error::Domain(format!(
            "need R, β > 0, got ({radius}, {beta})"
        )));
    }
    Ok(-3.0 / (beta * radius))
}
