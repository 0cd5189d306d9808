use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{geometry_jet, metric_at, Axis, Closure, SurfaceChart};

/// One chart coordinate resolved into grid positions.
#[derive(Clone, Debug)]
struct AxisGrid {
    spacing: f64,
    /// Coordinates of every grid position, including Dirichlet walls.
    points: Vec<f64>,
    /// Unknown index along this axis, `None` on a Dirichlet wall.
    unknown: Vec<Option<usize>>,
    /// Consecutive position pairs and the coordinate of their midpoint.
    links: Vec<(usize, usize, f64)>,
}

impl AxisGrid {
    fn new(axis: &Axis, n: usize) -> Self {
        let h = axis.length() / n as f64;
        match axis.closure {
            Closure::Periodic => Self {
                spacing: h,
                points: (0..n).map(|i| axis.lo + i as f64 * h).collect(),
                unknown: (0..n).map(Some).collect(),
                links: (0..n)
                    .map(|i| (i, (i + 1) % n, axis.lo + (i as f64 + 0.5) * h))
                    .collect(),
            },
            Closure::Dirichlet => Self {
                spacing: h,
                points: (0..=n).map(|i| axis.lo + i as f64 * h).collect(),
                unknown: (0..=n).map(|i| (i > 0 && i < n).then(|| i - 1)).collect(),
                links: (0..n)
                    .map(|i| (i, i + 1, axis.lo + (i as f64 + 0.5) * h))
                    .collect(),
            },
            Closure::Natural => Self {
                spacing: h,
                points: (0..n).map(|i| axis.lo + (i as f64 + 0.5) * h).collect(),
                unknown: (0..n).map(Some).collect(),
                links: (0..n - 1)
                    .map(|i| (i, i + 1, axis.lo + (i + 1) as f64 * h))
                    .collect(),
            },
        }
    }

    fn unknown_count(&self) -> usize {
        self.unknown.iter().flatten().count()
    }
}

/// Tensor grid over a chart domain with the geometry cached at every
/// unknown node.
///
/// The Laplace–Beltrami form `∫ √g g^{μν} ∂_μψ ∂_νψ ds` is discretized
/// with diagonal fluxes on grid edges and the mixed term on grid cells,
/// producing a symmetric stiffness matrix; the mass is lumped.
#[derive(Clone, Debug, Serialize)]
pub struct SurfaceMesh {
    pub label: String,
    pub resolution: usize,
    pub spacing: [f64; 2],
    pub closures: [Closure; 2],
    /// Chart coordinates of the unknown nodes (row-major in `(s₁, s₂)`).
    pub nodes: Vec<[f64; 2]>,
    /// `√g Δs₁ Δs₂` per node.
    pub mass: Vec<f64>,
    /// `K - M²` per node.
    pub potential: Vec<f64>,
    /// Principal curvatures per node.
    pub principal: Vec<[f64; 2]>,
    /// Symmetric stiffness entries `(row, col, value)` of the unscaled
    /// Laplace–Beltrami form, upper triangle and diagonal only.
    #[serde(skip)]
    pub(crate) flux: Vec<(usize, usize, f64)>,
}

fn inverse_flux(chart: &(impl SurfaceChart + ?Sized), s: [f64; 2]) -> Result<[[f64; 2]; 2]> {
    let (g, det) = metric_at(chart, s)?;
    let root = det.sqrt();
    Ok([
        [g[1][1] / root, -g[0][1] / root],
        [-g[1][0] / root, g[0][0] / root],
    ])
}

impl SurfaceMesh {
    /// Builds an `n × n` grid over the chart domain.
    pub fn new<C: SurfaceChart + ?Sized>(chart: &C, n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::Mesh(format!(
                "mesh resolution must be at least 4, got {n}"
            )));
        }
        let domain = chart.domain();
        let grids = [
            AxisGrid::new(&domain.axes[0], n),
            AxisGrid::new(&domain.axes[1], n),
        ];
        let n2 = grids[1].unknown_count();
        let index = |p1: usize, p2: usize| -> Option<usize> {
            Some(grids[0].unknown[p1]? * n2 + grids[1].unknown[p2]?)
        };
        let (h1, h2) = (grids[0].spacing, grids[1].spacing);
        let mut nodes = Vec::new();
        for (p1, u1) in grids[0].unknown.iter().enumerate() {
            if u1.is_none() {
                continue;
            }
            for (p2, u2) in grids[1].unknown.iter().enumerate() {
                if u2.is_some() {
                    nodes.push([grids[0].points[p1], grids[1].points[p2]]);
                }
            }
        }
        let jets: Vec<_> = nodes
            .par_iter()
            .map(|&s| geometry_jet(chart, s))
            .collect::<Result<_>>()?;
        let mass: Vec<f64> = jets.iter().map(|j| j.sqrt_metric_det() * h1 * h2).collect();
        if let Some(bad) = mass.iter().position(|m| !(*m > 0.0)) {
            return Err(Error::Mesh(format!(
                "non-positive mass weight at node {:?}",
                nodes[bad]
            )));
        }

        let mut flux = Vec::new();
        let add_edge =
            |a: Option<usize>, b: Option<usize>, w: f64, flux: &mut Vec<(usize, usize, f64)>| {
                if let Some(a) = a {
                    flux.push((a, a, w));
                }
                if let Some(b) = b {
                    flux.push((b, b, w));
                }
                if let (Some(a), Some(b)) = (a, b) {
                    flux.push((a.min(b), a.max(b), -w));
                }
            };
        // edges along s₁
        let edges1: Vec<Vec<(Option<usize>, Option<usize>, f64)>> = grids[0]
            .links
            .par_iter()
            .map(|&(a, b, mid)| -> Result<_> {
                let mut out = Vec::new();
                for p2 in 0..grids[1].points.len() {
                    let (ia, ib) = (index(a, p2), index(b, p2));
                    if ia.is_none() && ib.is_none() {
                        continue;
                    }
                    let flux = inverse_flux(chart, [mid, grids[1].points[p2]])?;
                    out.push((ia, ib, flux[0][0] * h2 / h1));
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        // edges along s₂
        let edges2: Vec<Vec<(Option<usize>, Option<usize>, f64)>> = (0..grids[0].points.len())
            .into_par_iter()
            .map(|p1| -> Result<_> {
                let mut out = Vec::new();
                for &(a, b, mid) in &grids[1].links {
                    let (ia, ib) = (index(p1, a), index(p1, b));
                    if ia.is_none() && ib.is_none() {
                        continue;
                    }
                    let flux = inverse_flux(chart, [grids[0].points[p1], mid])?;
                    out.push((ia, ib, flux[1][1] * h1 / h2));
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        for (a, b, w) in edges1.into_iter().chain(edges2).flatten() {
            add_edge(a, b, w, &mut flux);
        }
        // mixed term on cells: 2 A¹² ∂₁ψ ∂₂ψ Δs₁Δs₂ with cell-averaged differences
        let cells: Vec<Vec<(usize, usize, f64)>> = grids[0]
            .links
            .par_iter()
            .map(|&(a1, b1, m1)| -> Result<_> {
                let mut out = Vec::new();
                for &(a2, b2, m2) in &grids[1].links {
                    let a12 = inverse_flux(chart, [m1, m2])?[0][1];
                    if a12 == 0.0 {
                        continue;
                    }
                    let corners = [index(a1, a2), index(b1, a2), index(a1, b2), index(b1, b2)];
                    let d1 = [-1.0, 1.0, -1.0, 1.0];
                    let d2 = [-1.0, -1.0, 1.0, 1.0];
                    for p in 0..4 {
                        for q in 0..4 {
                            if let (Some(i), Some(j)) = (corners[p], corners[q]) {
                                if i <= j {
                                    let v = 0.25 * a12 * (d1[p] * d2[q] + d2[p] * d1[q]);
                                    if v != 0.0 {
                                        out.push((i, j, v));
                                    }
                                }
                            }
                        }
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        flux.extend(cells.into_iter().flatten());

        Ok(Self {
            label: chart.label(),
            resolution: n,
            spacing: [h1, h2],
            closures: [domain.axes[0].closure, domain.axes[1].closure],
            potential: jets.iter().map(|j| j.effective_potential()).collect(),
            principal: jets.iter().map(|j| j.principal).collect(),
            nodes,
            mass,
            flux,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫ f dΓ` by the lumped quadrature.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().zip(&self.mass).map(|(v, m)| v * m).sum()
    }
}
