use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::taylor::{Scalar, Taylor, MAX_ORDER};

/// Boundary treatment of one chart coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Closure {
    /// The coordinate wraps around with period `hi - lo`.
    Periodic,
    /// Open interval truncated by a Dirichlet wall at both ends.
    Dirichlet,
    /// Open interval whose end points are degenerate (e.g. sphere poles);
    /// no boundary condition is imposed and samples avoid the ends.
    Natural,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub closure: Closure,
}

impl Axis {
    pub fn periodic(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            closure: Closure::Periodic,
        }
    }

    pub fn dirichlet(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            closure: Closure::Dirichlet,
        }
    }

    pub fn natural(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            closure: Closure::Natural,
        }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    /// Sample coordinates at resolution `n`: `n` points for periodic and
    /// natural axes, `n + 1` (end points included) for Dirichlet axes.
    pub fn samples(&self, n: usize) -> Vec<f64> {
        let h = self.length() / n as f64;
        match self.closure {
            Closure::Periodic => (0..n).map(|i| self.lo + i as f64 * h).collect(),
            Closure::Dirichlet => (0..=n).map(|i| self.lo + i as f64 * h).collect(),
            Closure::Natural => (0..n).map(|i| self.lo + (i as f64 + 0.5) * h).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    /// Both coordinates periodic (torus).
    PeriodicBox,
    /// Bounded coordinate rectangle, possibly periodic in one direction.
    Rectangle,
    /// A plane-like surface cut off at `radius` (the square `|s_i| <= radius`).
    TruncatedPlane { radius: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartDomain {
    pub kind: DomainKind,
    pub axes: [Axis; 2],
}

impl ChartDomain {
    pub fn sample_points(&self, n: usize) -> Vec<[f64; 2]> {
        let xs = self.axes[0].samples(n);
        let ys = self.axes[1].samples(n);
        xs.iter()
            .flat_map(|&x| ys.iter().map(move |&y| [x, y]))
            .collect()
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self.kind, DomainKind::TruncatedPlane { .. })
    }
}

/// A regular parametrization `s ↦ γ(s)` of a surface in ℝ³.
///
/// Implementors provide the map itself and optionally an exact Taylor
/// expansion of it; the default expansion falls back to central
/// differences of [`SurfaceChart::point`].
pub trait SurfaceChart: Send + Sync {
    fn label(&self) -> String;

    fn domain(&self) -> ChartDomain;

    fn point(&self, s: [f64; 2]) -> [f64; 3];

    /// Taylor expansion of the three components of `γ` around `s`, valid to
    /// total degree `order <= 4`.
    fn expand(&self, s: [f64; 2], order: usize) -> [Taylor; 3] {
        finite_difference_expansion(self, s, order, 1.0)
    }

    fn has_analytic_derivatives(&self) -> bool {
        false
    }

    /// Half-width below which the layer map `(s, u) ↦ γ(s) + u n(s)` is
    /// known to be injective, when available in closed form.
    fn injectivity_halfwidth(&self) -> Option<f64> {
        None
    }

    /// Whether the surface is closed and bounds a volume.
    fn is_closed(&self) -> bool {
        false
    }
}

/// Step for a central difference of total order `k`, balancing the `h²`
/// truncation error against `ε/hᵏ` rounding.
fn fd_step(k: usize, scale: f64) -> f64 {
    scale * f64::EPSILON.powf(1.0 / (k as f64 + 2.0))
}

// Second-order central stencils for derivatives of order 0..=4, as
// (offset, weight) pairs for unit step.
fn stencil(k: usize) -> &'static [(i32, f64)] {
    match k {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => unreachable!("stencils exist up to fourth order"),
    }
}

/// Builds a Taylor expansion of `chart.point` around `s` from central
/// difference estimates of every mixed partial derivative up to `order`.
pub fn finite_difference_expansion<C: SurfaceChart + ?Sized>(
    chart: &C,
    s: [f64; 2],
    order: usize,
    scale: f64,
) -> [Taylor; 3] {
    let order = order.min(MAX_ORDER);
    let base = chart.point(s);
    // partials[c][(a, b)]
    let mut partials = vec![[0.0f64; 3]; (order + 1) * (order + 1)];
    partials[0] = base;
    for deg in 1..=order {
        let h = fd_step(deg, scale);
        for b in 0..=deg {
            let a = deg - b;
            let mut acc = [0.0; 3];
            for &(i, wi) in stencil(a) {
                for &(j, wj) in stencil(b) {
                    let p = chart.point([s[0] + i as f64 * h, s[1] + j as f64 * h]);
                    for c in 0..3 {
                        acc[c] += wi * wj * p[c];
                    }
                }
            }
            let hk = h.powi(deg as i32);
            partials[a * (order + 1) + b] = [acc[0] / hk, acc[1] / hk, acc[2] / hk];
        }
    }
    std::array::from_fn(|c| Taylor::from_partials(order, |a, b| partials[a * (order + 1) + b][c]))
}

/// Built-in surfaces.
///
/// Normal orientation follows `n = γ,1 × γ,2 / |γ,1 × γ,2|` for the listed
/// coordinate order, which fixes the sign of the mean curvature:
///
/// | surface | coordinates      | normal  | mean curvature      |
/// |---------|------------------|---------|---------------------|
/// | plane   | `(x, y)`         | `+z`    | 0                   |
/// | sphere  | `(θ, φ)`         | outward | `-1/R`              |
/// | torus   | `(θ, φ)`         | inward  | `> 0` on the outer equator |
/// | bump    | `(x, y)`         | upward  | `-h/σ²` at the apex |
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "lowercase", deny_unknown_fields)]
pub enum Surface {
    Plane {
        #[serde(rename = "L", default = "default_plane_half_width")]
        half_width: f64,
    },
    Sphere {
        #[serde(rename = "R")]
        radius: f64,
    },
    Torus {
        #[serde(rename = "R")]
        major: f64,
        #[serde(rename = "r")]
        minor: f64,
    },
    Bump {
        #[serde(rename = "h")]
        height: f64,
        sigma: f64,
        #[serde(rename = "L")]
        truncation: f64,
    },
}

fn default_plane_half_width() -> f64 {
    10.0
}

impl Surface {
    pub fn validate(&self) -> Result<(), String> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(format!("{name} must be positive and finite, got {v}"))
            }
        };
        match *self {
            Surface::Plane { half_width } => positive("L", half_width),
            Surface::Sphere { radius } => positive("R", radius),
            Surface::Torus { major, minor } => {
                positive("R", major)?;
                positive("r", minor)?;
                if minor >= major {
                    return Err(format!("torus needs R > r, got R = {major}, r = {minor}"));
                }
                Ok(())
            }
            Surface::Bump {
                height,
                sigma,
                truncation,
            } => {
                if !height.is_finite() {
                    return Err("h must be finite".into());
                }
                positive("sigma", sigma)?;
                positive("L", truncation)
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Surface::Plane { .. } => "plane",
            Surface::Sphere { .. } => "sphere",
            Surface::Torus { .. } => "torus",
            Surface::Bump { .. } => "bump",
        }
    }

    /// The chart map evaluated on any scalar type.
    pub fn map<T: Scalar>(&self, s1: T, s2: T) -> [T; 3] {
        match *self {
            Surface::Plane { .. } => [s1, s2, T::from_f64(0.0)],
            Surface::Sphere { radius } => {
                let st = s1.sin();
                [
                    st * s2.cos() * radius,
                    st * s2.sin() * radius,
                    s1.cos() * radius,
                ]
            }
            Surface::Torus { major, minor } => {
                let ring = s1.cos() * minor + major;
                [ring * s2.cos(), ring * s2.sin(), s1.sin() * minor]
            }
            Surface::Bump { height, sigma, .. } => {
                let r2 = s1 * s1 + s2 * s2;
                [s1, s2, (r2 * (-0.5 / (sigma * sigma))).exp() * height]
            }
        }
    }

    /// Closed-form area of a compact built-in surface.
    pub fn area(&self) -> Option<f64> {
        match *self {
            Surface::Sphere { radius } => Some(4.0 * PI * radius * radius),
            Surface::Torus { major, minor } => Some(4.0 * PI * PI * major * minor),
            _ => None,
        }
    }

    /// Closed-form enclosed volume of a compact built-in surface.
    pub fn enclosed_volume(&self) -> Option<f64> {
        match *self {
            Surface::Sphere { radius } => Some(4.0 / 3.0 * PI * radius.powi(3)),
            Surface::Torus { major, minor } => Some(2.0 * PI * PI * major * minor * minor),
            _ => None,
        }
    }
}

impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Surface::Plane { half_width } => write!(f, "plane{{L={half_width}}}"),
            Surface::Sphere { radius } => write!(f, "sphere{{R={radius}}}"),
            Surface::Torus { major, minor } => write!(f, "torus{{R={major},r={minor}}}"),
            Surface::Bump {
                height,
                sigma,
                truncation,
            } => write!(f, "bump{{h={height},sigma={sigma},L={truncation}}}"),
        }
    }
}

impl SurfaceChart for Surface {
    fn label(&self) -> String {
        self.to_string()
    }

    fn domain(&self) -> ChartDomain {
        match *self {
            Surface::Plane { half_width } => ChartDomain {
                kind: DomainKind::TruncatedPlane { radius: half_width },
                axes: [
                    Axis::dirichlet(-half_width, half_width),
                    Axis::dirichlet(-half_width, half_width),
                ],
            },
            Surface::Sphere { .. } => ChartDomain {
                kind: DomainKind::Rectangle,
                axes: [Axis::natural(0.0, PI), Axis::periodic(0.0, 2.0 * PI)],
            },
            Surface::Torus { .. } => ChartDomain {
                kind: DomainKind::PeriodicBox,
                axes: [Axis::periodic(0.0, 2.0 * PI), Axis::periodic(0.0, 2.0 * PI)],
            },
            Surface::Bump { truncation, .. } => ChartDomain {
                kind: DomainKind::TruncatedPlane { radius: truncation },
                axes: [
                    Axis::dirichlet(-truncation, truncation),
                    Axis::dirichlet(-truncation, truncation),
                ],
            },
        }
    }

    fn point(&self, s: [f64; 2]) -> [f64; 3] {
        self.map(s[0], s[1])
    }

    fn expand(&self, s: [f64; 2], order: usize) -> [Taylor; 3] {
        self.map(
            Taylor::variable(s[0], 0, order),
            Taylor::variable(s[1], 1, order),
        )
    }

    fn has_analytic_derivatives(&self) -> bool {
        true
    }

    fn injectivity_halfwidth(&self) -> Option<f64> {
        match *self {
            Surface::Plane { .. } => Some(f64::INFINITY),
            Surface::Sphere { radius } => Some(radius),
            Surface::Torus { minor, .. } => Some(minor),
            Surface::Bump { .. } => None,
        }
    }

    fn is_closed(&self) -> bool {
        matches!(self, Surface::Sphere { .. } | Surface::Torus { .. })
    }
}

/// A user-supplied chart with derivatives from central differences.
pub struct FdChart<F> {
    label: String,
    domain: ChartDomain,
    map: F,
    step_scale: f64,
    halfwidth: Option<f64>,
    closed: bool,
}

impl<F> FdChart<F>
where
    F: Fn([f64; 2]) -> [f64; 3] + Send + Sync,
{
    pub fn new(label: impl Into<String>, domain: ChartDomain, map: F) -> Self {
        Self {
            label: label.into(),
            domain,
            map,
            step_scale: 1.0,
            halfwidth: None,
            closed: false,
        }
    }

    /// Characteristic length multiplying every difference step.
    pub fn with_step_scale(mut self, scale: f64) -> Self {
        self.step_scale = scale;
        self
    }

    pub fn with_injectivity_halfwidth(mut self, d0: f64) -> Self {
        self.halfwidth = Some(d0);
        self
    }

    pub fn closed(mut self, closed: bool) -> Self {
        self.closed = closed;
        self
    }
}

impl<F> SurfaceChart for FdChart<F>
where
    F: Fn([f64; 2]) -> [f64; 3] + Send + Sync,
{
    fn label(&self) -> String {
        self.label.clone()
    }

    fn domain(&self) -> ChartDomain {
        self.domain
    }

    fn point(&self, s: [f64; 2]) -> [f64; 3] {
        (self.map)(s)
    }

    fn expand(&self, s: [f64; 2], order: usize) -> [Taylor; 3] {
        finite_difference_expansion(self, s, order, self.step_scale)
    }

    fn injectivity_halfwidth(&self) -> Option<f64> {
        self.halfwidth
    }

    fn is_closed(&self) -> bool {
        self.closed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_expansion_matches_analytic_jet() {
        let torus = Surface::Torus {
            major: 3.0,
            minor: 1.0,
        };
        let fd = FdChart::new("torus-fd", torus.domain(), move |s| torus.point(s));
        let s = [0.7, -1.3];
        let exact = torus.expand(s, 4);
        let approx = fd.expand(s, 4);
        for c in 0..3 {
            for (a, b, tol) in [
                (1, 0, 1e-9),
                (0, 1, 1e-9),
                (2, 0, 1e-7),
                (1, 1, 1e-7),
                (3, 0, 1e-5),
                (2, 2, 1e-4),
            ] {
                let e = exact[c].partial(a, b);
                let f = approx[c].partial(a, b);
                assert!(
                    (e - f).abs() <= tol * (1.0 + e.abs()),
                    "component {c}, ∂({a},{b}): {e} vs {f}"
                );
            }
        }
    }

    #[test]
    fn surfaces_deserialize_from_named_tables() {
        let s: Surface = toml::from_str("name = \"torus\"\nR = 3.0\nr = 1.0\n").unwrap();
        assert_eq!(
            s,
            Surface::Torus {
                major: 3.0,
                minor: 1.0
            }
        );
        let err = toml::from_str::<Surface>("name = \"sphere\"\nR = 1.0\nradius = 2.0\n");
        assert!(err.is_err());
    }

    #[test]
    fn torus_validation_requires_r_below_major() {
        assert!(Surface::Torus {
            major: 1.0,
            minor: 2.0
        }
        .validate()
        .is_err());
    }
}
