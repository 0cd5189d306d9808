//! Surface charts and the differential geometry of the surface and of its
//! layer neighbourhood.

mod bounds;
mod chart;
mod jet;

pub use bounds::{check_xi_bounds, sup_norms, SupNorms, XiReport, XiViolation};
pub use chart::{
    finite_difference_expansion, Axis, ChartDomain, Closure, DomainKind, FdChart, Surface,
    SurfaceChart,
};
pub use jet::{geometry_jet, layer_jet, metric_at, GeometryJet, LayerJet};
