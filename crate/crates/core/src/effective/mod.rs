//! The comparison operator `S = -Δ_Γ + K - M²` and the bracketing
//! operators `U^±_d`, discretized on tensor grids over a chart.

mod eigen;
mod lemma2;
mod mesh;
mod operator;

pub use eigen::{
    eigen_lowest, lowest_eigenpairs, refined_spectrum, Eigenpairs, SpectralResult, RITZ_TOL,
};
pub use lemma2::{
    estimate_v_pm, quadratic_fit, sphere_surface_spectrum, sphere_u_spectrum, verify_lemma2,
    Lemma2Fit, Lemma2Options, Lemma2Report, SpectrumSource, VBounds,
};
pub use mesh::SurfaceMesh;
pub use operator::{assemble_s, assemble_u, DiscreteOperator, OperatorMeta, Sign};
