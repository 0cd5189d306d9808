//! Strong-coupling spectral toolkit for δ′ interactions supported on surfaces.

pub mod asymptotics;
pub mod bessel;
pub mod effective;
pub mod error;
pub mod geometry;
pub mod quadrature;
pub mod roots;
pub mod sphere;
pub mod taylor;
pub mod transverse;
pub mod tridiag;

pub use asymptotics::{
    asymptotic_residuals, bound_state_existence, bracket_spectrum, choose_d, essential_threshold,
    AsymptoticsReport, BracketContext, BracketSpectrum, ExistenceReport,
};
pub use effective::{
    assemble_s, assemble_u, eigen_lowest, estimate_v_pm, verify_lemma2, DiscreteOperator, Sign,
    SpectrumSource, SurfaceMesh,
};
pub use error::{Error, Result};
pub use geometry::{geometry_jet, layer_jet, sup_norms, SupNorms, Surface, SurfaceChart};
pub use sphere::{sphere_eigenvalues, SphereSpectrum};
pub use transverse::{
    fd_oracle, line_eigenvalue, solve_transverse, TransverseProblem, TransverseResult, Variant,
};
