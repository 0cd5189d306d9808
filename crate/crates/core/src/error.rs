use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular chart at s = ({s1}, {s2}): |γ,1 × γ,2| = {norm:e}")]
    SingularChart { s1: f64, s2: f64, norm: f64 },

    #[error("layer width error: {0}")]
    LayerWidth(String),

    #[error("no root of the secular equation in [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("secular equation has {count} roots where exactly one was expected")]
    Multiplicity { count: usize },

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("regime violation: {0}")]
    Regime(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
