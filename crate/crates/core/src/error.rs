use thiserror::Error;

use crate::families::Kind;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0:?} has no face structure")]
    UnsupportedKind(Kind),

    #[error("quadrature did not reach tolerance: value {value:e}, error estimate {error_estimate:e} after {subdivisions} subdivisions")]
    Quadrature {
        value: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("{kind:?} n={n} l={l}: {source}")]
    Angle {
        kind: Kind,
        n: usize,
        l: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("root finder did not converge after {iterations} iterations (max residual {max_residual:e})")]
    RootsNotConverged {
        iterations: usize,
        best: Vec<num_complex::Complex64>,
        residuals: Vec<f64>,
        max_residual: f64,
    },
}
