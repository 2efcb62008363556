use thiserror::Error;

/// Errors raised by model construction, numerics and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("ellipticity floor {floor} is not positive")]
    NotElliptic { floor: f64 },

    #[error("exponent p = {0} outside (0, 1)")]
    ExponentOutOfRange(f64),

    #[error("no positivity interval; no solution by the maximum principle")]
    NoPositivity,

    #[error("quadrature tolerance {tol:e} unreachable within {panels} panels (best {value}, estimate {estimate:e})")]
    QuadratureLimit {
        tol: f64,
        panels: usize,
        value: f64,
        estimate: f64,
    },

    #[error("weight vanishes on the interval ({0}, {1}); no positive principal eigenvalue")]
    ZeroWeight(f64, f64),

    #[error("inverse iteration did not converge after {iterations} steps (residual {residual:e})")]
    EigenNotConverged { iterations: usize, residual: f64 },

    #[error("tau outside admissible window: {0}")]
    TauOutsideWindow(String),

    #[error("gluing failed: {0}")]
    Glue(String),

    #[error("singular tridiagonal system at row {0}")]
    Singular(usize),

    #[error("iterate escaped the order interval at x = {x} (consider refining the grid)")]
    EscapedOrderInterval { x: f64 },

    #[error("monotone iteration did not converge in {iterations} iterations (last change {last_change:e})")]
    NotConverged { iterations: usize, last_change: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("nonlinearity bound violated at xi = {xi}: {what}")]
    Nonlinearity { xi: f64, what: String },

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
