use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite entry in {what}")]
    NonFinite { what: &'static str },

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("eigenvalue solver did not converge for matrix {matrix}")]
    EigenNonConvergence { matrix: String },

    #[error("invalid rate matrix: {0}")]
    InvalidRates(String),

    #[error("rate matrix is reducible: mode {to} is not reachable from mode {from}")]
    Reducible { from: usize, to: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("power iteration did not converge after {iterations} iterations")]
    PerronNonConvergence { iterations: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("field {mode} does not vanish at the origin (|F(0)| = {norm:e})")]
    CommonZeroViolation { mode: usize, norm: f64 },

    #[error("Newton polishing diverged, last iterate {last:?}")]
    NewtonDivergence { last: Vec<f64> },

    #[error("field {field} left the domain at state {state:?} (overshoot {overshoot:e})")]
    InvarianceViolation {
        field: String,
        state: Vec<f64>,
        overshoot: f64,
    },

    #[error("mode {mode} is absorbing (all outgoing rates are zero)")]
    AbsorbingMode { mode: usize },

    #[error(
        "thinning majorant {majorant} exceeded by total rate {rate} at state {state:?}; \
         increase the safety factor"
    )]
    MajorantExceeded {
        majorant: f64,
        rate: f64,
        state: Vec<f64>,
    },

    #[error("vector is not on the unit sphere (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("angular process left the positive orthant: component {component} = {value:e}")]
    ConeViolation { component: usize, value: f64 },

    #[error("growth factor {factor:e} between renormalizations overflows; shorten the cadence")]
    Overflow { factor: f64 },

    #[error("zero state at t = {time} inside the fit window; use a shorter horizon or a positive floor")]
    ZeroState { time: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
