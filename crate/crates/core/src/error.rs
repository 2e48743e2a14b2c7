use thiserror::Error;

/// Errors raised by geometry kernels, integrators and model construction.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("{what} is singular at {point:?} (condition estimate {cond:.3e})")]
    Singular {
        what: &'static str,
        point: Vec<f64>,
        cond: f64,
    },

    #[error("matrix is not symmetric (max asymmetry {asym:.3e})")]
    NonSymmetric { asym: f64 },

    #[error("field {field} is undefined on the bad set (u = {u})")]
    BadSet { field: &'static str, u: f64 },

    #[error("point {point:?} lies outside the chart domain: {reason}")]
    Domain { point: Vec<f64>, reason: String },

    #[error("step size underflow at s = {s} (h = {h:.3e})")]
    StepUnderflow { s: f64, h: f64 },

    #[error("non-finite state at s = {s}")]
    NonFinite { s: f64 },

    #[error("foliation field is lightlike: |g(X,X)| = {value:.3e}")]
    Lightlike { value: f64 },

    #[error("model construction failed: {0}")]
    Construction(String),

    #[error("output error: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, GeoError>;
