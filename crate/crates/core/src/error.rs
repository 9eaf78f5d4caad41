use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("u = {u} is outside the domain of {what}")]
    Domain { what: &'static str, u: f64 },

    #[error("Newton iteration for u_theta did not converge after {iterations} iterations (bracket [{lo}, {hi}])")]
    NoConvergence { iterations: usize, lo: f64, hi: f64 },

    #[error("no anchor u_hat below 1 is representable in f64 for C = {c}, theta = {theta}")]
    AnchorNotRepresentable { c: f64, theta: f64 },

    #[error("truncation order exceeds the cap of {cap} for C = {c}, theta = {theta}")]
    TruncationOrderExceeded { c: f64, theta: f64, cap: usize },

    #[error("time step {dt} exceeds the explicit stability bound dt_max = {dt_max:.6e}")]
    Unstable { dt: f64, dt_max: f64 },

    #[error("non-finite value produced at node ({i}, {j}) after {steps} steps")]
    NonFinite { i: usize, j: usize, steps: u64 },

    #[error("guard violation: |u| = {value} >= 1 - 1e-12 at node ({i}, {j})")]
    Guard { i: usize, j: usize, value: f64 },

    #[error("instability detected: max |u| = {max_abs} > 1 after {steps} steps")]
    Blowup { max_abs: f64, steps: u64 },

    #[error("bracket [{lo}, {hi}] does not straddle the threshold (both ends classify as {label})")]
    NoStraddle { lo: f64, hi: f64, label: String },

    #[error("field shape mismatch: expected {expected} nodes, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("sampling function returned a non-finite value at ({x}, {y})")]
    NonFiniteSample { x: f64, y: f64 },

    #[error("boundary node ({i}, {j}) holds {value}, expected 0")]
    Boundary { i: usize, j: usize, value: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason,
        }
    }

    /// True for errors caused by bad input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. }
                | Error::Unstable { .. }
                | Error::Shape { .. }
                | Error::NoStraddle { .. }
                | Error::Parse(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
