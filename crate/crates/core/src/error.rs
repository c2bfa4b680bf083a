use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("resonance pole: denominator {denominator:e} vanishes, off-resonant assumption violated")]
    ResonancePole { denominator: f64 },
    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),
}

impl ModelError {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        ModelError::InvalidParameter { field, reason: reason.into() }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SteadyStateError {
    #[error("cubic root polish failed to converge near I = {estimate:e} (residual {residual:e})")]
    RootPolish { estimate: f64, residual: f64 },
    #[error("eigenvalue solver failed on the companion matrix")]
    Companion,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("eigenvalue solver did not converge")]
    EigenSolver,
    #[error("system is dynamically unstable (spectral abscissa {abscissa:e})")]
    Unstable { abscissa: f64 },
    #[error("Lyapunov system is singular")]
    Singular,
    #[error("covariance integration diverged at t = {time}")]
    Diverged { time: f64 },
    #[error("invalid integration parameter: {0}")]
    InvalidStep(&'static str),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EntanglementError {
    #[error("unphysical covariance: negative radicand {radicand:e} in the symplectic eigenvalue")]
    Unphysical { radicand: f64 },
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("unknown preset `{0}` (known: {known})", known = crate::sweep::PRESET_NAMES.join(", "))]
    UnknownPreset(String),
    #[error("failed to parse config: {0}")]
    Parse(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    Pool(String),
}

impl SweepError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        SweepError::Config { field: field.into(), reason: reason.into() }
    }
}

/// Any failure while evaluating one parameter point.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PointError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    SteadyState(#[from] SteadyStateError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Entanglement(#[from] EntanglementError),
}
