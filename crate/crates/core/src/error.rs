use std::io;

/// Errors raised anywhere in the simulator.
#[derive(Debug, thiserror::Error)]
pub enum VnsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field layout mismatch: {0}")]
    Mismatch(String),
    #[error("non-finite value encountered in {0}")]
    NonFinite(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("CFL violation: dt = {dt} exceeds limit {limit}")]
    Cfl { dt: f64, limit: f64 },
    #[error("conjugate gradient did not converge after {iterations} iterations (residual {residual:e})")]
    CgNotConverged { iterations: usize, residual: f64 },
    #[error("mass mismatch: {0} vs {1}")]
    MassMismatch(f64, f64),
    #[error("trace too short: {0} samples, need at least 3")]
    TraceTooShort(usize),
    #[error("config error: {0}")]
    Config(String),
    #[error("snapshot format error: {0}")]
    Format(String),
    #[error("run failed at t = {t}: {source}")]
    RunFailed {
        t: f64,
        #[source]
        source: Box<VnsError>,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl VnsError {
    /// True for configuration problems, false for numerical or I/O failures.
    pub fn is_config(&self) -> bool {
        match self {
            VnsError::Config(_) => true,
            VnsError::RunFailed { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, VnsError>;

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(VnsError::NonFinite(what.to_string()))
    }
}
