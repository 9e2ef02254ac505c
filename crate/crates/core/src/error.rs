use thiserror::Error;

/// Errors raised across the library. Each variant maps onto one CLI exit
/// code class (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("corner at t = {t}: one-sided derivatives differ")]
    Corner { t: f64 },
    #[error("incompatible loops: {0}")]
    Incompatible(String),
    #[error("invalid reparametrization: {0}")]
    InvalidReparam(String),
    #[error("invalid loop: {0}")]
    InvalidLoop(String),
    #[error("invalid counterexample spec: {0}")]
    Spec(String),
    #[error("invalid word: {0}")]
    InvalidWord(String),
    #[error("split policy failed: {0}")]
    Policy(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("integration diverged: {0}")]
    Divergence(String),
    #[error("connection singular at {point:?} (within {radius} of the puncture)")]
    Singularity { point: Vec<f64>, radius: f64 },
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// 2 = validation, 3 = numeric divergence, 4 = honest refusal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Divergence(_) | Error::Singularity { .. } => 3,
            Error::Unsupported(_) | Error::Policy(_) => 4,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
