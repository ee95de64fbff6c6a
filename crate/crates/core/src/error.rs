use std::path::PathBuf;

/// Errors produced by the numerical modules and the file layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("field contains non-finite values")]
    NonFinite,

    #[error("zero x-mode not in range of L (row x-mean {mean:e} at y-row {row})")]
    NotAdmissible { row: usize, mean: f64 },

    #[error("derivative order {0} exceeds the supported maximum of 4")]
    DerivativeOrder(u32),

    #[error("zero mode excluded: xi = 0 has no dispersion frequency")]
    ZeroMode,

    #[error("model {0} cannot be used here")]
    WrongModel(&'static str),

    #[error("blow-up detected at t = {t}")]
    BlowUp { t: f64 },

    #[error("symmetry undefined for zero field")]
    ZeroField,

    #[error("speed undefined: {0}")]
    SpeedUndefined(String),

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Jacobian is singular at amplitude {amplitude}; try a different amplitude")]
    SingularJacobian { amplitude: f64 },

    #[error("degenerate traveling-wave problem: {0}")]
    Degenerate(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("point outside sampled region: {0}")]
    OutOfDomain(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("malformed file {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
