use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular input: {0}")]
    SingularInput(String),

    #[error("no convergence after {iterations} iterations (last iterate {last})")]
    Convergence { iterations: usize, last: Complex64 },

    #[error("degenerate state: {0}")]
    Degenerate(String),

    #[error("overflow: Re(y^2) = {re_y2:.3e} exceeds the representable range")]
    Overflow { re_y2: f64 },

    #[error("time {t:.3e} fs is below the minimum sampling time {t_min:.1e} fs")]
    SingularTime { t: f64, t_min: f64 },

    #[error("t = {t:.6} fs lies before the validity threshold {threshold:.6} fs")]
    OutOfValidity { t: f64, threshold: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// True for failures caused by the caller's input rather than by the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::InvalidParameter(_) | Error::Domain(_) | Error::Config(_))
    }

    pub(crate) fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Error::Io { path: path.display().to_string(), message: err.to_string() }
    }
}
