use thiserror::Error;

/// Errors raised by the spectral kernels and the time stepper.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension must be 2 or 3, got {0}")]
    BadDimension(usize),
    #[error("resolution must be a power of two >= 8, got {0}")]
    BadResolution(usize),
    #[error("period length must be positive, got {0}")]
    BadPeriod(f64),
    #[error("field shape mismatch: expected {expected} samples, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("homogeneous norm of order {s} is undefined for a field with nonzero mean")]
    MeanMode { s: f64 },
    #[error("vector potential requires a mean-zero magnetic field")]
    NonZeroMean,
    #[error("helicity is only defined for d = 3")]
    TwoDimensional,
    #[error("state is missing the {0} field")]
    MissingField(&'static str),
    #[error("field is not divergence-free (relative divergence {rel:.3e})")]
    NotDivergenceFree { rel: f64 },
    #[error("field is not supported in a single dyadic shell")]
    NotShellSupported,
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("solution blew up at t = {t}")]
    BlowUp { t: f64 },
    #[error("power-law fit requires at least 3 strictly positive samples")]
    BadFitData,
}

pub type Result<T> = std::result::Result<T, CoreError>;
