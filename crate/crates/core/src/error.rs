use std::io;

use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("kernel is not embeddable on this grid: negative eigenvalue mass {negative_mass:.3e} exceeds {limit:.3e}")]
    NonEmbeddable { negative_mass: f64, limit: f64 },

    #[error("paths were drawn from different grids or kernels")]
    MixedInputs,

    #[error("index out of bounds: {0}")]
    OutOfBounds(String),

    #[error("mask is empty")]
    EmptyMask,

    #[error("sample set is empty")]
    EmptySamples,

    #[error("interval [{lo}, {hi}] is not covered by the path grid [{grid_lo}, {grid_hi}]")]
    IntervalOutOfRange {
        lo: f64,
        hi: f64,
        grid_lo: f64,
        grid_hi: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("certificate soundness violation: {0}")]
    SoundnessViolation(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
