use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("outside the oscillatory regime: {0}")]
    Regime(String),

    #[error("drive is resonant: |Ω̃² − ω²| = {detuning:e} below tolerance {tolerance:e}")]
    Resonance { detuning: f64, tolerance: f64 },

    #[error("step too large: dt·max(Ω, Ω̃) = {value} exceeds {limit}")]
    Step { value: f64, limit: f64 },

    #[error("spectral tail fraction {tail:e} exceeds {limit:e}; grid under-resolves the state")]
    Alias { tail: f64, limit: f64 },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("caustic: |sin Ω(t−s)| = {sin:e} at or below {tolerance:e}")]
    Caustic { sin: f64, tolerance: f64 },

    #[error("quadrature estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    Quadrature { estimate: f64, tolerance: f64 },

    #[error("operator leaves the concentrated class: {0}")]
    Class(String),

    #[error("Richardson error estimate {estimate:e} exceeds requested accuracy {requested:e}")]
    Tolerance { estimate: f64, requested: f64 },

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("parse error at line {line} (key `{key}`): {message}")]
    Parse {
        line: usize,
        key: String,
        message: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
