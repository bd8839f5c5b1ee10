use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("parameter {value} outside [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("expected dimension {expected}, got {actual}")]
    WrongDimension { expected: usize, actual: usize },

    #[error("dimension mismatch: state is {state}x{state}, basis acts on {basis}")]
    DimensionMismatch { state: usize, basis: usize },

    #[error("copy budget {budget} not usable by {scheme}: {reason}")]
    BadBudget {
        scheme: &'static str,
        budget: u64,
        reason: &'static str,
    },

    #[error("{scheme} cannot estimate {measure}")]
    UnsupportedMeasure {
        scheme: &'static str,
        measure: &'static str,
    },

    #[error("no measurement data: {0}")]
    NoData(String),

    #[error("scheme {0} not present in sweep result")]
    UnknownScheme(String),

    #[error("invalid sweep configuration: {0}")]
    Config(String),

    #[error("unknown figure `{0}` (expected fig1a, fig1b, fig2, fig3 or figS1)")]
    UnknownFigure(String),

    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },

    #[error(
        "task (grid point {grid_index}, scheme {scheme}, repetition {repetition}) failed: {source}"
    )]
    Task {
        grid_index: usize,
        scheme: String,
        repetition: u32,
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
