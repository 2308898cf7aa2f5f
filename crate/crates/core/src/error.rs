use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or non-finite input data.
    #[error("invalid input: {0}")]
    Input(String),

    /// A hyperparameter or configuration value outside its domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A matrix that had to be factorized was numerically singular.
    #[error("matrix is numerically singular (condition estimate {condition:.3e}): {context}")]
    Singular { condition: f64, context: String },

    #[error("cannot amplitude-encode: {0}")]
    Encoding(String),

    #[error("qubit index {index} out of range for a {qubits}-qubit register")]
    QubitIndex { index: usize, qubits: usize },

    #[error("register of {requested} qubits exceeds the simulator cap of {cap}")]
    QubitCap { requested: usize, cap: usize },

    /// Training data that cannot support the requested fit.
    #[error("degenerate training data: {0}")]
    DegenerateData(String),

    /// Rayleigh-quotient denominator vanished.
    #[error("denominator {value:.3e} below guard threshold")]
    DenominatorGuard { value: f64 },

    #[error("format error in {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by missing or malformed data files.
    pub fn is_data_error(&self) -> bool {
        matches!(self, Error::Io { .. } | Error::Format { .. })
    }
}
