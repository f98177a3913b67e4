use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate element {element}: det J = {det_j:e}")]
    DegenerateElement { element: usize, det_j: f64 },
    #[error("configuration error: {0}")]
    Config(String),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("singular gradient: |grad v| = 0 with alpha = {alpha} < 2 (element {element})")]
    SingularGradient { alpha: f64, element: usize },
    #[error("energy barrier: det F <= 0 in element {element}")]
    Barrier { element: usize },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
