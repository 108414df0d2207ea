use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    /// Scheme/prior/signal combination that does not belong together.
    #[error("mismatch: {0}")]
    Mismatch(String),
    #[error("insufficient samples: {got} < {min}")]
    InsufficientSamples { got: usize, min: usize },
    #[error("degenerate operating point: {0}")]
    DegenerateOperatingPoint(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
