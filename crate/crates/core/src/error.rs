use thiserror::Error;

/// Errors produced by the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("unsupported state variant: {0}")]
    Unsupported(String),

    #[error("line {line}: {message}")]
    Format { line: u64, message: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("quadrature did not converge: {0}")]
    Accuracy(String),

    #[error("filtered characteristic function reaches {boundary_max:.3e} on the grid boundary (limit {limit:.1e}); enlarge the beta range")]
    TailTruncation { boundary_max: f64, limit: f64 },

    #[error("imaginary residue {residue:.3e} exceeds tolerance (real scale {scale:.3e})")]
    ImaginaryResidue { residue: f64, scale: f64 },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("missing input: {0}")]
    MissingInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Whether the failure is numerical (as opposed to I/O or bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Accuracy(_)
                | Error::TailTruncation { .. }
                | Error::ImaginaryResidue { .. }
                | Error::InsufficientData(_)
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
