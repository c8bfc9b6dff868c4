use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    Parameter { field: String, reason: String },

    #[error("sampling error on `{field}`: {reason}")]
    Sampling { field: String, reason: String },

    #[error("validation failed for `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("unsupported order {order} for `{field}`: {reason}")]
    UnsupportedOrder { field: String, order: usize, reason: String },

    #[error("truncation too small for `{field}`: {reason} (suggested {suggested})")]
    Truncation { field: String, reason: String, suggested: usize },

    #[error("grid resolution too coarse for `{field}`: {reason}")]
    Resolution { field: String, reason: String },

    #[error("grid too narrow for `{field}`: {reason}")]
    GridTooNarrow { field: String, reason: String },

    #[error("metric `{field}` undefined: {reason}")]
    UndefinedMetric { field: String, reason: String },

    #[error("format error in `{field}`: {reason}")]
    Format { field: String, reason: String },

    #[error("numeric failure in `{field}`: {reason}")]
    Numeric { field: String, reason: String },

    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parameter { field: field.into(), reason: reason.into() }
    }

    pub fn format(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Format { field: field.into(), reason: reason.into() }
    }

    pub fn numeric(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Numeric { field: field.into(), reason: reason.into() }
    }

    /// Process exit code: 1 for bad input, 2 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Truncation { .. }
            | Error::Resolution { .. }
            | Error::GridTooNarrow { .. }
            | Error::UndefinedMetric { .. }
            | Error::Numeric { .. } => 2,
            _ => 1,
        }
    }
}
