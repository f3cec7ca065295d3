use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A function argument or configuration value is outside its domain.
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A trade or price file did not match its schema.
    #[error("{}:{line}: {reason}", path.display())]
    Schema { path: PathBuf, line: u64, reason: String },

    /// The config file could not be parsed or validated.
    #[error("config key `{key}`: {reason}")]
    Config { key: String, reason: String },

    /// A simulation produced a non-finite or non-positive quantity.
    #[error("run aborted at step {step}: {reason}")]
    NumericAbort { step: usize, reason: String },

    /// A sweep run failed; carries the failing grid point and seed.
    #[error("sweep run failed at param {param} (seed {seed}): {source}")]
    SweepRun {
        param: f64,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Broad failure class, used by the CLI to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Runtime,
    Io,
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidParameter { .. } | Error::Schema { .. } | Error::Config { .. } => ErrorKind::Config,
            Error::NumericAbort { .. } => ErrorKind::Runtime,
            Error::SweepRun { source, .. } => source.kind(),
            Error::Io { .. } => ErrorKind::Io,
        }
    }
}

/// Rejects NaN, infinities and values `<= 0`.
pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be finite and > 0, got {value}")))
    }
}

/// Fee-like rates live in `[0, 1)`.
pub(crate) fn ensure_rate(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must lie in [0, 1), got {value}")))
    }
}
