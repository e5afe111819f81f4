use std::path::PathBuf;

/// Errors raised anywhere in the toolkit.
///
/// Variants are grouped by the kind of failure rather than by module so the
/// CLI can map them onto usage vs. runtime exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid model, scenario, or detector configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Invalid physical parameter set.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// The undamped system was driven exactly at one of its eigenfrequencies.
    #[error("undamped resonance at {forcing_hz} Hz: system matrix is singular")]
    UndampedResonance { forcing_hz: f64 },

    /// A filter could not be designed with the requested characteristics.
    #[error("filter design error: {0}")]
    Design(String),

    /// A measured value falls outside what the sensor can report.
    #[error("measurement error: {0}")]
    Measurement(String),

    /// Least-squares fit could not be formed.
    #[error("fit error: {0}")]
    Fit(String),

    /// Caller-supplied data does not satisfy an operation's input contract.
    #[error("input error: {0}")]
    Input(String),

    /// Malformed file content.
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
