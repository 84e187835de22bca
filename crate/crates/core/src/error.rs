use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the propagation, fading and link-simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A CSV row could not be parsed. `line` is 1-based and counts the header.
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    /// A value lies outside the valid range of a named model variable
    /// (`PROPFQ`, `TANTHT`, `HPRFL`, ...).
    #[error("{variable}: {value} outside valid range {range}")]
    Range {
        variable: &'static str,
        value: f64,
        range: &'static str,
    },

    /// Structural validity failure that is not a simple numeric range,
    /// such as too few profile points.
    #[error("{variable}: {message}")]
    Validity {
        variable: &'static str,
        message: String,
    },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// A pipeline stage failed while processing one packet.
    #[error("packet {packet}, {stage} stage: {source}")]
    Stage {
        packet: usize,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn geometry(msg: impl Into<String>) -> Self {
        Error::Geometry(msg.into())
    }

    /// Unwraps `Stage` context down to the originating error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

/// Checks `value` against an inclusive range, reporting `variable` on failure.
pub(crate) fn check_range(
    variable: &'static str,
    value: f64,
    min: f64,
    max: f64,
    range: &'static str,
) -> Result<()> {
    if value.is_finite() && value >= min && value <= max {
        Ok(())
    } else {
        Err(Error::Range {
            variable,
            value,
            range,
        })
    }
}
