use std::fmt;

/// Failure of a subcommand, classified by exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags or flag values.
    Usage(String),
    /// Unreadable, malformed or inconsistent input data.
    Data(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub(crate) fn context(self, what: &str) -> Self {
        match self {
            CliError::Usage(m) => CliError::Usage(format!("{what}: {m}")),
            CliError::Data(m) => CliError::Data(format!("{what}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("{what}: {m}")),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<orls::Error> for CliError {
    fn from(err: orls::Error) -> Self {
        use orls::Error as E;
        let msg = err.to_string();
        match err {
            E::InvalidParameter(_) => CliError::Usage(msg),
            E::NonFinite(_) | E::NotSymmetric { .. } | E::NotPositiveDefinite { .. } | E::SingularUpdate { .. } => {
                CliError::Numerical(msg)
            }
            E::DimensionMismatch { .. } | E::Empty(_) | E::Geometry(_) | E::Format(_) | E::Io(_) => CliError::Data(msg),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Data(err.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
