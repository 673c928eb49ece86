use visfore::Error;

pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INVALID_SPEC: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_PROTOCOL: i32 = 5;

/// Failure classes of the command line tool. Each maps to its own exit code;
/// clap keeps 2 for usage errors.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InvalidSpec(_) => EXIT_INVALID_SPEC,
            CliError::Io(_) => EXIT_IO,
            CliError::Protocol(_) => EXIT_PROTOCOL,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }

    pub fn spec(msg: impl Into<String>) -> Self {
        CliError::InvalidSpec(msg.into())
    }

    /// I/O failure with the path it concerns.
    pub fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        CliError::Io(format!("{}: {err}", path.display()))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Protocol(_) | Error::PolicyTimeout => CliError::Protocol(e.to_string()),
            Error::Io(_) => CliError::Io(e.to_string()),
            Error::Json(_)
            | Error::InvalidConfig(_)
            | Error::UnknownPreset(_)
            | Error::InvalidCamera(_)
            | Error::InvalidCylinder => CliError::InvalidSpec(e.to_string()),
            other => CliError::Internal(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            CliError::Io(e.to_string())
        } else {
            CliError::InvalidSpec(format!("csv: {e}"))
        }
    }
}
