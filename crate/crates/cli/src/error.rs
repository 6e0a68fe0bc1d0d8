use std::fmt;

/// Failure classes, each mapped to a process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or an invalid argument combination (exit 1).
    Usage(String),
    /// A numerical routine rejected its input or failed (exit 2).
    Compute(eamkit::Error),
    /// Reading or writing a file failed, or an input file is malformed (exit 3).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Compute(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Compute(e) => write!(f, "computation failed: {e}"),
            CliError::Io(msg) => write!(f, "I/O error: {msg}"),
        }
    }
}

impl From<eamkit::Error> for CliError {
    fn from(e: eamkit::Error) -> Self {
        CliError::Compute(e)
    }
}
