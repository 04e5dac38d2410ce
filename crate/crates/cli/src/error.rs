use std::fmt;
use std::path::Path;

/// Failures mapped onto the process exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or flags; exit code 2.
    Config(String),
    /// Missing, unreadable or malformed data; exit code 3.
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
        }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Data(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

impl From<grouptrack::Error> for CliError {
    fn from(e: grouptrack::Error) -> Self {
        use grouptrack::Error as E;
        match e {
            E::Config(_) | E::InvalidParams(_) | E::Toml(_) | E::ModeMismatch { .. } => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
