use thiserror::Error;

use dressed_lattice::Error as CoreError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Solver(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Document { path, message } => CliError::Config { path, message },
            CoreError::Domain(_) | CoreError::InvalidSpin(_) | CoreError::UnknownPreset(_) | CoreError::Empty(_) => {
                CliError::config("$", e.to_string())
            }
            CoreError::Convergence { .. }
            | CoreError::NoCrossing
            | CoreError::FlatSurface
            | CoreError::NoLevelStructure
            | CoreError::Fit(_) => CliError::Solver(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
