use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid spin index m_F = {0} (expected -1, 0 or +1)")]
    InvalidSpin(i32),

    #[error("unknown lattice preset `{0}`")]
    UnknownPreset(String),

    /// Invalid lattice or configuration document. `path` is a dotted JSON path.
    #[error("{path}: {message}")]
    Document { path: String, message: String },

    #[error("{what} did not converge (residual {residual:.3e})")]
    Convergence { what: String, residual: f64 },

    #[error("no level crossing found within the unit cell")]
    NoCrossing,

    #[error("top adiabatic surface has no confining minimum")]
    FlatSurface,

    #[error("field has no level structure (max == min)")]
    NoLevelStructure,

    #[error("empty input: {0}")]
    Empty(String),

    #[error("fit failed: {0}")]
    Fit(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn document(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Document {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
