use thiserror::Error;

/// Failure classes shared by every evaluator. The CLI maps each class to a
/// fixed exit code, so new variants must be placed in one of the four groups.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("pole: {0}")]
    Pole(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("convergence error: {0}")]
    Convergence(String),
    #[error("instance generation exhausted after {0} attempts")]
    Exhausted(usize),
}

impl Error {
    pub fn schema(msg: impl Into<String>) -> Self {
        Error::Schema(msg.into())
    }

    pub fn pole(msg: impl Into<String>) -> Self {
        Error::Pole(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn convergence(msg: impl Into<String>) -> Self {
        Error::Convergence(msg.into())
    }

    /// Short stable tag used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Schema(_) => "schema",
            Error::Pole(_) => "pole",
            Error::Domain(_) => "domain",
            Error::Convergence(_) => "convergence",
            Error::Exhausted(_) => "exhausted",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
