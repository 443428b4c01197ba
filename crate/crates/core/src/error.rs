use thiserror::Error;

use crate::system::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid probability system: {}", join(.0))]
    InvalidSystem(Vec<Violation>),

    #[error("invalid moment summary: {0}")]
    InvalidSummary(String),

    #[error("invalid argument: {0}")]
    Domain(String),

    /// The moment summary admits no decomposition satisfying the LP constraints.
    #[error("infeasible summary: {0}")]
    Infeasible(String),

    /// The coupling constraints between events rule out every event family.
    #[error("summary not realizable by any event family")]
    NotRealizable,

    #[error("decomposition is not constructible: {0}")]
    NotConstructible(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("malformed input: {0}")]
    Parse(String),
}

fn join(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}
