use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced while building or analysing a knowledge graph.
#[derive(Debug, Error)]
pub enum Error {
    /// A malformed line in a text input (ontology file, fact CSV, archive).
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// An operation was called with arguments that violate its contract.
    #[error("{0}")]
    InvalidInput(String),

    /// A relation was used that the ontology does not declare (strict mode).
    #[error("unknown relation `{0}`")]
    UnknownRelation(String),

    /// An entity was referenced that the graph does not contain.
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),

    /// A fact violates a declared domain or range constraint.
    #[error(
        "type violation: {role} of `{relation}` must be `{expected}`, got `{actual}` (`{entity}`)"
    )]
    TypeViolation {
        relation: String,
        role: &'static str,
        expected: String,
        actual: String,
        entity: String,
    },

    /// Reification was requested for a triple that is not in the graph.
    #[error("fact not present in graph: {0}")]
    FactNotFound(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
