use crate::monads::MonadTag;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("monad mismatch: expected {expected}, found {found}")]
    TagMismatch { expected: MonadTag, found: MonadTag },

    #[error("structure does not match functor {functor}: {detail}")]
    ShapeMismatch { functor: String, detail: String },

    #[error("invalid probability {0}: must lie in (0, 1]")]
    InvalidProbability(String),

    #[error("mass exceeds 1 (total {0})")]
    MassExceedsOne(String),

    #[error("join of incomparable values")]
    IncomparableJoin,

    #[error("domain/codomain mismatch: {0}")]
    DomainMismatch(String),

    #[error("invalid functor expression: {0}")]
    InvalidFunctor(String),

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("unsupported system: {0}")]
    Unsupported(String),

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("invalid word `{0}`")]
    InvalidWord(String),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
