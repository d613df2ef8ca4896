use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("bad label at line {line}: {value:?}")]
    BadLabel { line: usize, value: String },

    #[error("malformed record at line {line}: {msg}")]
    Malformed { line: usize, msg: String },

    #[error("unknown token id {0}")]
    UnknownTokenId(usize),

    #[error("unknown token {0:?}")]
    UnknownToken(String),

    #[error("syntax error at byte {offset}: {msg}")]
    Syntax { offset: usize, msg: String },

    #[error("non-disjoint clauses")]
    NonDisjoint,

    #[error("empty pattern")]
    EmptyPattern,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("already in model: {0}")]
    AlreadyInModel(String),

    #[error("embeddings line {line}: {msg}")]
    Embedding { line: usize, msg: String },

    #[error("vector length mismatch ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("vocabulary too small: need at least {need} tokens, got {have}")]
    VocabularyTooSmall { need: usize, have: usize },

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by malformed input records rather than
    /// missing files or invalid arguments.
    pub fn is_malformed_input(&self) -> bool {
        matches!(
            self,
            Error::EmptyCorpus
                | Error::BadLabel { .. }
                | Error::Malformed { .. }
                | Error::Embedding { .. }
                | Error::Syntax { .. }
                | Error::UnknownToken(_)
                | Error::NonDisjoint
        )
    }
}
