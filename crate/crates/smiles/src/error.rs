use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SmilesError {
    #[error("tokenization error at {pos}: {msg}")]
    Tokenize { pos: usize, msg: String },

    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("token id {0} is out of vocabulary range")]
    InvalidTokenId(u32),

    #[error("vocabulary file is malformed: {0}")]
    VocabFormat(String),
}

impl SmilesError {
    pub fn parse(pos: usize, msg: impl Into<String>) -> Self {
        SmilesError::Parse {
            pos,
            msg: msg.into(),
        }
    }
}
