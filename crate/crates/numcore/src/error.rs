use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumError {
    #[error("shape mismatch in {op}: {detail}")]
    Shape { op: &'static str, detail: String },

    #[error("softmax row {row} is entirely masked")]
    DegenerateRow { row: usize },

    #[error("target id {id} out of range for vocabulary of {vocab} at position {pos}")]
    TargetOutOfRange { id: u32, vocab: usize, pos: usize },

    #[error("embedding id {id} out of range for table of {rows} rows at position {pos}")]
    IdOutOfRange { id: u32, rows: usize, pos: usize },

    #[error("backward called on an already consumed graph")]
    GraphConsumed,

    #[error("backward requires a scalar loss, got shape {0:?}")]
    NonScalarLoss(Vec<usize>),

    #[error("parameter {index} has no gradient")]
    MissingGrad { index: usize },

    #[error("optimizer state does not match parameter set: {0}")]
    StateMismatch(String),

    #[error("rotary embedding requires an even head dimension, got {0}")]
    OddRotaryDim(usize),

    #[error("non-finite value produced by {op}")]
    NonFinite { op: &'static str },
}
