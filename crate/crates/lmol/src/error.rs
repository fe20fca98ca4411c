use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("model configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Num(#[from] numcore::NumError),

    #[error(transparent)]
    Smiles(#[from] smiles::SmilesError),

    #[error("data error: {0}")]
    Data(String),

    #[error("sequence length error: {0}")]
    Length(String),

    #[error("checkpoint format error: {0}")]
    Format(String),

    #[error("training diverged at step {step}: {detail}")]
    NonFiniteLoss { step: u64, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn length(msg: impl Into<String>) -> Self {
        Error::Length(msg.into())
    }

    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
