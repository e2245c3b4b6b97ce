use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed alist: {0}")]
    Alist(String),
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("parity-check matrix has rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },
    #[error("{what} has length {actual}, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid schedule: {0}")]
    Schedule(String),
    #[error("malformed checkpoint: {0}")]
    Checkpoint(String),
    #[error("gradient tape: {0}")]
    Tape(String),
    #[error("training diverged at iteration {iteration} (loss {loss})")]
    Diverged { iteration: usize, loss: f64 },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
