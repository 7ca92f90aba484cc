use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("state has {0} factors; a bipartite state needs exactly 2")]
    NotBipartite(usize),
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("invalid observable: {0}")]
    InvalidObservable(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("Schmidt rank {rank} exceeds factor dimension {dim}")]
    RankExceedsDim { rank: usize, dim: usize },
    #[error("weights {start}..{end} do not form a degenerate block")]
    NotDegenerate { start: usize, end: usize },
    #[error("joint state of {amplitudes} amplitudes exceeds the cap of {cap}")]
    StateTooLarge { amplitudes: u128, cap: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
