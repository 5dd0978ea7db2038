use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid group: {0}")]
    InvalidGroup(String),

    #[error("group of order {order} exceeds the dense-function cap of {cap}")]
    GroupTooLarge { order: u128, cap: usize },

    #[error("operands belong to different groups")]
    GroupMismatch,

    #[error("element out of range: {0}")]
    ElementOutOfRange(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{what} exceeds its cap ({size} > {cap})")]
    CapExceeded {
        what: &'static str,
        size: u128,
        cap: u128,
    },

    #[error("value at rank {rank} is not an integer count (residual {residual:e})")]
    NotIntegral { rank: usize, residual: f64 },

    #[error("set is empty")]
    EmptySet,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit code: 2 for bad input, 3 for caps and unmet preconditions,
    /// 4 for internal inconsistencies.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::GroupTooLarge { .. } | Error::CapExceeded { .. } | Error::Precondition(_) => 3,
            Error::NotIntegral { .. } => 4,
            _ => 2,
        }
    }
}
