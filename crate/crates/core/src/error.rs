use thiserror::Error;

use crate::Group;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("capacity exceeded: {what} {requested} is above the limit {limit}")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("invalid order k = {k}: {reason}")]
    InvalidOrder { k: usize, reason: &'static str },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("singular Gram matrix for {group} group, k = {k}, d = {d}")]
    SingularGram { group: Group, k: usize, d: u64 },

    #[error("real-valued states are required for the orthogonal group")]
    RealStatesRequired,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("kernel matrix is singular; enable the pseudo-inverse fallback")]
    SingularKernel,

    #[error("degenerate second moment")]
    DegenerateMoment,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("memory guard: {requested} elements requested, limit {limit}")]
    MemoryGuard { requested: u128, limit: u128 },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }
}
