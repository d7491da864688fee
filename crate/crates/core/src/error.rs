use thiserror::Error;

use crate::obdd::ObddError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Obdd(#[from] ObddError),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("inner loop exceeded {cap} iterations in outer iteration {outer}")]
    InnerLoopCap { cap: usize, outer: usize },
    #[error("seed space of 2^{bits} seeds is too large for exact enumeration (limit 2^{limit})")]
    SeedSpaceTooLarge { bits: usize, limit: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
