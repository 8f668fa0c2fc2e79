use thiserror::Error;

/// Errors surfaced by the data structures and the trace front end.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("index {index} out of range 1..={len}")]
    OutOfRange { index: usize, len: usize },
    #[error("capacity {0} exceeded")]
    CapacityExceeded(usize),
    #[error("key has length {got}, expected {expected}")]
    WrongKeyLength { got: usize, expected: usize },
    #[error("name registry is full")]
    RegistryFull,
    #[error("position {0} is not void")]
    NotVoid(usize),
    #[error("symbol {0} outside alphabet")]
    BadSymbol(u32),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(index: usize, len: usize) -> Result<()> {
    if index == 0 || index > len {
        Err(Error::OutOfRange { index, len })
    } else {
        Ok(())
    }
}
