use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("rank mismatch: {0}")]
    RankMismatch(String),
    #[error("index out of range: {0}")]
    IndexRange(String),
    #[error("invalid composition: {0}")]
    InvalidComposition(String),
    #[error("parabolic subgroup too large ({size} > {limit}); raise the guard to enumerate it")]
    ParabolicTooLarge { size: u128, limit: u128 },
    #[error("inexact division: {0}")]
    InexactDivision(String),
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("margin mismatch: {0}")]
    MarginMismatch(String),
    #[error("matrix is not tridiagonal")]
    NotTridiagonal,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("membership violated: {0}")]
    Membership(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
