use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("no parent in unit-square model: {0}")]
    NoParent(String),
    #[error("no sibling in unit-square model: {0}")]
    NoSibling(String),
    #[error("position {pos} out of range for level {level}")]
    BadPosition { level: u32, pos: u64 },
    #[error("level {level} exceeds model depth {depth}")]
    LevelOverflow { level: u32, depth: u32 },
    #[error("insufficient depth: need both levels >= {need}, got {got}")]
    InsufficientDepth { need: u32, got: String },
    #[error("resolution mismatch: {0} vs {1}")]
    ResolutionMismatch(u32, u32),
    #[error("exact strategy supports depth <= {max}, got {got}")]
    ExactTooLarge { max: u32, got: u32 },
    #[error("power iteration did not converge after {iters} iterations (relative residual {residual:e})")]
    NonConvergence { iters: usize, residual: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
