use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(
        "error budget exceeded: {skipped} of {lines_read} lines skipped \
         (allowed {allowed}); last failure at line {last_line}: {reason}"
    )]
    ErrorBudgetExceeded {
        skipped: u64,
        lines_read: u64,
        allowed: u64,
        last_line: u64,
        reason: String,
    },

    #[error("store format version mismatch: file has version {found}, this build reads version {expected}")]
    StoreVersion { found: u16, expected: u16 },

    #[error("store file is truncated: {0}")]
    StoreTruncated(String),

    #[error("store file is corrupt: {0}")]
    StoreCorrupt(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("venue {venue} would generate {pairs} window pairs, exceeding the pair budget of {budget}")]
    PairBudget { venue: String, pairs: u64, budget: u64 },

    #[error("exhaustive oracle refuses graphs with {n} vertices (limit {limit})")]
    OracleTooLarge { n: usize, limit: usize },

    #[error("infeasible synthetic configuration: {0}")]
    Infeasible(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
