use thiserror::Error;

use crate::circle::StBoundReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Inputs violate an operation's precondition.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A configured size or work limit would be exceeded.
    #[error("resource limit exceeded: {message}")]
    Resource {
        message: String,
        /// Size estimate that triggered the limit, when one is available.
        estimate: Option<u64>,
    },

    /// The stratified arc sweep ran out of its evaluation budget.
    #[error("sampling budget exhausted after {} evaluations", .partial.evaluations)]
    BudgetExhausted { partial: Box<StBoundReport> },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
