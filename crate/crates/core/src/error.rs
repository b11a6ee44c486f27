use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A strategy returned something that is not a valid distribution.
    #[error("strategy contract violated in round {round}: {reason}")]
    StrategyContract { round: i64, reason: String },

    #[error("quadrature did not converge: achieved {achieved:.3e}, requested {requested:.3e}")]
    Numeric { achieved: f64, requested: f64 },

    #[error("resource guard: {what} (estimated {estimate} states, limit {limit})")]
    ResourceGuard {
        what: String,
        estimate: u64,
        limit: u64,
    },

    #[error("unknown strategy `{0}`")]
    UnknownStrategy(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
