use thiserror::Error;

/// Errors raised by the simulation engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside its admissible domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The dark-port success probability is too small for the conditional
    /// pointer state to be defined.
    #[error("degenerate postselection: success probability {probability:e} is at or below the floor, conditional state undefined")]
    DegeneratePostselection { probability: f64 },

    /// An intermediate quantity overflowed or became non-finite.
    #[error("numeric range error at level n = {level}: {detail}")]
    NumericRange { level: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
