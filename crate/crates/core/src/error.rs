use thiserror::Error;

use crate::belief::Observation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid value for {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("data cannot be fitted: {0}")]
    Unfittable(String),

    #[error("belief has no weight left")]
    EmptyBelief,

    #[error("response oracle failed after {} observations: {message}", .partial.len())]
    Oracle {
        message: String,
        partial: Vec<Observation>,
    },
}

impl Error {
    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
