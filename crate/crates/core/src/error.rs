use thiserror::Error;

use crate::model::UserId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("weights sum to zero")]
    DegenerateWeights,
    #[error("circular mean is undefined: resultant length {0:e}")]
    UndefinedMean(f64),
    #[error("weights are not normalized: sum is {0}")]
    Unnormalized(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("event at t={event} is older than t={current}")]
    OutOfOrder { event: f64, current: f64 },
    #[error("inertial delta for user {got} applied to belief of user {expected}")]
    WrongOwner { expected: UserId, got: UserId },
    #[error("every particle is incompatible with the range measurements")]
    DegenerateCorrection,
    #[error("dual injection needs at least one range constraint")]
    NoConstraints,
    #[error("user {0} is not registered")]
    UnknownUser(UserId),
    #[error("user {0} is already registered")]
    DuplicateUser(UserId),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
