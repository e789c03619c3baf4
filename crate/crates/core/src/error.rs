//! Error types shared across the crate.

use crate::ladder::RateIndex;
use thiserror::Error;

/// Errors produced by the numeric kernels, channel model, rate ladder and
/// adaption operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{context}: input must be finite")]
    NonFinite { context: &'static str },

    #[error("variance must be non-negative, got {0}")]
    NegativeVariance(f64),

    #[error("vector must contain at least one element")]
    EmptyVector,

    #[error("transmittance components must be equal and within [0, 1/sqrt(2)]: re={re}, im={im}")]
    InvalidTransmittance { re: f64, im: f64 },

    #[error("sub-channel {index}: {reason}")]
    InvalidSubChannel { index: usize, reason: String },

    #[error("invalid channel ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("block length {got} does not match the number of information-bearing sub-channels {expected}")]
    BlockLengthMismatch { expected: usize, got: usize },

    #[error("trial count must be at least 1")]
    ZeroTrials,

    #[error("noise-to-gain ratio must be positive, got {0}")]
    NonPositiveNu(f64),

    #[error("invalid rate ladder: {0}")]
    InvalidLadder(String),

    #[error("invalid rate profile: {0}")]
    InvalidProfile(String),

    #[error("rate index {0} is not present in the profile")]
    MissingRateIndex(RateIndex),

    #[error("rate indices out of order: {at} must precede {next}")]
    IndexOrdering { at: RateIndex, next: RateIndex },

    #[error("sub-channel {index} is already at its maximal rate")]
    ChannelExhausted { index: usize },

    #[error("no sub-channel is eligible for a further rate step")]
    NoEligibleChannel,

    #[error("target rate {target} exceeds the maximum achievable total rate {max_achievable}")]
    InfeasibleTarget { target: f64, max_achievable: f64 },

    #[error("internal invariant violated: {0}")]
    InternalInvariant(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
