//! Error types shared across the crate.

use thiserror::Error;

/// Errors from single-qubit state construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QubitError {
    /// The amplitude pair does not describe a unit vector.
    #[error("state is not normalized: |alpha|^2 + |beta|^2 = {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },
}

/// Errors from building a protocol or experiment configuration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("message length n must be at least 1")]
    InvalidMessageLength,
    #[error("check-set size delta must be at least 1")]
    InvalidDelta,
    #[error("abort threshold {0} is outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("trial count must be at least 1")]
    InvalidTrials,
    #[error("fixed message has {actual} bits but the protocol carries {expected}")]
    FixedMessageLength { expected: usize, actual: usize },
    #[error("shopping payload needs {needed} bits but the protocol carries only {available}")]
    ShoppingOverflow { needed: usize, available: usize },
    #[error("shopping field longer than {max} bytes: {actual}")]
    ShoppingFieldTooLong { max: usize, actual: usize },
    #[error("the controller substitution adversary only applies to the second transmission")]
    SubstitutionOnFirstChannel,
    #[error("unknown adversary name `{0}` (expected honest, intercept, or substitution)")]
    UnknownAdversary(String),
}

/// Errors raised by protocol steps when their inputs are inconsistent.
///
/// Any of these invalidates the run: they indicate misuse of the step
/// functions, not an adversary effect.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("{context}: expected a sequence of {expected} in-flight qubits, got {actual}")]
    LengthMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("mask key has {actual} bits, message has {expected}")]
    MaskLengthMismatch { expected: usize, actual: usize },
    #[error("decoy position {position} is outside the sequence of length {len}")]
    DecoyPositionOutOfRange { position: usize, len: usize },
}

/// Errors from decoding a shopping frame back into its fields.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShoppingDecodeError {
    /// The frame ended before the field announced by a length prefix.
    #[error("frame truncated at bit offset {offset}: needed {needed} more bits")]
    Truncated { offset: usize, needed: usize },
}

/// Anything that can stop an experiment.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}
