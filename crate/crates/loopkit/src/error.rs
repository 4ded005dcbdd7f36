//! Error type shared by every module of the crate.

use thiserror::Error;

/// Failures reported by loopkit operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LoopError {
    #[error("invalid dimensions {n_h}x{n_v}: {reason}")]
    InvalidDims {
        n_h: usize,
        n_v: usize,
        reason: &'static str,
    },

    #[error("{what} out of range: {value} (allowed {min}..={max})")]
    OutOfRange {
        what: &'static str,
        value: i64,
        min: i64,
        max: i64,
    },

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("size guard: {what} needs {needed} bits, cap is {cap} (set LOOPKIT_MAX_BITS to override)")]
    Guard {
        what: &'static str,
        needed: usize,
        cap: usize,
    },

    #[error("operation requires {0} topology")]
    Topology(&'static str),

    #[error("forbidden matching: {orientation} cut {cut} carries flow {flow} > {threshold}")]
    Forbidden {
        orientation: &'static str,
        cut: usize,
        flow: usize,
        threshold: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("construction failed: {0}")]
    Construction(String),
}

pub type Result<T> = std::result::Result<T, LoopError>;
