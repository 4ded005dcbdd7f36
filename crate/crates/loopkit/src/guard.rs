//! Enumeration and Hilbert-space size caps.
//!
//! Every exhaustive routine checks its bit budget here. The environment
//! variable `LOOPKIT_MAX_BITS` replaces all default caps when set.

use crate::error::{LoopError, Result};

/// Default cap on the number of tiles for pattern enumeration.
pub const PATTERN_BITS: usize = 24;
/// Default cap on log2 of a Hilbert-space dimension for operator assembly.
pub const HILBERT_BITS: usize = 20;
/// Largest half-length for which matchings are listed explicitly.
pub const MATCHING_HALF_LENGTH: usize = 16;

/// Effective cap: the environment override if present, else `default`.
pub fn cap(default: usize) -> usize {
    std::env::var("LOOPKIT_MAX_BITS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(default)
}

/// Fails with [`LoopError::Guard`] when `needed` exceeds the effective cap.
pub fn check(what: &'static str, needed: usize, default: usize) -> Result<()> {
    let cap = cap(default);
    if needed > cap {
        return Err(LoopError::Guard { what, needed, cap });
    }
    Ok(())
}
