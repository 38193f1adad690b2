//! Command implementations behind the `qvhs` binary.

// Negated comparisons are used on purpose so that NaN fails bound checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod enhance;
pub mod eval;
pub mod record;
pub mod sweep;
pub mod synth;

/// Invalid flags, parameters or sweep specs. Mapped to exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub mod exit {
    pub const OK: u8 = 0;
    pub const FAILURE: u8 = 1;
    pub const USAGE: u8 = 2;
    /// The run finished but some records were skipped.
    pub const PARTIAL: u8 = 3;
}
