//! Crate-wide error type.

use thiserror::Error;

use crate::dynamics::SpectrumKind;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid (N, S) combination: n_spins = {n_spins}, 2S = {two_s}")]
    InvalidBlockLabel { n_spins: u32, two_s: u32 },

    #[error("entry ({row}, {col}) violates the +/-2-diagonal block structure")]
    StructureViolation { row: usize, col: usize },

    #[error("tridiagonal eigensolver failed to converge at index {index} after {iterations} iterations{context}")]
    EigenNonConvergence {
        index: usize,
        iterations: usize,
        context: String,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("spectrum kind mismatch: expected {expected:?}, got {got:?}")]
    KindMismatch {
        expected: SpectrumKind,
        got: SpectrumKind,
    },

    #[error("standard intensities are 0/0 at b = 0; the high-temperature limit path must be used")]
    HighTemperatureLimit,

    #[error("phi grid too small: order separation needs at least {needed} points, got {got}")]
    GridTooSmall { needed: usize, got: usize },

    #[error("brute-force oracle refused n_spins = {0} (hard cap {1})")]
    OracleTooLarge(u32, u32),

    #[error("non-finite value in {0}")]
    NonFinite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
