// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Errors raised by the segmentation engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SegError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("window (t={t}, k={k}, l={l}) out of range for length {len}")]
    WindowOutOfRange {
        t: usize,
        k: usize,
        l: usize,
        len: usize,
    },

    #[error("non-finite value {value} at position {position}")]
    NonFinite { position: usize, value: f64 },

    #[error("window pair (k={k}, l={l}) is absent from the calibrated threshold table")]
    MissingThreshold { k: usize, l: usize },

    #[error("optimizer failed to converge in [{lo}, {hi}]")]
    NoConvergence { lo: f64, hi: f64 },

    #[error("zero variance: {0}")]
    ZeroVariance(String),

    #[error("alpha {alpha} unreachable: {reason}")]
    Unreachable { alpha: f64, reason: String },
}

impl SegError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Self::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, SegError>;
