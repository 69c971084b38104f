// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SegError};
use crate::seqcore::WindowPair;

/// One entry of a per-window threshold table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub k: usize,
    pub l: usize,
    pub lambda: f64,
}

/// Threshold `lambda(k, l)` that a local statistic must reach for its
/// location to count as a change-point.
///
/// Every threshold splits into a window-dependent offset plus a constant
/// `c`; exceedance is decided as `X - offset >= c`, the same comparison
/// calibration uses, so calibrated constants reproduce exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ThresholdPolicy {
    /// `sqrt(2 log(e T / min(k, l))) + c`.
    Multiscale { c: f64 },
    /// `sqrt(2 log T) + c`.
    Constant { c: f64 },
    /// `a log T`.
    Theorem2 { a: f64 },
    /// A single calibrated constant, the same for every window.
    Calibrated { c: f64 },
    /// Calibrated value per window pair.
    Table { entries: Vec<TableEntry> },
}

/// Window-dependent part of a threshold family; the constant is what
/// calibration solves for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdShape {
    Multiscale,
    Constant,
    Flat,
}

impl ThresholdShape {
    pub fn offset(self, w: WindowPair, len: usize) -> f64 {
        let t = len as f64;
        match self {
            Self::Multiscale => (2.0 * (std::f64::consts::E * t / w.min_len() as f64).ln()).sqrt(),
            Self::Constant => (2.0 * t.ln()).sqrt(),
            Self::Flat => 0.0,
        }
    }

    pub fn with_constant(self, c: f64) -> ThresholdPolicy {
        match self {
            Self::Multiscale => ThresholdPolicy::Multiscale { c },
            Self::Constant => ThresholdPolicy::Constant { c },
            Self::Flat => ThresholdPolicy::Calibrated { c },
        }
    }
}

impl ThresholdPolicy {
    /// `(offset, c)` with `lambda = offset + c`.
    pub fn split(&self, w: WindowPair, len: usize) -> Result<(f64, f64)> {
        Ok(match self {
            Self::Multiscale { c } => (ThresholdShape::Multiscale.offset(w, len), *c),
            Self::Constant { c } => (ThresholdShape::Constant.offset(w, len), *c),
            Self::Theorem2 { a } => (0.0, a * (len as f64).ln()),
            Self::Calibrated { c } => (0.0, *c),
            Self::Table { entries } => {
                let e = entries
                    .iter()
                    .find(|e| e.k == w.k && e.l == w.l)
                    .ok_or(SegError::MissingThreshold { k: w.k, l: w.l })?;
                (e.lambda, 0.0)
            }
        })
    }

    /// `lambda(k, l)` for a sequence of length `len`.
    pub fn lambda(&self, w: WindowPair, len: usize) -> Result<f64> {
        self.split(w, len).map(|(offset, c)| offset + c)
    }

    /// The window-free threshold used by reverse segmentation.
    pub fn scalar(&self, len: usize) -> Result<f64> {
        match self {
            Self::Multiscale { .. } | Self::Table { .. } => Err(SegError::invalid(format!(
                "threshold mode '{}' depends on the window and cannot drive reverse segmentation",
                self.mode_name()
            ))),
            _ => {
                let (offset, c) = self.split(WindowPair { k: 1, l: 1 }, len)?;
                Ok(offset + c)
            }
        }
    }

    pub fn mode_name(&self) -> &'static str {
        match self {
            Self::Multiscale { .. } => "multiscale",
            Self::Constant { .. } => "constant",
            Self::Theorem2 { .. } => "theorem2",
            Self::Calibrated { .. } => "calibrated",
            Self::Table { .. } => "table",
        }
    }
}

impl fmt::Display for ThresholdPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Multiscale { c } => write!(f, "multiscale(c={c})"),
            Self::Constant { c } => write!(f, "constant(c={c})"),
            Self::Theorem2 { a } => write!(f, "theorem2(a={a})"),
            Self::Calibrated { c } => write!(f, "calibrated(c={c})"),
            Self::Table { entries } => write!(f, "table({} pairs)", entries.len()),
        }
    }
}

/// `lambda(k, l)` for the given policy.
pub fn lambda(policy: &ThresholdPolicy, w: WindowPair, len: usize) -> Result<f64> {
    policy.lambda(w, len)
}
