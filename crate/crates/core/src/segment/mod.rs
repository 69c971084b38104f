// SPDX-License-Identifier: MIT OR Apache-2.0

//! Local and reverse segmentation, and the shared refinement step.
//!
//! Both algorithms are generic over a [`StatSource`], so the same code
//! segments a single sequence, a pooled panel, or two-channel allelic data.

mod local;
mod refine;
mod reverse;
mod source;

use serde::{Deserialize, Serialize};

pub use local::{admit, collect_candidates, local_segment, Admission, CandidateTriple};
pub use refine::{refine, RefineRange};
pub use reverse::{result_from_trace, reverse_segment, reverse_trace, ReverseTrace};
pub use source::StatSource;

use crate::seqcore::WindowPair;

/// Change-points found by one segmentation run.
///
/// All locations follow the convention that `tau` is the last index of the
/// left segment, so `1 <= tau < T`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentationResult {
    pub len: usize,
    /// Detected change-points, ascending.
    pub raw: Vec<usize>,
    /// Refined change-points; equal to `raw` until refinement is applied.
    pub refined: Vec<usize>,
    /// Statistic value behind each raw change-point.
    pub stats: Vec<f64>,
    /// Window at admission (local) or reaching to the neighbours (reverse).
    pub windows: Vec<WindowPair>,
    /// Reverse segmentation only: every location, most persistent first.
    pub ranking: Vec<usize>,
}

impl SegmentationResult {
    pub fn from_parts(
        len: usize,
        raw: Vec<usize>,
        stats: Vec<f64>,
        windows: Vec<WindowPair>,
        ranking: Vec<usize>,
    ) -> Self {
        Self {
            len,
            refined: raw.clone(),
            raw,
            stats,
            windows,
            ranking,
        }
    }

    /// Number of detected change-points.
    pub fn j_hat(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    /// Applies the post-segmentation relocation in place.
    pub fn refine<S: StatSource>(&mut self, source: &S, range: RefineRange) {
        self.refined = refine(&self.raw, source, range);
    }

    /// Refined or raw change-points.
    pub fn change_points(&self, refined: bool) -> &[usize] {
        if refined {
            &self.refined
        } else {
            &self.raw
        }
    }

    /// Top `count` of the survival ranking (reverse segmentation).
    pub fn top(&self, count: usize) -> &[usize] {
        &self.ranking[..count.min(self.ranking.len())]
    }
}
