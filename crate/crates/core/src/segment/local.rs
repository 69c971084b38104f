// SPDX-License-Identifier: MIT OR Apache-2.0

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SegmentationResult, StatSource};
use crate::calibrate::ThresholdPolicy;
use crate::error::{Result, SegError};
use crate::seqcore::{WindowGrid, WindowPair};

/// Rule deciding whether an exceedance becomes a change-point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Admission {
    /// Admit `t` unless `[t-l+1, t+k-1]` already holds a change-point.
    #[default]
    Interval,
    /// Admit `t` only if `(t-l, t+k]` is disjoint from the windows of all
    /// previously admitted candidates.
    Disjoint,
}

impl FromStr for Admission {
    type Err = SegError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interval" => Ok(Self::Interval),
            "disjoint" => Ok(Self::Disjoint),
            other => Err(SegError::invalid(format!(
                "unknown admission rule '{other}'"
            ))),
        }
    }
}

impl fmt::Display for Admission {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Interval => "interval",
            Self::Disjoint => "disjoint",
        })
    }
}

/// A tested location and window whose statistic reached its threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateTriple {
    pub t: usize,
    pub w: WindowPair,
    pub x: f64,
    pub lambda: f64,
}

impl CandidateTriple {
    /// Processing order: shorter longest window, then shorter shortest
    /// window, then larger statistic, then smaller `t`, then smaller `k`.
    pub fn priority_cmp(&self, other: &Self) -> Ordering {
        self.w
            .max_len()
            .cmp(&other.w.max_len())
            .then(self.w.min_len().cmp(&other.w.min_len()))
            .then(other.x.total_cmp(&self.x))
            .then(self.t.cmp(&other.t))
            .then(self.w.k.cmp(&other.w.k))
    }
}

fn check_grid(source: &impl StatSource, grid: &WindowGrid) -> Result<()> {
    if grid.seq_len() != source.len() {
        return Err(SegError::invalid(format!(
            "grid built for length {} but sequence has length {}",
            grid.seq_len(),
            source.len()
        )));
    }
    if grid.is_empty() {
        return Err(SegError::invalid("window grid is empty"));
    }
    Ok(())
}

/// All exceedances over the grid, in processing order.
pub fn collect_candidates<S: StatSource>(
    source: &S,
    grid: &WindowGrid,
    policy: &ThresholdPolicy,
) -> Result<Vec<CandidateTriple>> {
    check_grid(source, grid)?;
    let len = source.len();
    let per_pair: Vec<Vec<CandidateTriple>> = grid
        .pairs()
        .par_iter()
        .map_init(Vec::new, |buf, &w| {
            let (offset, c) = policy.split(w, len)?;
            source.sweep(w, buf);
            Ok(buf
                .iter()
                .enumerate()
                .filter(|(_, &x)| x - offset >= c)
                .map(|(i, &x)| CandidateTriple {
                    t: w.l + i,
                    w,
                    x,
                    lambda: offset + c,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut all: Vec<CandidateTriple> = per_pair.into_iter().flatten().collect();
    all.par_sort_unstable_by(CandidateTriple::priority_cmp);
    Ok(all)
}

/// Walks the sorted candidates and admits change-points under `admission`.
/// Returns the admitted candidates in admission order.
pub fn admit(candidates: &[CandidateTriple], admission: Admission) -> Vec<CandidateTriple> {
    let mut admitted = Vec::new();
    match admission {
        Admission::Interval => {
            let mut taken = BTreeSet::new();
            for cand in candidates {
                let lo = cand.t + 1 - cand.w.l;
                let hi = cand.t + cand.w.k - 1;
                if taken.range(lo..=hi).next().is_none() {
                    taken.insert(cand.t);
                    admitted.push(*cand);
                }
            }
        }
        Admission::Disjoint => {
            // start -> end of the integer span (t-l, t+k]
            let mut spans: BTreeMap<usize, usize> = BTreeMap::new();
            for cand in candidates {
                let lo = cand.t + 1 - cand.w.l;
                let hi = cand.t + cand.w.k;
                let clash = spans
                    .range(..=hi)
                    .next_back()
                    .is_some_and(|(_, &end)| end >= lo);
                if !clash {
                    spans.insert(lo, hi);
                    admitted.push(*cand);
                }
            }
        }
    }
    admitted
}

/// Bottom-up segmentation over a window grid. Refinement is not applied;
/// see [`SegmentationResult::refine`].
pub fn local_segment<S: StatSource>(
    source: &S,
    grid: &WindowGrid,
    policy: &ThresholdPolicy,
    admission: Admission,
) -> Result<SegmentationResult> {
    let candidates = collect_candidates(source, grid, policy)?;
    let mut admitted = admit(&candidates, admission);
    admitted.sort_by_key(|c| c.t);
    Ok(SegmentationResult::from_parts(
        source.len(),
        admitted.iter().map(|c| c.t).collect(),
        admitted.iter().map(|c| c.x).collect(),
        admitted.iter().map(|c| c.w).collect(),
        Vec::new(),
    ))
}
