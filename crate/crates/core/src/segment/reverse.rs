// SPDX-License-Identifier: MIT OR Apache-2.0

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::{SegmentationResult, StatSource};
use crate::error::{Result, SegError};
use crate::seqcore::WindowPair;

/// Heap entry; the heap pops the smallest statistic, then the smallest
/// location.
#[derive(Clone, Copy, Debug)]
struct Entry {
    x: f64,
    t: usize,
    version: u32,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .x
            .total_cmp(&self.x)
            .then(other.t.cmp(&self.t))
            .then(self.version.cmp(&other.version))
    }
}

/// Full deletion sequence of reverse segmentation.
///
/// Starting from every location `1..T` as a change-point, the point whose
/// statistic (windows reaching to its current neighbours) is smallest is
/// deleted, one at a time, until none remain. The sequence does not depend
/// on any threshold; a threshold `c` only selects where to stop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReverseTrace {
    len: usize,
    order: Vec<usize>,
    values: Vec<f64>,
}

impl ReverseTrace {
    pub fn from_parts(len: usize, order: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert_eq!(order.len(), len.saturating_sub(1));
        debug_assert_eq!(order.len(), values.len());
        Self { len, order, values }
    }

    pub fn seq_len(&self) -> usize {
        self.len
    }

    /// Locations in deletion order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Minimum statistic at each deletion.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of deletions performed at threshold `c`: deletion continues
    /// while the current minimum is below `c`.
    pub fn stop_index(&self, c: f64) -> usize {
        self.values
            .iter()
            .position(|&v| v >= c)
            .unwrap_or(self.values.len())
    }

    /// Change-points surviving at threshold `c`, ascending.
    pub fn survivors(&self, c: f64) -> Vec<usize> {
        let mut s = self.order[self.stop_index(c)..].to_vec();
        s.sort_unstable();
        s
    }

    pub fn n_survivors(&self, c: f64) -> usize {
        self.order.len() - self.stop_index(c)
    }

    /// Smallest threshold at which nothing survives is just above this.
    pub fn bottleneck(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Every location ranked by survival: last deleted first.
    pub fn ranking(&self) -> Vec<usize> {
        self.order.iter().rev().copied().collect()
    }
}

/// Runs the deletion loop to completion.
///
/// Active locations form a doubly linked list; deleting one changes only
/// its two neighbours' statistics, which are recomputed and pushed with a
/// fresh version stamp. Stale heap entries are skipped on pop.
pub fn reverse_trace<S: StatSource>(source: &S) -> ReverseTrace {
    let len = source.len();
    if len < 2 {
        return ReverseTrace::from_parts(len, Vec::new(), Vec::new());
    }
    let mut prev: Vec<usize> = (0..=len).map(|i| i.saturating_sub(1)).collect();
    let mut next: Vec<usize> = (0..=len).map(|i| (i + 1).min(len)).collect();
    let mut version = vec![0u32; len + 1];
    let mut alive = vec![true; len + 1];

    let stat = |t: usize, p: usize, n: usize| source.stat(t, WindowPair { k: n - t, l: t - p });

    let mut heap: BinaryHeap<Entry> = (1..len)
        .map(|t| Entry {
            x: stat(t, t - 1, t + 1),
            t,
            version: 0,
        })
        .collect();

    let mut order = Vec::with_capacity(len - 1);
    let mut values = Vec::with_capacity(len - 1);
    while let Some(e) = heap.pop() {
        if !alive[e.t] || e.version != version[e.t] {
            continue;
        }
        alive[e.t] = false;
        order.push(e.t);
        values.push(e.x);
        let (p, n) = (prev[e.t], next[e.t]);
        next[p] = n;
        prev[n] = p;
        for nb in [p, n] {
            if nb != 0 && nb != len {
                version[nb] += 1;
                heap.push(Entry {
                    x: stat(nb, prev[nb], next[nb]),
                    t: nb,
                    version: version[nb],
                });
            }
        }
    }
    ReverseTrace::from_parts(len, order, values)
}

/// Reverse segmentation at threshold `c`. The result carries the
/// threshold-free ranking of all locations.
pub fn reverse_segment<S: StatSource>(source: &S, c: f64) -> Result<SegmentationResult> {
    if source.len() < 2 {
        return Err(SegError::invalid(format!(
            "reverse segmentation needs T >= 2, got {}",
            source.len()
        )));
    }
    if c.is_nan() {
        return Err(SegError::invalid("threshold is NaN"));
    }
    let trace = reverse_trace(source);
    Ok(result_from_trace(source, &trace, c))
}

/// Segmentation result at threshold `c` from a precomputed trace.
pub fn result_from_trace<S: StatSource>(
    source: &S,
    trace: &ReverseTrace,
    c: f64,
) -> SegmentationResult {
    let raw = trace.survivors(c);
    let len = source.len();
    let mut stats = Vec::with_capacity(raw.len());
    let mut windows = Vec::with_capacity(raw.len());
    for (j, &t) in raw.iter().enumerate() {
        let p = if j == 0 { 0 } else { raw[j - 1] };
        let n = raw.get(j + 1).copied().unwrap_or(len);
        let w = WindowPair { k: n - t, l: t - p };
        stats.push(source.stat(t, w));
        windows.push(w);
    }
    SegmentationResult::from_parts(len, raw, stats, windows, trace.ranking())
}
