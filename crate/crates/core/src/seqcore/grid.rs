// SPDX-License-Identifier: MIT OR Apache-2.0

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SegError};

/// Lengths of the two windows around a candidate location `t`: the right
/// window `(t, t+k]` and the left window `(t-l, t]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WindowPair {
    pub k: usize,
    pub l: usize,
}

impl WindowPair {
    pub fn new(k: usize, l: usize) -> Result<Self> {
        if k == 0 || l == 0 {
            return Err(SegError::invalid(format!(
                "window lengths must be positive, got k={k}, l={l}"
            )));
        }
        Ok(Self { k, l })
    }

    pub fn max_len(self) -> usize {
        self.k.max(self.l)
    }

    pub fn min_len(self) -> usize {
        self.k.min(self.l)
    }

    /// Whether both windows fit around `t` in a sequence of length `len`.
    pub fn fits(self, t: usize, len: usize) -> bool {
        self.l <= t && t + self.k <= len
    }

    /// Scale order: shorter longest window first, then shorter shortest
    /// window, then `k`.
    pub fn scale_cmp(&self, other: &Self) -> Ordering {
        self.max_len()
            .cmp(&other.max_len())
            .then(self.min_len().cmp(&other.min_len()))
            .then(self.k.cmp(&other.k))
    }
}

impl fmt::Display for WindowPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(k={}, l={})", self.k, self.l)
    }
}

/// Geometric set of window pairs `(floor(r^a), floor(r^b))` with
/// `k + l <= T` and aspect ratio bounded by `h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowGrid {
    pairs: Vec<WindowPair>,
    len: usize,
    r: f64,
    h: f64,
}

impl WindowGrid {
    /// Pairs in scale order (see [`WindowPair::scale_cmp`]).
    pub fn pairs(&self) -> &[WindowPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Sequence length the grid was built for.
    pub fn seq_len(&self) -> usize {
        self.len
    }

    pub fn ratio(&self) -> f64 {
        self.r
    }

    pub fn aspect(&self) -> f64 {
        self.h
    }

    pub fn contains(&self, w: WindowPair) -> bool {
        self.pairs.contains(&w)
    }

    /// Total number of `(t, k, l)` triples swept by a full pass.
    pub fn n_triples(&self) -> usize {
        self.pairs.iter().map(|w| self.len + 1 - w.k - w.l).sum()
    }
}

/// Distinct values of `floor(r^a)` for `a = 0, 1, ...` not exceeding `max`.
pub(crate) fn geometric_lengths(r: f64, max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    for a in 0.. {
        let f = r.powi(a).floor();
        if f > max as f64 {
            break;
        }
        let f = f as usize;
        if out.last() != Some(&f) {
            out.push(f);
        }
    }
    out
}

pub fn build_grid(len: usize, r: f64, h: f64) -> Result<WindowGrid> {
    if !(r.is_finite() && r > 1.0) {
        return Err(SegError::invalid(format!(
            "grid ratio r must exceed 1, got {r}"
        )));
    }
    if !(h.is_finite() && h >= 1.0) {
        return Err(SegError::invalid(format!(
            "aspect bound h must be >= 1, got {h}"
        )));
    }
    if len < 2 {
        return Err(SegError::invalid(format!(
            "sequence length must be >= 2, got {len}"
        )));
    }

    let lengths = geometric_lengths(r, len - 1);
    let mut pairs = Vec::new();
    for &k in &lengths {
        for &l in &lengths {
            let (kf, lf) = (k as f64, l as f64);
            if k + l <= len && lf / kf <= h && kf / lf <= h {
                pairs.push(WindowPair { k, l });
            }
        }
    }
    pairs.sort_by(WindowPair::scale_cmp);
    Ok(WindowGrid { pairs, len, r, h })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(grid: &WindowGrid) -> Vec<(usize, usize)> {
        let mut v: Vec<_> = grid.pairs().iter().map(|w| (w.k, w.l)).collect();
        v.sort();
        v
    }

    #[test]
    fn small_grid_matches_enumeration() {
        let g = build_grid(10, 2.0, 2.0).unwrap();
        assert_eq!(
            set(&g),
            vec![(1, 1), (1, 2), (2, 1), (2, 2), (2, 4), (4, 2), (4, 4)]
        );
    }

    #[test]
    fn shortest_sequence() {
        let g = build_grid(2, 2.0, 1.0).unwrap();
        assert_eq!(set(&g), vec![(1, 1)]);
    }

    #[test]
    fn lengths_deduplicated_near_one() {
        let f = geometric_lengths(1.2, 20);
        assert_eq!(f, vec![1, 2, 3, 4, 5, 6, 7, 8, 10, 12, 15, 18]);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(build_grid(10, 1.0, 2.0).is_err());
        assert!(build_grid(10, 0.5, 2.0).is_err());
        assert!(build_grid(10, 2.0, 0.5).is_err());
        assert!(build_grid(1, 2.0, 2.0).is_err());
    }

    #[test]
    fn pairs_are_in_scale_order() {
        let g = build_grid(500, 1.2, 10.0).unwrap();
        assert!(g
            .pairs()
            .windows(2)
            .all(|w| w[0].scale_cmp(&w[1]) == Ordering::Less));
    }
}
