// SPDX-License-Identifier: MIT OR Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Result, SegError};

/// How observations are rescaled to unit noise variance at ingestion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "sigma")]
pub enum Standardize {
    /// Leave values as they are.
    None,
    /// Divide every sequence by a known noise standard deviation.
    Known(f64),
    /// Divide each sequence by its own difference-based noise estimate.
    DifferenceBased,
}

/// `N` aligned sequences of common length `T`, stored row-major.
///
/// Columns where any sequence had a missing observation are dropped at
/// construction; `index_map` keeps the 1-based original coordinate of each
/// retained column so results can be reported in input coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SequencePanel {
    values: Vec<f64>,
    n_seq: usize,
    len: usize,
    index_map: Vec<usize>,
    dropped: Vec<usize>,
}

impl SequencePanel {
    /// Builds a panel from fully observed rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let raw: Vec<Vec<Option<f64>>> = rows
            .iter()
            .map(|row| row.iter().map(|&v| Some(v)).collect())
            .collect();
        build_panel(&raw)
    }

    /// A single fully observed sequence.
    pub fn single(values: &[f64]) -> Result<Self> {
        Self::from_rows(&[values.to_vec()])
    }

    pub fn n_seq(&self) -> usize {
        self.n_seq
    }

    /// Retained length `T`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.values[n * self.len..(n + 1) * self.len]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.len)
    }

    pub fn index_map(&self) -> &[usize] {
        &self.index_map
    }

    /// Original 1-based coordinates of the columns removed for missingness.
    pub fn dropped_columns(&self) -> &[usize] {
        &self.dropped
    }

    /// Maps an internal change-point `tau` (last index of the left segment,
    /// `1 <= tau < T`) to the original coordinate of that observation.
    pub fn to_original(&self, tau: usize) -> usize {
        assert!(
            tau >= 1 && tau <= self.len,
            "change-point {tau} outside 1..={}",
            self.len
        );
        self.index_map[tau - 1]
    }

    /// Rescales the sequences to unit noise variance. Returns the scale
    /// applied to each row.
    pub fn standardize(&mut self, how: Standardize) -> Result<Vec<f64>> {
        let scales = match how {
            Standardize::None => vec![1.0; self.n_seq],
            Standardize::Known(sigma) => {
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(SegError::invalid(format!(
                        "sigma must be positive and finite, got {sigma}"
                    )));
                }
                vec![sigma; self.n_seq]
            }
            Standardize::DifferenceBased => (0..self.n_seq)
                .map(|n| {
                    let var = difference_variance(self.row(n));
                    if var > 0.0 {
                        Ok(var.sqrt())
                    } else {
                        Err(SegError::ZeroVariance(format!(
                            "sequence {} has constant first differences",
                            n + 1
                        )))
                    }
                })
                .collect::<Result<_>>()?,
        };
        for (row, &s) in self.values.chunks_exact_mut(self.len).zip(&scales) {
            row.iter_mut().for_each(|v| *v /= s);
        }
        Ok(scales)
    }

    /// Copy of this panel with each row replaced by `f(row_index, row)`.
    pub fn map_rows(&self, mut f: impl FnMut(usize, &mut [f64])) -> Self {
        let mut out = self.clone();
        for (n, row) in out.values.chunks_exact_mut(self.len).enumerate() {
            f(n, row);
        }
        out
    }
}

/// Builds a panel from a raw `N x T` matrix where `None` (or NaN) marks a
/// missing observation. Any column with a missing entry is dropped.
pub fn build_panel(raw: &[Vec<Option<f64>>]) -> Result<SequencePanel> {
    let n_seq = raw.len();
    if n_seq == 0 {
        return Err(SegError::invalid("empty matrix: no sequences"));
    }
    let width = raw[0].len();
    if width == 0 {
        return Err(SegError::invalid("empty matrix: zero-length sequences"));
    }
    if let Some((i, row)) = raw.iter().enumerate().find(|(_, r)| r.len() != width) {
        return Err(SegError::invalid(format!(
            "ragged rows: sequence {} has {} entries, expected {width}",
            i + 1,
            row.len()
        )));
    }

    let is_missing = |v: &Option<f64>| v.is_none_or(f64::is_nan);
    let mut index_map = Vec::with_capacity(width);
    let mut dropped = Vec::new();
    for col in 0..width {
        let mut missing = false;
        for row in raw {
            let v = &row[col];
            if is_missing(v) {
                missing = true;
            } else if let Some(x) = v.filter(|x| x.is_infinite()) {
                return Err(SegError::NonFinite {
                    position: col + 1,
                    value: x,
                });
            }
        }
        if missing {
            dropped.push(col + 1);
        } else {
            index_map.push(col + 1);
        }
    }

    let len = index_map.len();
    if len < 2 {
        return Err(SegError::invalid(format!(
            "only {len} column(s) survive missing-value removal; need at least 2"
        )));
    }
    let mut values = Vec::with_capacity(n_seq * len);
    for row in raw {
        values.extend(index_map.iter().map(|&c| row[c - 1].unwrap()));
    }
    Ok(SequencePanel {
        values,
        n_seq,
        len,
        index_map,
        dropped,
    })
}

/// Half the sample variance of first differences; estimates the noise
/// variance of a piecewise-constant signal plus white noise.
pub fn difference_variance(values: &[f64]) -> f64 {
    if values.len() < 3 {
        return 0.0;
    }
    half_sample_variance(values.windows(2).map(|w| w[1] - w[0]))
}

pub(crate) fn half_sample_variance(diffs: impl Iterator<Item = f64> + Clone) -> f64 {
    let (count, sum) = diffs
        .clone()
        .fold((0usize, 0.0), |(c, s), d| (c + 1, s + d));
    if count < 2 {
        return 0.0;
    }
    let mean = sum / count as f64;
    let ss: f64 = diffs.map(|d| (d - mean) * (d - mean)).sum();
    0.5 * ss / (count - 1) as f64
}
