// SPDX-License-Identifier: MIT OR Apache-2.0

use super::grid::WindowPair;
use super::panel::SequencePanel;
use crate::error::{Result, SegError};

/// Coefficients turning three prefix sums into a window z-score.
///
/// Every statistic in the crate goes through [`WindowCoefs::z`], so the
/// single-sequence and pooled paths agree bit for bit.
#[derive(Clone, Copy, Debug)]
pub struct WindowCoefs {
    inv_k: f64,
    inv_l: f64,
    inv_norm: f64,
}

impl WindowCoefs {
    #[inline]
    pub fn new(w: WindowPair) -> Self {
        let inv_k = 1.0 / w.k as f64;
        let inv_l = 1.0 / w.l as f64;
        Self {
            inv_k,
            inv_l,
            inv_norm: 1.0 / (inv_k + inv_l).sqrt(),
        }
    }

    /// `(mean(t, t+k] - mean(t-l, t]) / sqrt(1/k + 1/l)` from the prefix
    /// sums at `t-l`, `t` and `t+k`.
    #[inline]
    pub fn z(&self, s_left: f64, s_mid: f64, s_right: f64) -> f64 {
        ((s_right - s_mid) * self.inv_k - (s_mid - s_left) * self.inv_l) * self.inv_norm
    }
}

/// Cumulative sums `S_0 = 0, S_t = Y_1 + ... + Y_t` for every sequence of
/// a panel. Stored time-major so the `N` sums at one location are
/// contiguous.
#[derive(Clone, Debug, PartialEq)]
pub struct PrefixSums {
    data: Vec<f64>,
    n_seq: usize,
    len: usize,
}

impl PrefixSums {
    pub fn from_panel(panel: &SequencePanel) -> Self {
        let (n_seq, len) = (panel.n_seq(), panel.len());
        let mut data = vec![0.0; (len + 1) * n_seq];
        for (n, row) in panel.rows().enumerate() {
            let mut acc = 0.0;
            for (t, &y) in row.iter().enumerate() {
                acc += y;
                data[(t + 1) * n_seq + n] = acc;
            }
        }
        Self { data, n_seq, len }
    }

    pub fn from_slice(values: &[f64]) -> Self {
        let mut data = Vec::with_capacity(values.len() + 1);
        data.push(0.0);
        let mut acc = 0.0;
        for &y in values {
            acc += y;
            data.push(acc);
        }
        Self {
            data,
            n_seq: 1,
            len: values.len(),
        }
    }

    pub fn n_seq(&self) -> usize {
        self.n_seq
    }

    /// Sequence length `T`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `S_t` of sequence `n`.
    #[inline]
    pub fn at(&self, n: usize, t: usize) -> f64 {
        self.data[t * self.n_seq + n]
    }

    /// The `N` cumulative sums at location `t`.
    #[inline]
    pub fn column(&self, t: usize) -> &[f64] {
        &self.data[t * self.n_seq..(t + 1) * self.n_seq]
    }

    /// Cumulative sums `S_0..=S_T` of one sequence.
    pub fn cumulative(&self, n: usize) -> Vec<f64> {
        (0..=self.len).map(|t| self.at(n, t)).collect()
    }

    pub fn check_window(&self, t: usize, w: WindowPair) -> Result<()> {
        if w.k == 0 || w.l == 0 || !w.fits(t, self.len) {
            return Err(SegError::WindowOutOfRange {
                t,
                k: w.k,
                l: w.l,
                len: self.len,
            });
        }
        Ok(())
    }

    /// Signed window z-score of sequence `n` without range checks.
    #[inline]
    pub fn z_unchecked(&self, n: usize, t: usize, coefs: &WindowCoefs, w: WindowPair) -> f64 {
        coefs.z(self.at(n, t - w.l), self.at(n, t), self.at(n, t + w.k))
    }

    /// Signed window z-scores of all sequences at `(t, w)` written into `out`.
    #[inline]
    pub fn z_column(&self, t: usize, w: WindowPair, coefs: &WindowCoefs, out: &mut [f64]) {
        let left = self.column(t - w.l);
        let mid = self.column(t);
        let right = self.column(t + w.k);
        for (((o, &a), &b), &c) in out.iter_mut().zip(left).zip(mid).zip(right) {
            *o = coefs.z(a, b, c);
        }
    }

    /// Signed window z-score of sequence `n`.
    pub fn z(&self, n: usize, t: usize, w: WindowPair) -> Result<f64> {
        self.check_window(t, w)?;
        if n >= self.n_seq {
            return Err(SegError::invalid(format!(
                "sequence {n} out of range for a panel of {}",
                self.n_seq
            )));
        }
        Ok(self.z_unchecked(n, t, &WindowCoefs::new(w), w))
    }
}

/// Signed difference of window means of the first sequence, standardized:
/// positive when the right window `(t, t+k]` has the larger mean.
pub fn z_stat(sums: &PrefixSums, t: usize, w: WindowPair) -> Result<f64> {
    sums.z(0, t, w)
}

/// Absolute standardized difference of the window means around `t`.
pub fn local_stat(sums: &PrefixSums, t: usize, w: WindowPair) -> Result<f64> {
    z_stat(sums, t, w).map(f64::abs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wp(k: usize, l: usize) -> WindowPair {
        WindowPair::new(k, l).unwrap()
    }

    #[test]
    fn prefix_sums_invariants() {
        let y = [1.5, -2.0, 0.25, 4.0];
        let s = PrefixSums::from_slice(&y);
        let c = s.cumulative(0);
        assert_eq!(c.len(), 5);
        assert_eq!(c[0], 0.0);
        for t in 1..=4 {
            assert_eq!(c[t] - c[t - 1], y[t - 1]);
        }
    }

    #[test]
    fn step_statistic_is_two() {
        let s = PrefixSums::from_slice(&[0.0, 0.0, 2.0, 2.0]);
        assert_eq!(local_stat(&s, 2, wp(2, 2)).unwrap(), 2.0);
        assert_eq!(z_stat(&s, 2, wp(2, 2)).unwrap(), 2.0);
        let s = PrefixSums::from_slice(&[2.0, 2.0, 0.0, 0.0]);
        assert_eq!(z_stat(&s, 2, wp(2, 2)).unwrap(), -2.0);
    }

    #[test]
    fn constant_sequence_gives_zero() {
        let s = PrefixSums::from_slice(&[3.0; 12]);
        for t in 1..12 {
            assert_eq!(local_stat(&s, t, wp(12 - t, t)).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_windows_out_of_range() {
        let s = PrefixSums::from_slice(&[0.0; 5]);
        assert!(local_stat(&s, 1, wp(1, 2)).is_err());
        assert!(local_stat(&s, 4, wp(2, 1)).is_err());
        assert!(local_stat(&s, 0, wp(1, 1)).is_err());
        assert!(local_stat(&s, 5, wp(1, 1)).is_err());
        assert!(local_stat(&s, 4, wp(1, 4)).is_ok());
    }

    #[test]
    fn panel_layout_matches_single() {
        let rows = vec![vec![1.0, 2.0, 4.0, 8.0], vec![-1.0, 0.5, 0.0, 3.0]];
        let panel = SequencePanel::from_rows(&rows).unwrap();
        let sums = PrefixSums::from_panel(&panel);
        for (n, row) in rows.iter().enumerate() {
            let single = PrefixSums::from_slice(row);
            assert_eq!(sums.cumulative(n), single.cumulative(0));
        }
        let w = wp(2, 1);
        let mut out = [0.0; 2];
        sums.z_column(1, w, &WindowCoefs::new(w), &mut out);
        assert_eq!(out[1], sums.z(1, 1, w).unwrap());
    }
}
