// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::error::{Result, SegError};
use crate::seqcore::WindowPair;

/// Anything that can evaluate the local statistic `X(t, k, l)` at a
/// location `t` with right window `(t, t+k]` and left window `(t-l, t]`.
///
/// Implementations must be pure: the same arguments always give the same
/// value, bit for bit.
pub trait StatSource: Sync {
    /// Sequence length `T`.
    fn len(&self) -> usize;

    /// `X(t, k, l)`. Callers guarantee `l <= t <= T - k`.
    fn stat(&self, t: usize, w: WindowPair) -> f64;

    /// Writes `X(t, k, l)` for `t = l, ..., T - k` into `out`, in order.
    fn sweep(&self, w: WindowPair, out: &mut Vec<f64>) {
        out.clear();
        out.extend((w.l..=self.len() - w.k).map(|t| self.stat(t, w)));
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Range-checked [`StatSource::stat`].
    fn checked_stat(&self, t: usize, w: WindowPair) -> Result<f64> {
        if w.k == 0 || w.l == 0 || !w.fits(t, self.len()) {
            return Err(SegError::WindowOutOfRange {
                t,
                k: w.k,
                l: w.l,
                len: self.len(),
            });
        }
        Ok(self.stat(t, w))
    }
}

impl<S: StatSource + ?Sized> StatSource for &S {
    fn len(&self) -> usize {
        (**self).len()
    }

    fn stat(&self, t: usize, w: WindowPair) -> f64 {
        (**self).stat(t, w)
    }

    fn sweep(&self, w: WindowPair, out: &mut Vec<f64>) {
        (**self).sweep(w, out)
    }
}

impl<S: StatSource + ?Sized> StatSource for Box<S> {
    fn len(&self) -> usize {
        (**self).len()
    }

    fn stat(&self, t: usize, w: WindowPair) -> f64 {
        (**self).stat(t, w)
    }

    fn sweep(&self, w: WindowPair, out: &mut Vec<f64>) {
        (**self).sweep(w, out)
    }
}
