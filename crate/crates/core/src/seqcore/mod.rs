// SPDX-License-Identifier: MIT OR Apache-2.0

//! Core data types: aligned sequence panels, prefix sums, window grids and
//! the single-sequence local statistic.

mod grid;
mod normal;
mod panel;
mod prefix;

pub use grid::{build_grid, WindowGrid, WindowPair};
pub use normal::{normal_sf, two_sided_p};
pub(crate) use panel::half_sample_variance;
pub use panel::{build_panel, difference_variance, SequencePanel, Standardize};
pub use prefix::{local_stat, z_stat, PrefixSums, WindowCoefs};

use crate::segment::StatSource;

/// Statistic source for one sequence: `X(t, k, l) = |z|`.
#[derive(Clone, Debug)]
pub struct SingleSource {
    sums: PrefixSums,
}

impl SingleSource {
    pub fn new(values: &[f64]) -> Self {
        Self {
            sums: PrefixSums::from_slice(values),
        }
    }

    pub fn from_sums(sums: PrefixSums) -> Self {
        assert_eq!(sums.n_seq(), 1, "single source needs exactly one sequence");
        Self { sums }
    }

    pub fn sums(&self) -> &PrefixSums {
        &self.sums
    }
}

impl StatSource for SingleSource {
    fn len(&self) -> usize {
        self.sums.len()
    }

    #[inline]
    fn stat(&self, t: usize, w: WindowPair) -> f64 {
        self.sums.z_unchecked(0, t, &WindowCoefs::new(w), w).abs()
    }

    fn sweep(&self, w: WindowPair, out: &mut Vec<f64>) {
        let coefs = WindowCoefs::new(w);
        out.clear();
        out.extend((w.l..=self.len() - w.k).map(|t| self.sums.z_unchecked(0, t, &coefs, w).abs()));
    }
}
