// SPDX-License-Identifier: MIT OR Apache-2.0

//! Fixed inputs shared by the criterion benches.

use segscan_core::calibrate::{null_panel, replicate_rng};
use segscan_core::simlab::make_example1;
use segscan_core::SequencePanel;

/// Standard normal panel of `n_seq` rows of length `len`.
pub fn null_input(n_seq: usize, len: usize) -> SequencePanel {
    null_panel(n_seq, len, &mut replicate_rng(7, 0))
}

/// One replicate of the first benchmark signal.
pub fn example1_input() -> SequencePanel {
    make_example1(7).panel
}
