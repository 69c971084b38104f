// SPDX-License-Identifier: MIT OR Apache-2.0

//! Change-point detection for one or many aligned sequences using local
//! two-window statistics.
//!
//! Two algorithms are provided. Local segmentation scans a geometric grid
//! of window pairs from the smallest scale up and admits exceedances that
//! do not conflict with earlier ones. Reverse segmentation starts with every
//! location as a change-point and deletes the weakest one at a time. Either
//! can be driven by a single sequence, a pooled panel statistic (higher
//! criticism, Berk-Jones, or a sparse-mixture score), or the two-channel
//! allele-specific statistic.
//!
//! ```
//! use segscan_core::{Detector, SequencePanel, StatKind, ThresholdPolicy};
//!
//! let mut y = vec![0.0; 40];
//! y.extend(vec![3.0; 40]);
//! let panel = SequencePanel::single(&y).unwrap();
//! let result = Detector::local(StatKind::Single)
//!     .segment(&panel, &ThresholdPolicy::Constant { c: 0.0 })
//!     .unwrap();
//! assert_eq!(result.refined, vec![40]);
//! ```

#![forbid(unsafe_code)]

pub mod ascn;
pub mod calibrate;
pub mod detect;
pub mod error;
pub mod oracle;
pub mod panelstat;
pub mod segment;
pub mod seqcore;
pub mod simlab;

pub use calibrate::{Calibration, ThresholdPolicy, ThresholdShape};
pub use detect::{Algorithm, Detector};
pub use error::{Result, SegError};
pub use panelstat::{AlleleModelParams, PanelSource, StatKind};
pub use segment::{Admission, RefineRange, SegmentationResult, StatSource};
pub use seqcore::{SequencePanel, Standardize, WindowGrid, WindowPair};
