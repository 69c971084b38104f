// SPDX-License-Identifier: MIT OR Apache-2.0

//! One-stop configuration for running a segmentation end to end.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calibrate::{ThresholdPolicy, ThresholdShape};
use crate::error::{Result, SegError};
use crate::panelstat::{PanelSource, StatKind};
use crate::segment::{
    local_segment, reverse_segment, reverse_trace, Admission, RefineRange, SegmentationResult,
    StatSource,
};
use crate::seqcore::{build_grid, SequencePanel, WindowGrid};

pub const DEFAULT_R: f64 = 1.2;
pub const DEFAULT_H: f64 = 10.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    #[default]
    Local,
    Reverse,
}

impl FromStr for Algorithm {
    type Err = SegError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "local" => Ok(Self::Local),
            "reverse" => Ok(Self::Reverse),
            other => Err(SegError::invalid(format!("unknown algorithm '{other}'"))),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Local => "local",
            Self::Reverse => "reverse",
        })
    }
}

/// Algorithm, statistic and tuning knobs of a segmentation run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detector {
    pub algorithm: Algorithm,
    pub stat: StatKind,
    /// Grid ratio `r` (local only).
    pub r: f64,
    /// Grid aspect bound `h` (local only).
    pub h: f64,
    pub admission: Admission,
    /// `None` disables refinement.
    pub refine: Option<RefineRange>,
}

impl Default for Detector {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Local,
            stat: StatKind::Single,
            r: DEFAULT_R,
            h: DEFAULT_H,
            admission: Admission::Interval,
            refine: Some(RefineRange::Wide),
        }
    }
}

impl Detector {
    pub fn local(stat: StatKind) -> Self {
        Self {
            stat,
            ..Self::default()
        }
    }

    pub fn reverse(stat: StatKind) -> Self {
        Self {
            algorithm: Algorithm::Reverse,
            stat,
            ..Self::default()
        }
    }

    pub fn with_grid(mut self, r: f64, h: f64) -> Self {
        self.r = r;
        self.h = h;
        self
    }

    pub fn with_refine(mut self, refine: Option<RefineRange>) -> Self {
        self.refine = refine;
        self
    }

    pub fn with_admission(mut self, admission: Admission) -> Self {
        self.admission = admission;
        self
    }

    /// Statistic source for `panel`; a single sequence always uses `|z|`.
    pub fn source(&self, panel: &SequencePanel) -> Result<PanelSource> {
        PanelSource::new(panel, self.stat)
    }

    /// Grid for local segmentation of length `len`; `None` for reverse.
    pub fn grid(&self, len: usize) -> Result<Option<WindowGrid>> {
        match self.algorithm {
            Algorithm::Local => build_grid(len, self.r, self.h).map(Some),
            Algorithm::Reverse => Ok(None),
        }
    }

    pub fn segment(
        &self,
        panel: &SequencePanel,
        policy: &ThresholdPolicy,
    ) -> Result<SegmentationResult> {
        let source = self.source(panel)?;
        let grid = self.grid(panel.len())?;
        self.segment_source(&source, grid.as_ref(), policy)
    }

    /// Runs the configured algorithm on any statistic source. `grid` must
    /// be supplied for local segmentation.
    pub fn segment_source<S: StatSource>(
        &self,
        source: &S,
        grid: Option<&WindowGrid>,
        policy: &ThresholdPolicy,
    ) -> Result<SegmentationResult> {
        let mut result = match self.algorithm {
            Algorithm::Local => {
                let grid =
                    grid.ok_or_else(|| SegError::invalid("local segmentation needs a grid"))?;
                local_segment(source, grid, policy, self.admission)?
            }
            Algorithm::Reverse => reverse_segment(source, policy.scalar(source.len())?)?,
        };
        if let Some(range) = self.refine {
            result.refine(source, range);
        }
        Ok(result)
    }

    /// Largest threshold constant at which this source still yields a
    /// detection: anything at or below it detects, anything above does not.
    pub fn null_statistic<S: StatSource>(
        &self,
        source: &S,
        grid: Option<&WindowGrid>,
        shape: ThresholdShape,
    ) -> Result<f64> {
        match self.algorithm {
            Algorithm::Local => {
                let grid =
                    grid.ok_or_else(|| SegError::invalid("local segmentation needs a grid"))?;
                Ok(max_excess(source, grid, shape))
            }
            Algorithm::Reverse => Ok(reverse_trace(source).bottleneck()),
        }
    }
}

/// `max over (t, k, l)` of `X(t, k, l) - offset(k, l)`.
pub fn max_excess<S: StatSource>(source: &S, grid: &WindowGrid, shape: ThresholdShape) -> f64 {
    let len = source.len();
    let mut buf = Vec::with_capacity(len);
    let mut best = f64::NEG_INFINITY;
    for &w in grid.pairs() {
        let offset = shape.offset(w, len);
        source.sweep(w, &mut buf);
        let top = buf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        best = best.max(top - offset);
    }
    best
}
