// SPDX-License-Identifier: MIT OR Apache-2.0

//! Allele-specific segmentation with recursive noise estimation.
//!
//! Variances start from the segmentation-free estimates. Each round
//! segments with the current parameters and refits them on the segments
//! found, until the largest relative change of `s1^2` or `s2^2` falls below
//! the tolerance or the round limit is reached.

use serde::{Deserialize, Serialize};

use crate::calibrate::ThresholdPolicy;
use crate::detect::Detector;
use crate::error::Result;
use crate::panelstat::{estimate_variances, AlleleFit, AlleleSource};
use crate::segment::SegmentationResult;
use crate::seqcore::SequencePanel;

pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_MAX_ROUNDS: usize = 10;

/// Parameters used in one round and the change-points they produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VarianceStep {
    pub round: usize,
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    pub change_points: Vec<usize>,
    /// Largest relative change of the refitted variances.
    pub rel_change: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlleleRun {
    pub result: SegmentationResult,
    /// Final segment-wise fit.
    pub fit: AlleleFit,
    pub trace: Vec<VarianceStep>,
    pub converged: bool,
}

/// Segments `(y, z)` with the allele-specific statistic. `detector.stat`
/// selects the pooling (`hc` or `bj`) when there is more than one
/// individual.
pub fn segment_allele(
    y: &SequencePanel,
    z: &SequencePanel,
    detector: &Detector,
    policy: &ThresholdPolicy,
    tol: f64,
    max_rounds: usize,
) -> Result<AlleleRun> {
    let grid = detector.grid(y.len())?;
    let mut fit = estimate_variances(y, z, None)?;
    let mut trace = Vec::new();
    let mut converged = false;
    let mut result = None;
    for round in 1..=max_rounds.max(1) {
        let source = AlleleSource::new(y, z, fit.params.clone(), detector.stat)?;
        let res = detector.segment_source(&source, grid.as_ref(), policy)?;
        let cps = res.change_points(detector.refine.is_some()).to_vec();
        let next = estimate_variances(y, z, (!cps.is_empty()).then_some(cps.as_slice()))?;
        let rel = |a: f64, b: f64| ((b - a) / a).abs();
        let rel_change = rel(fit.params.sigma1_sq, next.params.sigma1_sq)
            .max(rel(fit.params.sigma2_sq, next.params.sigma2_sq));
        trace.push(VarianceStep {
            round,
            sigma1_sq: fit.params.sigma1_sq,
            sigma2_sq: fit.params.sigma2_sq,
            change_points: cps,
            rel_change,
        });
        fit = next;
        result = Some(res);
        if rel_change < tol {
            converged = true;
            break;
        }
    }
    Ok(AlleleRun {
        result: result.expect("at least one round"),
        fit,
        trace,
        converged,
    })
}
