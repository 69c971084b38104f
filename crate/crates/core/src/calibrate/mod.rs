// SPDX-License-Identifier: MIT OR Apache-2.0

//! Threshold formulas and Monte Carlo threshold calibration.
//!
//! Calibration simulates a pool of null replicates once and records, for
//! each, the largest threshold constant that would still produce a
//! detection. Any candidate constant can then be checked against the pool
//! without re-simulating.

mod policy;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use policy::{lambda, TableEntry, ThresholdPolicy, ThresholdShape};

use crate::detect::{Algorithm, Detector};
use crate::error::{Result, SegError};
use crate::panelstat::StatKind;
use crate::seqcore::SequencePanel;

/// Generator for replicate `index` of a run seeded with `seed`. Each
/// replicate draws from its own ChaCha stream, so results do not depend on
/// how replicates are scheduled across threads.
pub fn replicate_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Panel of i.i.d. standard normal observations.
pub fn null_panel(n_seq: usize, len: usize, rng: &mut ChaCha8Rng) -> SequencePanel {
    let rows: Vec<Vec<f64>> = (0..n_seq)
        .map(|_| (0..len).map(|_| StandardNormal.sample(rng)).collect())
        .collect();
    SequencePanel::from_rows(&rows).expect("null panel is well formed")
}

/// How the null replicates were produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NullModel {
    /// Independent standard normal panels.
    Gaussian,
    /// Within-sequence permutations of an observed panel.
    Permutation,
}

/// A calibrated threshold together with everything needed to reproduce it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub policy: ThresholdPolicy,
    pub null_model: NullModel,
    pub algorithm: Algorithm,
    pub stat: StatKind,
    pub shape: ThresholdShape,
    pub len: usize,
    pub n_seq: usize,
    pub r: f64,
    pub h: f64,
    pub alpha: f64,
    pub n_mc: usize,
    pub seed: u64,
    /// Per-replicate null statistics, in replicate order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pool: Vec<f64>,
}

impl Calibration {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| SegError::invalid(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| SegError::invalid(format!("calibration file: {e}")))
    }

    /// Fraction of pooled replicates that detect at threshold constant `c`.
    pub fn pool_rate(&self, c: f64) -> f64 {
        detection_rate(&self.pool, c)
    }
}

/// Fraction of null statistics at or above `c`.
pub fn detection_rate(pool: &[f64], c: f64) -> f64 {
    if pool.is_empty() {
        return 0.0;
    }
    pool.iter().filter(|&&m| m >= c).count() as f64 / pool.len() as f64
}

/// Smallest constant `c` whose pooled detection rate is at most `alpha`.
///
/// The rate is a step function of `c` that only changes at pool values, so
/// the answer is found from one sort rather than by re-simulating for each
/// trial constant. With `alpha = 1` the pool minimum is returned and every
/// replicate detects.
pub fn threshold_from_pool(pool: &[f64], alpha: f64) -> Result<f64> {
    if pool.is_empty() {
        return Err(SegError::invalid("empty calibration pool"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(SegError::invalid(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    let mut sorted = pool.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let allowed = ((alpha * n as f64) + 1e-9).floor() as usize;
    // the smallest c with at most `allowed` pool values >= c sits one ulp
    // above the (allowed + 1)-th largest value
    let c = if allowed >= n {
        sorted[0]
    } else {
        sorted[n - 1 - allowed].next_up()
    };
    if !c.is_finite() {
        return Err(SegError::Unreachable {
            alpha,
            reason: format!("calibrated constant is {c}; the grid yields no usable statistic"),
        });
    }
    Ok(c)
}

/// Inputs of a Gaussian-null calibration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullSpec {
    pub len: usize,
    pub n_seq: usize,
    pub detector: Detector,
    /// Threshold family to calibrate (local only; reverse uses a flat `c`).
    pub shape: ThresholdShape,
    pub alpha: f64,
    pub n_mc: usize,
    pub seed: u64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(SegError::invalid(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    Ok(())
}

fn effective_shape(detector: &Detector, shape: ThresholdShape) -> ThresholdShape {
    match detector.algorithm {
        Algorithm::Local => shape,
        Algorithm::Reverse => ThresholdShape::Flat,
    }
}

/// Null statistics of `n_mc` Gaussian replicates, in replicate order.
pub fn null_pool(spec: &NullSpec) -> Result<Vec<f64>> {
    let shape = effective_shape(&spec.detector, spec.shape);
    let grid = spec.detector.grid(spec.len)?;
    (0..spec.n_mc as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(spec.seed, i);
            let panel = null_panel(spec.n_seq, spec.len, &mut rng);
            let source = spec.detector.source(&panel)?;
            spec.detector.null_statistic(&source, grid.as_ref(), shape)
        })
        .collect()
}

/// Calibrates the threshold constant so that the probability of any
/// detection on Gaussian null data is at most `alpha`.
pub fn calibrate_null(spec: &NullSpec) -> Result<Calibration> {
    if spec.n_mc < 100 {
        return Err(SegError::invalid(format!(
            "calibration needs at least 100 replicates, got {}",
            spec.n_mc
        )));
    }
    check_alpha(spec.alpha)?;
    if spec.len < 2 || spec.n_seq == 0 {
        return Err(SegError::invalid("calibration needs T >= 2 and N >= 1"));
    }
    let pool = null_pool(spec)?;
    let shape = effective_shape(&spec.detector, spec.shape);
    let c = threshold_from_pool(&pool, spec.alpha)?;
    Ok(Calibration {
        policy: shape.with_constant(c),
        null_model: NullModel::Gaussian,
        algorithm: spec.detector.algorithm,
        stat: spec.detector.stat,
        shape,
        len: spec.len,
        n_seq: spec.n_seq,
        r: spec.detector.r,
        h: spec.detector.h,
        alpha: spec.alpha,
        n_mc: spec.n_mc,
        seed: spec.seed,
        pool,
    })
}

/// Calibrates on within-sequence permutations of an observed panel: each
/// replicate shuffles every sequence independently, destroying change-point
/// structure while keeping each sequence's values. The threshold is the
/// `ceil((1 - alpha) n_perm)`-th smallest replicate statistic.
pub fn calibrate_permutation(
    panel: &SequencePanel,
    detector: &Detector,
    shape: ThresholdShape,
    alpha: f64,
    n_perm: usize,
    seed: u64,
) -> Result<Calibration> {
    if panel.len() < 10 {
        return Err(SegError::invalid(format!(
            "permutation calibration needs T >= 10, got {}",
            panel.len()
        )));
    }
    if n_perm < 100 {
        return Err(SegError::invalid(format!(
            "permutation calibration needs at least 100 replicates, got {n_perm}"
        )));
    }
    check_alpha(alpha)?;
    let shape = effective_shape(detector, shape);
    let grid = detector.grid(panel.len())?;
    let pool: Vec<f64> = (0..n_perm as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(seed, i);
            let shuffled = panel.map_rows(|_, row| row.shuffle(&mut rng));
            let source = detector.source(&shuffled)?;
            detector.null_statistic(&source, grid.as_ref(), shape)
        })
        .collect::<Result<_>>()?;

    let mut sorted = pool.clone();
    sorted.sort_by(f64::total_cmp);
    let rank = (((1.0 - alpha) * n_perm as f64) - 1e-9).ceil().max(1.0) as usize;
    let c = sorted[rank.min(n_perm) - 1];
    if !c.is_finite() {
        return Err(SegError::Unreachable {
            alpha,
            reason: "permutation statistics are not finite".into(),
        });
    }
    Ok(Calibration {
        policy: shape.with_constant(c),
        null_model: NullModel::Permutation,
        algorithm: detector.algorithm,
        stat: detector.stat,
        shape,
        len: panel.len(),
        n_seq: panel.n_seq(),
        r: detector.r,
        h: detector.h,
        alpha,
        n_mc: n_perm,
        seed,
        pool,
    })
}
