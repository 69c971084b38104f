// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fs;
use std::path::Path;

use serde::Serialize;

use segscan_core::calibrate::{calibrate_null, calibrate_permutation, Calibration, NullSpec};
use segscan_core::{Algorithm, Detector, SequencePanel, StatKind, ThresholdPolicy, ThresholdShape};

use crate::cli::{DetectArgs, ThresholdArg};
use crate::Invalid;

/// The policy used by a run and where it came from.
#[derive(Clone, Debug, Serialize)]
pub struct PolicyInfo {
    pub policy: ThresholdPolicy,
    /// `fixed`, `gaussian`, `permutation`, `file` or `bonferroni`.
    pub origin: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_mc: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
}

impl PolicyInfo {
    pub fn fixed(policy: ThresholdPolicy) -> Self {
        Self {
            policy,
            origin: "fixed",
            alpha: None,
            n_mc: None,
            file: None,
        }
    }

    pub fn from_file(cal: Calibration, path: &Path) -> Self {
        Self {
            alpha: Some(cal.alpha),
            n_mc: Some(cal.n_mc),
            policy: cal.policy,
            origin: "file",
            file: Some(path.display().to_string()),
        }
    }

    /// Flat `c` bounding the summed chi-square tails by `alpha`.
    pub fn bonferroni(c: f64, alpha: f64) -> Self {
        Self {
            policy: ThresholdPolicy::Calibrated { c },
            origin: "bonferroni",
            alpha: Some(alpha),
            n_mc: None,
            file: None,
        }
    }
}

pub fn detector(args: &DetectArgs, stat: StatKind) -> Detector {
    let base = match args.algo {
        Algorithm::Local => Detector::local(stat),
        Algorithm::Reverse => Detector::reverse(stat),
    };
    base.with_grid(args.r, args.h)
        .with_admission(args.admission)
        .with_refine(args.refine())
}

/// Shape calibrated for `threshold`. Reverse segmentation and pooled
/// statistics use one flat constant: the window offsets are on the `|z|`
/// scale and mean nothing to a pooled statistic.
pub fn calibration_shape(
    threshold: &ThresholdArg,
    algo: Algorithm,
    n_seq: usize,
) -> anyhow::Result<ThresholdShape> {
    let shape = match threshold {
        ThresholdArg::Multiscale => ThresholdShape::Multiscale,
        ThresholdArg::Constant => ThresholdShape::Constant,
        other => {
            return Err(Invalid(format!("cannot calibrate a '{other}' threshold")).into());
        }
    };
    Ok(if algo == Algorithm::Reverse || n_seq > 1 {
        ThresholdShape::Flat
    } else {
        shape
    })
}

pub fn load_calibration(path: &Path) -> anyhow::Result<Calibration> {
    let text = fs::read_to_string(path)
        .map_err(|e| Invalid(format!("cannot read {}: {e}", path.display())))?;
    Calibration::from_json(&text).map_err(|e| Invalid(format!("{}: {e}", path.display())).into())
}

fn check_compatible(
    cal: &Calibration,
    det: &Detector,
    panel: &SequencePanel,
) -> anyhow::Result<()> {
    let mut problems = Vec::new();
    if cal.algorithm != det.algorithm {
        problems.push(format!("algorithm {} vs {}", cal.algorithm, det.algorithm));
    }
    if panel.n_seq() > 1 && cal.stat != det.stat {
        problems.push(format!("statistic {} vs {}", cal.stat, det.stat));
    }
    if cal.len != panel.len() || cal.n_seq != panel.n_seq() {
        problems.push(format!(
            "shape {}x{} vs {}x{}",
            cal.n_seq,
            cal.len,
            panel.n_seq(),
            panel.len()
        ));
    }
    if det.algorithm == Algorithm::Local && (cal.r != det.r || cal.h != det.h) {
        problems.push(format!(
            "grid r={} h={} vs r={} h={}",
            cal.r, cal.h, det.r, det.h
        ));
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Invalid(format!(
            "calibration file does not match this run: {}",
            problems.join("; ")
        ))
        .into())
    }
}

/// Resolves the threshold for segmenting `panel` with `det`.
pub fn resolve(
    args: &DetectArgs,
    det: &Detector,
    panel: &SequencePanel,
) -> anyhow::Result<PolicyInfo> {
    match (&args.threshold, args.c) {
        (ThresholdArg::Calibrated(path), _) => {
            let cal = load_calibration(path)?;
            check_compatible(&cal, det, panel)?;
            Ok(PolicyInfo::from_file(cal, path))
        }
        (ThresholdArg::Theorem2, _) => {
            let a = args
                .a
                .ok_or_else(|| Invalid("--threshold theorem2 needs --a".into()))?;
            Ok(PolicyInfo::fixed(ThresholdPolicy::Theorem2 { a }))
        }
        (ThresholdArg::Multiscale, Some(_)) if args.is_reverse() => Err(Invalid(
            "reverse segmentation needs a window-free threshold; use constant or theorem2".into(),
        )
        .into()),
        (ThresholdArg::Multiscale, Some(c)) => {
            Ok(PolicyInfo::fixed(ThresholdPolicy::Multiscale { c }))
        }
        (ThresholdArg::Constant, Some(c)) => Ok(PolicyInfo::fixed(ThresholdPolicy::Constant { c })),
        (threshold, None) => {
            let shape = calibration_shape(threshold, args.algo, panel.n_seq())?;
            let cal = if args.permute {
                calibrate_permutation(panel, det, shape, args.alpha, args.reps, args.seed)?
            } else {
                calibrate_null(&NullSpec {
                    len: panel.len(),
                    n_seq: panel.n_seq(),
                    detector: det.clone(),
                    shape,
                    alpha: args.alpha,
                    n_mc: args.reps,
                    seed: args.seed,
                })?
            };
            log::info!("calibrated threshold: {}", cal.policy);
            Ok(PolicyInfo {
                policy: cal.policy,
                origin: if args.permute {
                    "permutation"
                } else {
                    "gaussian"
                },
                alpha: Some(args.alpha),
                n_mc: Some(args.reps),
                file: None,
            })
        }
    }
}
