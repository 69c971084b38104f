// SPDX-License-Identifier: MIT OR Apache-2.0

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::{interval_hit, ScenarioSpec};
use crate::calibrate::ThresholdPolicy;
use crate::detect::Detector;
use crate::error::{Result, SegError};
use crate::seqcore::Standardize;

/// Segmentation method under evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub detector: Detector,
    pub policy: ThresholdPolicy,
}

/// What one replicate produced, measured against the truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub j_hat: usize,
    /// Exact recovery of each consecutive pair of true change-points.
    pub hits: Vec<bool>,
    /// `sum |tau_hat_j - tau_j|` over raw estimates when `j_hat == J`.
    pub raw_error: Option<usize>,
    /// Same for refined estimates.
    pub refined_error: Option<usize>,
    /// Distance from each true change-point to its nearest estimate,
    /// divided by `T`; empty when nothing was detected.
    pub localization: Vec<f64>,
}

fn paired_error(est: &[usize], truth: &[usize]) -> Option<usize> {
    (est.len() == truth.len()).then(|| est.iter().zip(truth).map(|(&a, &b)| a.abs_diff(b)).sum())
}

impl ReplicateOutcome {
    pub fn evaluate(
        raw: &[usize],
        refined: &[usize],
        scored: &[usize],
        truth: &[usize],
        len: usize,
    ) -> Self {
        let hits = truth
            .chunks_exact(2)
            .map(|p| interval_hit((p[0], p[1]), scored))
            .collect();
        let localization = if scored.is_empty() {
            Vec::new()
        } else {
            truth
                .iter()
                .map(|&tau| {
                    let d = scored.iter().map(|&t| t.abs_diff(tau)).min().unwrap_or(0);
                    d as f64 / len as f64
                })
                .collect()
        };
        Self {
            j_hat: scored.len(),
            hits,
            raw_error: paired_error(raw, truth),
            refined_error: paired_error(refined, truth),
            localization,
        }
    }
}

/// Benchmark summary with Monte Carlo standard errors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    pub n_reps: usize,
    pub true_j: usize,
    /// Mean of `J_hat - J`.
    pub j_bias: f64,
    pub j_bias_se: f64,
    /// Fraction of replicates with `J_hat == J`.
    pub exact_j: f64,
    /// Probability of recovering each true interval exactly.
    pub interval_hits: Vec<f64>,
    pub interval_hits_se: Vec<f64>,
    /// Mean over replicates and true change-points of the scaled distance
    /// to the nearest estimate (replicates with at least one detection).
    pub localization_mean: f64,
    /// Mean over replicates of the largest such distance.
    pub localization_max: f64,
}

fn mean_se(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let nf = n as f64;
    let mean = xs.clone().sum::<f64>() / nf;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    (mean, (var / nf).sqrt())
}

impl DetectionMetrics {
    pub fn from_outcomes(outcomes: &[ReplicateOutcome], true_j: usize) -> Self {
        let n_pairs = outcomes.first().map_or(0, |o| o.hits.len());
        let (j_bias, j_bias_se) = mean_se(outcomes.iter().map(|o| o.j_hat as f64 - true_j as f64));
        let (interval_hits, interval_hits_se) = (0..n_pairs)
            .map(|i| mean_se(outcomes.iter().map(move |o| f64::from(u8::from(o.hits[i])))))
            .unzip();
        let located = outcomes.iter().filter(|o| !o.localization.is_empty());
        let (localization_mean, _) =
            mean_se(located.clone().flat_map(|o| o.localization.iter().copied()));
        let (localization_max, _) =
            mean_se(located.map(|o| o.localization.iter().copied().fold(0.0, f64::max)));
        Self {
            n_reps: outcomes.len(),
            true_j,
            j_bias,
            j_bias_se,
            exact_j: outcomes.iter().filter(|o| o.j_hat == true_j).count() as f64
                / outcomes.len().max(1) as f64,
            interval_hits,
            interval_hits_se,
            localization_mean,
            localization_max,
        }
    }

    /// Column names matching [`DetectionMetrics::table_row`].
    pub fn table_header(&self) -> Vec<String> {
        let mut h = vec![
            "method".to_string(),
            "n_reps".into(),
            "j_bias".into(),
            "j_bias_se".into(),
        ];
        for i in 1..=self.interval_hits.len() {
            h.push(format!("p_i{i}"));
            h.push(format!("p_i{i}_se"));
        }
        h.extend(["exact_j".into(), "loc_mean".into(), "loc_max".into()]);
        h
    }

    pub fn table_row(&self, method: &str) -> Vec<String> {
        let mut r = vec![
            method.to_string(),
            self.n_reps.to_string(),
            format!("{:.4}", self.j_bias),
            format!("{:.4}", self.j_bias_se),
        ];
        for (p, se) in self.interval_hits.iter().zip(&self.interval_hits_se) {
            r.push(format!("{p:.4}"));
            r.push(format!("{se:.4}"));
        }
        r.push(format!("{:.4}", self.exact_j));
        r.push(format!("{:.6}", self.localization_mean));
        r.push(format!("{:.6}", self.localization_max));
        r
    }
}

/// Per-replicate outcomes, in replicate order. Each replicate is drawn from
/// its own seeded stream and divided by the scenario's `sigma` before
/// segmentation. Intervals are scored on refined estimates when the
/// detector refines, raw estimates otherwise.
pub fn run_replicates(
    spec: &ScenarioSpec,
    method: &MethodConfig,
    n_reps: usize,
    seed: u64,
) -> Result<Vec<ReplicateOutcome>> {
    if n_reps == 0 {
        return Err(SegError::invalid("benchmark needs at least one replicate"));
    }
    spec.validate()?;
    let grid = method.detector.grid(spec.len)?;
    (0..n_reps as u64)
        .into_par_iter()
        .map(|i| {
            let sim = spec.replicate(seed, i)?;
            let mut panel = sim.panel;
            panel.standardize(Standardize::Known(spec.sigma))?;
            let source = method.detector.source(&panel)?;
            let res = method
                .detector
                .segment_source(&source, grid.as_ref(), &method.policy)?;
            let scored = res.change_points(method.detector.refine.is_some());
            Ok(ReplicateOutcome::evaluate(
                &res.raw,
                &res.refined,
                scored,
                &sim.truth,
                spec.len,
            ))
        })
        .collect()
}

/// Monte Carlo evaluation of a method on a scenario.
pub fn run_benchmark(
    spec: &ScenarioSpec,
    method: &MethodConfig,
    n_reps: usize,
    seed: u64,
) -> Result<DetectionMetrics> {
    let outcomes = run_replicates(spec, method, n_reps, seed)?;
    Ok(DetectionMetrics::from_outcomes(
        &outcomes,
        spec.truth().len(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panelstat::StatKind;
    use crate::simlab::example1_spec;

    #[test]
    fn outcome_bookkeeping() {
        let truth = [48, 50, 146, 151];
        let o = ReplicateOutcome::evaluate(
            &[47, 50, 146, 151],
            &[48, 50, 146, 151],
            &[48, 50, 146, 151],
            &truth,
            500,
        );
        assert_eq!(o.hits, vec![true, true]);
        assert_eq!(o.raw_error, Some(1));
        assert_eq!(o.refined_error, Some(0));
        assert_eq!(o.localization, vec![0.0; 4]);
        let o = ReplicateOutcome::evaluate(&[100], &[100], &[100], &truth, 500);
        assert_eq!(o.raw_error, None);
        assert_eq!(o.localization[0], 52.0 / 500.0);
    }

    #[test]
    fn metrics_summary() {
        let a = ReplicateOutcome::evaluate(&[1, 3], &[1, 3], &[1, 3], &[1, 3], 10);
        let b = ReplicateOutcome::evaluate(&[], &[], &[], &[1, 3], 10);
        let m = DetectionMetrics::from_outcomes(&[a, b], 2);
        assert_eq!(m.j_bias, -1.0);
        assert_eq!(m.interval_hits, vec![0.5]);
        assert_eq!(m.exact_j, 0.5);
        assert_eq!(m.table_header().len(), m.table_row("x").len());
    }

    #[test]
    fn benchmark_is_reproducible() {
        let spec = example1_spec(0);
        let method = MethodConfig {
            detector: Detector::reverse(StatKind::Single),
            policy: ThresholdPolicy::Calibrated { c: 4.0 },
        };
        let a = run_replicates(&spec, &method, 8, 5).unwrap();
        let b = run_replicates(&spec, &method, 8, 5).unwrap();
        assert_eq!(a, b);
        assert!(run_benchmark(&spec, &method, 0, 5).is_err());
    }
}
