// SPDX-License-Identifier: MIT OR Apache-2.0

use serde::{Deserialize, Serialize};

use super::scenario::{MeanSegment, ScenarioSpec, Simulated};
use crate::error::{Result, SegError};

/// Asymptotic detection boundary `rho(beta, zeta)` for sparse shared
/// change-points, defined for `0 <= zeta < 1` and
/// `(1 - zeta) / 2 < beta < 1 - zeta`.
///
/// Below `3 (1 - zeta) / 4` the boundary is `beta - (1 - zeta) / 2`; above it
/// is `(sqrt(1 - zeta) - sqrt(1 - zeta - beta))^2`. The two pieces meet at
/// the branch point. The upper end `beta = 1 - zeta` is accepted.
pub fn detection_boundary(beta: f64, zeta: f64) -> Result<f64> {
    let s = 1.0 - zeta;
    if !(0.0..1.0).contains(&zeta) || !(beta > s / 2.0 && beta <= s) {
        return Err(SegError::invalid(format!(
            "detection boundary undefined at beta = {beta}, zeta = {zeta}"
        )));
    }
    Ok(if beta <= 0.75 * s {
        beta - s / 2.0
    } else {
        (s.sqrt() - (s - beta).max(0.0).sqrt()).powi(2)
    })
}

/// Number of affected sequences, `ceil(N^(1 - beta))`.
pub fn affected_count(n_seq: usize, beta: f64) -> usize {
    ((n_seq as f64).powf(1.0 - beta) - 1e-9).ceil().max(1.0) as usize
}

/// Panel scenario with change-points shared by a sparse subset of sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseScenario {
    pub spec: ScenarioSpec,
    /// 0-based indices of sequences carrying the change-points.
    pub affected: Vec<usize>,
    /// Shared change-points.
    pub change_points: Vec<usize>,
}

/// `n_cp` change-points exactly `d` apart, centred in `1..T`. The first
/// `ceil(N^(1 - beta))` sequences alternate between levels `0` and `delta`
/// at those points; the rest are pure noise. Noise has unit variance.
pub fn sparse_scenario(
    n_seq: usize,
    len: usize,
    beta: f64,
    delta: f64,
    d: usize,
    n_cp: usize,
    seed: u64,
) -> Result<SparseScenario> {
    if !(0.0..1.0).contains(&beta) {
        return Err(SegError::invalid(format!(
            "beta must lie in [0, 1), got {beta}"
        )));
    }
    if n_cp == 0 || n_cp % 2 != 0 {
        return Err(SegError::invalid(format!(
            "need an even, positive number of change-points, got {n_cp}"
        )));
    }
    if d == 0 || d * (n_cp + 1) > len {
        return Err(SegError::invalid(format!(
            "{n_cp} change-points spaced {d} apart do not fit in T = {len}"
        )));
    }
    if n_seq == 0 || !delta.is_finite() {
        return Err(SegError::invalid("need N >= 1 and a finite jump"));
    }
    let first = (len - (n_cp - 1) * d) / 2;
    let change_points: Vec<usize> = (0..n_cp).map(|j| first + j * d).collect();
    let bumps: Vec<MeanSegment> = change_points
        .chunks_exact(2)
        .map(|p| MeanSegment {
            start: p[0] + 1,
            end: p[1],
            level: delta,
        })
        .collect();
    let m = affected_count(n_seq, beta).min(n_seq);
    let mean_spec = (0..n_seq)
        .map(|n| if n < m { bumps.clone() } else { Vec::new() })
        .collect();
    let spec = ScenarioSpec {
        len,
        n_seq,
        sigma: 1.0,
        mean_spec,
        seed,
    };
    spec.validate()?;
    Ok(SparseScenario {
        spec,
        affected: (0..m).collect(),
        change_points,
    })
}

/// One draw of [`sparse_scenario`], using its seed.
pub fn make_sparse_panel(
    n_seq: usize,
    len: usize,
    beta: f64,
    delta: f64,
    d: usize,
    n_cp: usize,
    seed: u64,
) -> Result<(Simulated, SparseScenario)> {
    let sc = sparse_scenario(n_seq, len, beta, delta, d, n_cp, seed)?;
    let sim = sc.spec.replicate(seed, 0)?;
    Ok((sim, sc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_values() {
        assert!((detection_boundary(0.75, 0.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((detection_boundary(1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(detection_boundary(0.4, 0.0).is_err());
        assert!(detection_boundary(0.7, 1.0).is_err());
    }

    #[test]
    fn sparse_geometry() {
        let sc = sparse_scenario(100, 500, 0.4, 1.5, 20, 4, 1).unwrap();
        assert_eq!(sc.affected.len(), 16);
        assert_eq!(sc.change_points, vec![220, 240, 260, 280]);
        assert_eq!(sc.spec.truth(), sc.change_points);
        let dense = sparse_scenario(10, 100, 0.0, 1.0, 10, 2, 1).unwrap();
        assert_eq!(dense.affected.len(), 10);
        assert!(sparse_scenario(10, 100, 0.0, 1.0, 40, 2, 1).is_err());
        assert!(sparse_scenario(10, 100, 0.0, 1.0, 10, 3, 1).is_err());
    }
}
