// SPDX-License-Identifier: MIT OR Apache-2.0

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::calibrate::replicate_rng;
use crate::error::{Result, SegError};
use crate::seqcore::SequencePanel;

/// Closed 1-based interval `[start, end]` on which the mean equals `level`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanSegment {
    pub start: usize,
    pub end: usize,
    pub level: f64,
}

/// Piecewise-constant means plus Gaussian noise. Outside its listed
/// segments a sequence has mean zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub len: usize,
    pub n_seq: usize,
    pub sigma: f64,
    /// One list of segments per sequence.
    pub mean_spec: Vec<Vec<MeanSegment>>,
    pub seed: u64,
}

/// One draw from a scenario together with its truth.
#[derive(Clone, Debug)]
pub struct Simulated {
    pub panel: SequencePanel,
    /// Change-points of the mean, union over sequences, ascending.
    pub truth: Vec<usize>,
    pub sigma: f64,
}

/// Intervals of the first benchmark signal, in observation coordinates.
pub const EXAMPLE1_INTERVALS: [(usize, usize); 5] =
    [(49, 50), (147, 151), (245, 254), (340, 349), (430, 469)];
pub const EXAMPLE1_LEN: usize = 500;
pub const EXAMPLE1_SIGMA: f64 = 0.25;

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.len < 2 || self.n_seq == 0 {
            return Err(SegError::invalid("scenario needs T >= 2 and N >= 1"));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(SegError::invalid(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.mean_spec.len() != self.n_seq {
            return Err(SegError::invalid(format!(
                "mean specification has {} rows for {} sequences",
                self.mean_spec.len(),
                self.n_seq
            )));
        }
        for (n, segs) in self.mean_spec.iter().enumerate() {
            let mut sorted = segs.clone();
            sorted.sort_by_key(|s| s.start);
            for s in &sorted {
                if s.start < 1 || s.end < s.start || s.end > self.len || !s.level.is_finite() {
                    return Err(SegError::invalid(format!(
                        "sequence {}: bad interval [{}, {}]",
                        n + 1,
                        s.start,
                        s.end
                    )));
                }
            }
            if sorted.windows(2).any(|p| p[1].start <= p[0].end) {
                return Err(SegError::invalid(format!(
                    "sequence {}: overlapping intervals",
                    n + 1
                )));
            }
        }
        Ok(())
    }

    /// Mean of sequence `n` at every location.
    pub fn mean_row(&self, n: usize) -> Vec<f64> {
        let mut mu = vec![0.0; self.len];
        for s in &self.mean_spec[n] {
            mu[s.start - 1..s.end].iter_mut().for_each(|m| *m = s.level);
        }
        mu
    }

    /// Change-points `tau` with `mu[tau] != mu[tau + 1]`, over all sequences.
    pub fn truth(&self) -> Vec<usize> {
        let mut cps: Vec<usize> = (0..self.n_seq)
            .flat_map(|n| {
                let mu = self.mean_row(n);
                (1..self.len)
                    .filter(move |&t| mu[t - 1] != mu[t])
                    .collect::<Vec<_>>()
            })
            .collect();
        cps.sort_unstable();
        cps.dedup();
        cps
    }

    /// Noise-free panel.
    pub fn noiseless(&self) -> Result<Simulated> {
        self.validate()?;
        let rows: Vec<Vec<f64>> = (0..self.n_seq).map(|n| self.mean_row(n)).collect();
        Ok(Simulated {
            panel: SequencePanel::from_rows(&rows)?,
            truth: self.truth(),
            sigma: self.sigma,
        })
    }

    /// Draws a panel using `rng`; values are on the original scale.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Result<Simulated> {
        self.validate()?;
        let rows: Vec<Vec<f64>> = (0..self.n_seq)
            .map(|n| {
                self.mean_row(n)
                    .into_iter()
                    .map(|m| {
                        let e: f64 = StandardNormal.sample(rng);
                        m + self.sigma * e
                    })
                    .collect()
            })
            .collect();
        Ok(Simulated {
            panel: SequencePanel::from_rows(&rows)?,
            truth: self.truth(),
            sigma: self.sigma,
        })
    }

    /// Draw number `replicate` of a run seeded with `seed`.
    pub fn replicate(&self, seed: u64, replicate: u64) -> Result<Simulated> {
        self.sample(&mut replicate_rng(seed, replicate))
    }
}

/// Scenario of the first benchmark: `T = 500`, `sigma = 0.25`, mean one on
/// five intervals of lengths 2, 5, 10, 10 and 40.
pub fn example1_spec(seed: u64) -> ScenarioSpec {
    ScenarioSpec {
        len: EXAMPLE1_LEN,
        n_seq: 1,
        sigma: EXAMPLE1_SIGMA,
        mean_spec: vec![EXAMPLE1_INTERVALS
            .iter()
            .map(|&(start, end)| MeanSegment {
                start,
                end,
                level: 1.0,
            })
            .collect()],
        seed,
    }
}

/// One draw of the first benchmark signal.
pub fn make_example1(seed: u64) -> Simulated {
    example1_spec(seed)
        .replicate(seed, 0)
        .expect("built-in scenario is valid")
}

/// Whether the estimate recovers the interval bounded by the change-points
/// `pair` exactly: both endpoints present and nothing strictly between.
pub fn interval_hit(pair: (usize, usize), estimate: &[usize]) -> bool {
    let (a, b) = pair;
    estimate.contains(&a) && estimate.contains(&b) && !estimate.iter().any(|&t| t > a && t < b)
}
