// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::StatSource;
use crate::error::SegError;
use crate::seqcore::WindowPair;

/// Search range for relocating the `j`-th change-point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefineRange {
    /// `(refined_{j-1}, raw_{j+1})`.
    #[default]
    Wide,
    /// `(refined_{j-1}, raw_j)`; keeps `raw_j` when the range is empty.
    Narrow,
}

impl FromStr for RefineRange {
    type Err = SegError;

    fn from_str(s: &str) -> Result<Self, SegError> {
        match s {
            "wide" => Ok(Self::Wide),
            "narrow" => Ok(Self::Narrow),
            other => Err(SegError::invalid(format!(
                "unknown refinement range '{other}'"
            ))),
        }
    }
}

impl fmt::Display for RefineRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Wide => "wide",
            Self::Narrow => "narrow",
        })
    }
}

/// Relocates each change-point to the maximizer of
/// `X(t, raw_{j+1} - t, t - refined_{j-1})`, sweeping `j` upwards with
/// `refined_0 = 0` and `raw_{J+1} = T`. Ties favour the raw location, then
/// the smaller `t`.
pub fn refine<S: StatSource>(raw: &[usize], source: &S, range: RefineRange) -> Vec<usize> {
    let len = source.len();
    let mut refined = Vec::with_capacity(raw.len());
    let mut prev = 0usize;
    for (j, &tau) in raw.iter().enumerate() {
        let next = raw.get(j + 1).copied().unwrap_or(len);
        let upper = match range {
            RefineRange::Wide => next,
            RefineRange::Narrow => tau,
        };
        let mut best = tau;
        let mut best_x = f64::NEG_INFINITY;
        if (prev + 1..upper).contains(&tau) {
            best_x = source.stat(
                tau,
                WindowPair {
                    k: next - tau,
                    l: tau - prev,
                },
            );
        }
        for t in prev + 1..upper {
            if t == tau {
                continue;
            }
            let x = source.stat(
                t,
                WindowPair {
                    k: next - t,
                    l: t - prev,
                },
            );
            if x > best_x {
                best = t;
                best_x = x;
            }
        }
        refined.push(best);
        prev = best;
    }
    refined
}
