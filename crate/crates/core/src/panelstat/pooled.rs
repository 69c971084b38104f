// SPDX-License-Identifier: MIT OR Apache-2.0

use std::f64::consts::{FRAC_1_SQRT_2, LN_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SegError};
use crate::segment::StatSource;
use crate::seqcore::{two_sided_p, PrefixSums, SequencePanel, WindowCoefs, WindowPair};

/// Lower clamp for p-values; anything smaller is below double resolution.
pub const P_FLOOR: f64 = 1e-15;

/// Above this value of `z^2 / 4` the score term is evaluated in log space.
const SCORE_EXP_CUTOFF: f64 = 700.0;

/// Which local statistic drives the segmentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StatKind {
    /// `|z|` of a single sequence.
    Single,
    /// Higher criticism over the ordered two-sided p-values.
    Hc,
    /// Berk-Jones over the ordered two-sided p-values.
    Bj,
    /// Sparse-mixture score statistic.
    Score,
}

impl StatKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Single => "single",
            Self::Hc => "hc",
            Self::Bj => "bj",
            Self::Score => "score",
        }
    }
}

impl fmt::Display for StatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StatKind {
    type Err = SegError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "single" => Ok(Self::Single),
            "hc" => Ok(Self::Hc),
            "bj" => Ok(Self::Bj),
            "score" => Ok(Self::Score),
            other => Err(SegError::invalid(format!("unknown statistic '{other}'"))),
        }
    }
}

/// Ascending two-sided p-values `p_(1) <= ... <= p_(N)` at one `(t, k, l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PValueVector(Vec<f64>);

impl PValueVector {
    /// Sorts the given p-values; each must lie in `[0, 1]`.
    pub fn new(mut p: Vec<f64>) -> Result<Self> {
        if let Some((i, &v)) = p
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(SegError::invalid(format!(
                "p-value {v} at position {} is outside [0, 1]",
                i + 1
            )));
        }
        p.sort_by(f64::total_cmp);
        Ok(Self(p))
    }

    /// Two-sided p-values of the given z-scores.
    pub fn from_z(z: &[f64]) -> Result<Self> {
        check_finite(z)?;
        Self::new(z.iter().map(|&v| two_sided_p(v)).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[inline]
fn clamp_p(p: f64) -> f64 {
    p.clamp(P_FLOOR, 1.0 - P_FLOOR)
}

/// `B+(u, p) = u log(u/p) + (1-u) log((1-u)/(1-p))` for `u > p`, else 0.
pub fn b_plus(u: f64, p: f64) -> f64 {
    let p = clamp_p(p);
    if u <= p {
        return 0.0;
    }
    let head = u * (u / p).ln();
    let tail = if u >= 1.0 {
        0.0
    } else {
        (1.0 - u) * ((1.0 - u) / (1.0 - p)).ln()
    };
    (head + tail).max(0.0)
}

/// Higher criticism on the smallest `floor(N/2)` of `N` ascending p-values.
/// `head` may hold just those leading order statistics.
fn hc_head(head: &[f64], n_total: usize) -> f64 {
    let nf = n_total as f64;
    head.iter()
        .take(n_total / 2)
        .enumerate()
        .map(|(i, &p)| {
            let p = clamp_p(p);
            ((i + 1) as f64 - nf * p) / (nf * p * (1.0 - p)).sqrt()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn bj_head(head: &[f64], n_total: usize) -> f64 {
    let nf = n_total as f64;
    let best = head
        .iter()
        .take(n_total / 2)
        .enumerate()
        .map(|(i, &p)| b_plus((i + 1) as f64 / nf, p))
        .fold(0.0, f64::max);
    nf * best
}

pub fn hc_stat(p: &PValueVector) -> Result<f64> {
    require_pooled(p.len())?;
    Ok(hc_head(p.as_slice(), p.len()))
}

pub fn bj_stat(p: &PValueVector) -> Result<f64> {
    require_pooled(p.len())?;
    Ok(bj_head(p.as_slice(), p.len()))
}

fn require_pooled(n: usize) -> Result<()> {
    if n < 2 {
        return Err(SegError::invalid(format!(
            "pooled p-value statistics need N >= 2, got {n}"
        )));
    }
    Ok(())
}

fn check_finite(z: &[f64]) -> Result<()> {
    match z.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(SegError::NonFinite {
            position: i + 1,
            value: z[i],
        }),
        None => Ok(()),
    }
}

/// Weight of the sparse alternative in the score statistic.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreParams {
    p0: f64,
    ln_p0_over_sqrt2: f64,
}

impl ScoreParams {
    /// `p0 = sqrt(log T / N)`.
    pub fn new(len: usize, n_seq: usize) -> Result<Self> {
        if len < 2 || n_seq == 0 {
            return Err(SegError::invalid(format!(
                "score weight needs T >= 2 and N >= 1, got T={len}, N={n_seq}"
            )));
        }
        Self::with_p0(((len as f64).ln() / n_seq as f64).sqrt())
    }

    pub fn with_p0(p0: f64) -> Result<Self> {
        // the log argument at z = 0 is 1 - p0 (1 - 1/sqrt 2)
        if !(p0 > 0.0 && p0 * (1.0 - FRAC_1_SQRT_2) < 1.0) {
            return Err(SegError::invalid(format!(
                "score weight p0={p0} outside (0, {:.4})",
                1.0 / (1.0 - FRAC_1_SQRT_2)
            )));
        }
        if p0 >= 1.0 {
            log::warn!("score weight p0={p0:.3} >= 1: too few sequences for the sequence length");
        }
        Ok(Self {
            p0,
            ln_p0_over_sqrt2: p0.ln() - 0.5 * LN_2,
        })
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    /// `g(z) = log(1 + p0 (exp(z^2/4)/sqrt 2 - 1))`.
    #[inline]
    pub fn term(&self, z: f64) -> f64 {
        let u = 0.25 * z * z;
        if u > SCORE_EXP_CUTOFF {
            let rest = (1.0 - self.p0) * (-u - self.ln_p0_over_sqrt2).exp();
            u + self.ln_p0_over_sqrt2 + rest.ln_1p()
        } else {
            (self.p0 * (u.exp() * FRAC_1_SQRT_2 - 1.0)).ln_1p()
        }
    }
}

pub fn score_stat(z: &[f64], params: &ScoreParams) -> Result<f64> {
    if z.is_empty() {
        return Err(SegError::invalid(
            "score statistic needs at least one z-score",
        ));
    }
    check_finite(z)?;
    Ok(z.iter().map(|&v| params.term(v)).sum())
}

/// Pooled statistic over the z-scores of all sequences at one window.
#[derive(Clone, Copy, Debug)]
enum Pooling {
    Abs,
    Hc,
    Bj,
    Score(ScoreParams),
}

impl Pooling {
    /// Evaluates the statistic; `z` is scratch and is reordered.
    #[inline]
    fn eval(&self, z: &mut [f64], head: &mut Vec<f64>) -> f64 {
        match self {
            Self::Abs => z[0].abs(),
            Self::Score(params) => z.iter().map(|&v| params.term(v)).sum(),
            Self::Hc | Self::Bj => {
                let n = z.len();
                let m = n / 2;
                for v in z.iter_mut() {
                    *v = v.abs();
                }
                // largest |z| first is smallest p first
                if m < n {
                    z.select_nth_unstable_by(m, |a, b| b.total_cmp(a));
                }
                let lead = &mut z[..m];
                lead.sort_unstable_by(|a, b| b.total_cmp(a));
                head.clear();
                head.extend(lead.iter().map(|&a| two_sided_p(a)));
                if matches!(self, Self::Hc) {
                    hc_head(head, n)
                } else {
                    bj_head(head, n)
                }
            }
        }
    }
}

/// Statistic source pooling all sequences of a panel.
///
/// With a single sequence the pooling is bypassed and the source reduces to
/// `|z|`, whatever the requested kind.
#[derive(Clone, Debug)]
pub struct PanelSource {
    sums: PrefixSums,
    kind: StatKind,
    pooling: Pooling,
}

impl PanelSource {
    pub fn new(panel: &SequencePanel, kind: StatKind) -> Result<Self> {
        Self::from_sums(PrefixSums::from_panel(panel), kind)
    }

    pub fn from_sums(sums: PrefixSums, kind: StatKind) -> Result<Self> {
        let n = sums.n_seq();
        let pooling = match (kind, n) {
            (_, 1) => Pooling::Abs,
            (StatKind::Single, _) => {
                return Err(SegError::invalid(format!(
                    "statistic 'single' needs one sequence, panel has {n}"
                )))
            }
            (StatKind::Hc, _) => Pooling::Hc,
            (StatKind::Bj, _) => Pooling::Bj,
            (StatKind::Score, _) => Pooling::Score(ScoreParams::new(sums.len(), n)?),
        };
        Ok(Self {
            sums,
            kind,
            pooling,
        })
    }

    pub fn kind(&self) -> StatKind {
        self.kind
    }

    pub fn n_seq(&self) -> usize {
        self.sums.n_seq()
    }

    pub fn sums(&self) -> &PrefixSums {
        &self.sums
    }

    /// Signed per-sequence z-scores at `(t, w)`.
    pub fn z_scores(&self, t: usize, w: WindowPair) -> Result<Vec<f64>> {
        self.sums.check_window(t, w)?;
        let mut z = vec![0.0; self.n_seq()];
        self.sums.z_column(t, w, &WindowCoefs::new(w), &mut z);
        Ok(z)
    }

    /// The `count` sequences with the largest `|z|` at `(t, w)`, as
    /// `(sequence index, z)` pairs in decreasing `|z|`.
    pub fn top_contributors(
        &self,
        t: usize,
        w: WindowPair,
        count: usize,
    ) -> Result<Vec<(usize, f64)>> {
        let z = self.z_scores(t, w)?;
        let mut idx: Vec<usize> = (0..z.len()).collect();
        idx.sort_by(|&a, &b| z[b].abs().total_cmp(&z[a].abs()).then(a.cmp(&b)));
        Ok(idx.into_iter().take(count).map(|i| (i, z[i])).collect())
    }
}

impl StatSource for PanelSource {
    fn len(&self) -> usize {
        self.sums.len()
    }

    fn stat(&self, t: usize, w: WindowPair) -> f64 {
        let coefs = WindowCoefs::new(w);
        if let Pooling::Abs = self.pooling {
            return self.sums.z_unchecked(0, t, &coefs, w).abs();
        }
        let mut z = vec![0.0; self.n_seq()];
        let mut head = Vec::with_capacity(self.n_seq() / 2);
        self.sums.z_column(t, w, &coefs, &mut z);
        self.pooling.eval(&mut z, &mut head)
    }

    fn sweep(&self, w: WindowPair, out: &mut Vec<f64>) {
        let coefs = WindowCoefs::new(w);
        out.clear();
        let range = w.l..=self.len() - w.k;
        if let Pooling::Abs = self.pooling {
            out.extend(range.map(|t| self.sums.z_unchecked(0, t, &coefs, w).abs()));
            return;
        }
        let mut z = vec![0.0; self.n_seq()];
        let mut head = Vec::with_capacity(self.n_seq() / 2);
        for t in range {
            self.sums.z_column(t, w, &coefs, &mut z);
            out.push(self.pooling.eval(&mut z, &mut head));
        }
    }
}

/// Pooled statistic of `kind` at one window; `|z|` for a single sequence.
pub fn panel_stat(sums: &PrefixSums, t: usize, w: WindowPair, kind: StatKind) -> Result<f64> {
    sums.check_window(t, w)?;
    let source = PanelSource::from_sums(sums.clone(), kind)?;
    Ok(source.stat(t, w))
}
