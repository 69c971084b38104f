// SPDX-License-Identifier: MIT OR Apache-2.0

//! Two-channel allele-specific statistic.
//!
//! Each individual contributes a total-intensity channel `Y = mu + e`,
//! `e ~ N(0, s1^2)`, and an allelic channel `Z = alpha + xi` where `xi` is
//! an even two-component mixture `N(-b, s2^2) / N(b, s2^2)`. At a window the
//! per-individual statistic adds the squared standardized mean shift of `Y`
//! to twice the log generalized likelihood ratio for a change in `b`, and
//! is referred to a chi-square with two degrees of freedom.

use serde::{Deserialize, Serialize};

use super::pooled::{PValueVector, StatKind};
use crate::error::{Result, SegError};
use crate::segment::StatSource;
use crate::seqcore::{half_sample_variance, PrefixSums, SequencePanel, WindowCoefs, WindowPair};

const GOLDEN_TOL: f64 = 1e-7;
const GOLDEN_MAX_ITER: usize = 200;
const NEWTON_STEPS: usize = 5;

/// Noise parameters of the two-channel model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlleleModelParams {
    pub sigma1_sq: f64,
    pub sigma2_sq: f64,
    pub alpha: Vec<f64>,
}

impl AlleleModelParams {
    pub fn validate(&self, n_seq: usize) -> Result<()> {
        if !(self.sigma1_sq > 0.0 && self.sigma1_sq.is_finite()) {
            return Err(SegError::ZeroVariance(format!(
                "sigma1^2 = {}",
                self.sigma1_sq
            )));
        }
        if !(self.sigma2_sq > 0.0 && self.sigma2_sq.is_finite()) {
            return Err(SegError::ZeroVariance(format!(
                "sigma2^2 = {}",
                self.sigma2_sq
            )));
        }
        if self.alpha.len() != n_seq {
            return Err(SegError::invalid(format!(
                "{} allelic offsets for {n_seq} sequences",
                self.alpha.len()
            )));
        }
        Ok(())
    }
}

#[inline]
fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Mixture log-likelihood of `b` for centred allelic values, up to terms
/// that do not involve `b`.
pub fn mixture_loglik(xi: &[f64], b: f64, sigma2_sq: f64) -> f64 {
    let m = xi.len() as f64;
    let inv = 1.0 / sigma2_sq;
    -0.5 * m * b * b * inv + xi.iter().map(|&x| ln_cosh(x * b * inv)).sum::<f64>()
}

fn mixture_derivs(xi: &[f64], b: f64, sigma2_sq: f64) -> (f64, f64) {
    let inv = 1.0 / sigma2_sq;
    let m = xi.len() as f64;
    let (mut d1, mut d2) = (-m * b * inv, -m * inv);
    for &x in xi {
        let th = (x * b * inv).tanh();
        d1 += x * inv * th;
        d2 += x * x * inv * inv * (1.0 - th * th);
    }
    (d1, d2)
}

/// Maximizer over `b >= 0` of the mixture log-likelihood, and its value.
///
/// Golden-section search on `[0, max|xi| + 4 s2]`, polished by a few
/// guarded Newton steps. The likelihood is unimodal on `b >= 0`, and is
/// maximized at 0 whenever the mean square does not exceed `s2^2`.
pub fn mixture_mle(xi: &[f64], sigma2_sq: f64) -> Result<(f64, f64)> {
    if xi.is_empty() {
        return Ok((0.0, 0.0));
    }
    let mean_sq = xi.iter().map(|x| x * x).sum::<f64>() / xi.len() as f64;
    if mean_sq <= sigma2_sq {
        return Ok((0.0, mixture_loglik(xi, 0.0, sigma2_sq)));
    }
    let hi = xi.iter().fold(0.0f64, |a, x| a.max(x.abs())) + 4.0 * sigma2_sq.sqrt();
    let f = |b: f64| mixture_loglik(xi, b, sigma2_sq);

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut c) = (0.0, hi);
    let mut x1 = c - inv_phi * (c - a);
    let mut x2 = a + inv_phi * (c - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    let mut iter = 0;
    while c - a > GOLDEN_TOL * (1.0 + hi) {
        iter += 1;
        if iter > GOLDEN_MAX_ITER || !(f1.is_finite() && f2.is_finite()) {
            return Err(SegError::NoConvergence { lo: a, hi: c });
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (c - a);
            f2 = f(x2);
        } else {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - inv_phi * (c - a);
            f1 = f(x1);
        }
    }
    let (mut b, mut fb) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..NEWTON_STEPS {
        let (d1, d2) = mixture_derivs(xi, b, sigma2_sq);
        if d2 >= 0.0 || d1 == 0.0 {
            break;
        }
        let next = (b - d1 / d2).clamp(0.0, hi);
        let f_next = f(next);
        if f_next.is_nan() || f_next < fb {
            break;
        }
        b = next;
        fb = f_next;
    }
    Ok((b, fb))
}

/// `2 log U` for a change in `b` between `left` and `right`.
pub fn allelic_glr(left: &[f64], right: &[f64], sigma2_sq: f64) -> Result<f64> {
    let (_, fl) = mixture_mle(left, sigma2_sq)?;
    let (_, fr) = mixture_mle(right, sigma2_sq)?;
    let joined: Vec<f64> = left.iter().chain(right).copied().collect();
    let (_, f0) = mixture_mle(&joined, sigma2_sq)?;
    Ok((2.0 * (fl + fr - f0)).max(0.0))
}

/// Upper tail of the chi-square distribution with two degrees of freedom.
#[inline]
pub fn chi2_2_sf(v: f64) -> f64 {
    (-0.5 * v.max(0.0)).exp()
}

/// Per-window allele-specific statistics for every individual.
#[derive(Clone, Debug)]
pub struct AlleleSource {
    y_sums: PrefixSums,
    xi: Vec<f64>,
    len: usize,
    n_seq: usize,
    params: AlleleModelParams,
    kind: StatKind,
}

impl AlleleSource {
    /// `kind` selects the pooling across individuals: `bj` or `hc`. A
    /// single individual uses `V` itself.
    pub fn new(
        y: &SequencePanel,
        z: &SequencePanel,
        params: AlleleModelParams,
        kind: StatKind,
    ) -> Result<Self> {
        check_channels(y, z)?;
        params.validate(y.n_seq())?;
        if y.n_seq() > 1 && !matches!(kind, StatKind::Hc | StatKind::Bj) {
            return Err(SegError::invalid(format!(
                "allele-specific pooling supports hc and bj, got {kind}"
            )));
        }
        let mut xi = Vec::with_capacity(y.n_seq() * y.len());
        for (row, a) in z.rows().zip(&params.alpha) {
            xi.extend(row.iter().map(|v| v - a));
        }
        Ok(Self {
            y_sums: PrefixSums::from_panel(y),
            xi,
            len: y.len(),
            n_seq: y.n_seq(),
            params,
            kind,
        })
    }

    pub fn params(&self) -> &AlleleModelParams {
        &self.params
    }

    fn xi_row(&self, n: usize) -> &[f64] {
        &self.xi[n * self.len..(n + 1) * self.len]
    }

    /// `V` for every individual at `(t, w)`.
    pub fn v_stats(&self, t: usize, w: WindowPair) -> Result<Vec<f64>> {
        self.y_sums.check_window(t, w)?;
        self.v_unchecked(t, w)
    }

    fn v_unchecked(&self, t: usize, w: WindowPair) -> Result<Vec<f64>> {
        let coefs = WindowCoefs::new(w);
        (0..self.n_seq)
            .map(|n| {
                let z = self.y_sums.z_unchecked(n, t, &coefs, w);
                let row = self.xi_row(n);
                let glr = allelic_glr(&row[t - w.l..t], &row[t..t + w.k], self.params.sigma2_sq)?;
                Ok(z * z / self.params.sigma1_sq + glr)
            })
            .collect()
    }

    fn pool(&self, v: &[f64]) -> f64 {
        if self.n_seq == 1 {
            return v[0];
        }
        let p = PValueVector::new(v.iter().map(|&x| chi2_2_sf(x)).collect())
            .expect("chi-square tail is a probability");
        match self.kind {
            StatKind::Hc => super::pooled::hc_stat(&p),
            _ => super::pooled::bj_stat(&p),
        }
        .expect("panel has at least two sequences")
    }
}

impl StatSource for AlleleSource {
    fn len(&self) -> usize {
        self.len
    }

    fn stat(&self, t: usize, w: WindowPair) -> f64 {
        match self.v_unchecked(t, w) {
            Ok(v) => self.pool(&v),
            Err(e) => {
                log::warn!("allelic likelihood at t={t} {w}: {e}; treating as no change");
                f64::NEG_INFINITY
            }
        }
    }
}

/// Allele-specific statistic `V` of one individual with its p-value.
pub fn allele_v_stat(
    y: &[f64],
    z: &[f64],
    t: usize,
    w: WindowPair,
    sigma1_sq: f64,
    sigma2_sq: f64,
    alpha: f64,
) -> Result<(f64, f64)> {
    if y.len() != z.len() {
        return Err(SegError::invalid("allelic channels differ in length"));
    }
    let sums = PrefixSums::from_slice(y);
    sums.check_window(t, w)?;
    let params = AlleleModelParams {
        sigma1_sq,
        sigma2_sq,
        alpha: vec![alpha],
    };
    params.validate(1)?;
    let zs = sums.z_unchecked(0, t, &WindowCoefs::new(w), w);
    let xi: Vec<f64> = z.iter().map(|v| v - alpha).collect();
    let glr = allelic_glr(&xi[t - w.l..t], &xi[t..t + w.k], sigma2_sq)?;
    let v = zs * zs / sigma1_sq + glr;
    Ok((v, chi2_2_sf(v)))
}

fn check_channels(y: &SequencePanel, z: &SequencePanel) -> Result<()> {
    if y.n_seq() != z.n_seq() || y.len() != z.len() {
        return Err(SegError::invalid(format!(
            "channel shapes differ: Y is {}x{}, Z is {}x{}",
            y.n_seq(),
            y.len(),
            z.n_seq(),
            z.len()
        )));
    }
    Ok(())
}

/// Per-segment estimates from one maximum-likelihood pass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlleleFit {
    pub params: AlleleModelParams,
    /// Segment boundaries `0 = c_0 < c_1 < ... < T`.
    pub boundaries: Vec<usize>,
    /// `mu[n][s]`: mean of individual `n` on segment `s`.
    pub mu: Vec<Vec<f64>>,
    /// `b[n][s]`: allelic imbalance of individual `n` on segment `s`.
    pub b: Vec<Vec<f64>>,
}

/// Noise parameter estimates.
///
/// Without a segmentation: `s1^2` is half the pooled sample variance of
/// first differences of `Y`, `s2^2` the pooled sample variance of
/// `Z - alpha`, and `alpha` the per-individual mean of `Z`. With
/// change-points, `mu`, `b`, `s1^2` and `s2^2` are refit by maximum
/// likelihood on the implied segments.
pub fn estimate_variances(
    y: &SequencePanel,
    z: &SequencePanel,
    change_points: Option<&[usize]>,
) -> Result<AlleleFit> {
    check_channels(y, z)?;
    let (n_seq, len) = (y.n_seq(), y.len());
    let alpha: Vec<f64> = z
        .rows()
        .map(|r| r.iter().sum::<f64>() / len as f64)
        .collect();

    let diffs = y.rows().flat_map(|r| r.windows(2).map(|w| w[1] - w[0]));
    let sigma1_sq = half_sample_variance(diffs);
    let centred = || {
        z.rows()
            .zip(&alpha)
            .flat_map(|(r, a)| r.iter().map(move |v| v - a))
    };
    let count = (n_seq * len) as f64;
    let sigma2_sq = centred().map(|v| v * v).sum::<f64>() / (count - 1.0);
    let initial = AlleleModelParams {
        sigma1_sq,
        sigma2_sq,
        alpha,
    };
    initial.validate(n_seq)?;

    let Some(cps) = change_points else {
        return Ok(AlleleFit {
            params: initial,
            boundaries: vec![0, len],
            mu: y
                .rows()
                .map(|r| vec![r.iter().sum::<f64>() / len as f64])
                .collect(),
            b: vec![vec![0.0]; n_seq],
        });
    };

    let mut boundaries = Vec::with_capacity(cps.len() + 2);
    boundaries.push(0);
    for &c in cps {
        if c == 0 || c >= len || c <= *boundaries.last().unwrap() {
            return Err(SegError::invalid(format!(
                "change-points must be strictly increasing within (0, {len})"
            )));
        }
        boundaries.push(c);
    }
    boundaries.push(len);
    let segments: Vec<(usize, usize)> = boundaries.windows(2).map(|w| (w[0], w[1])).collect();

    let mu: Vec<Vec<f64>> = y
        .rows()
        .map(|r| {
            segments
                .iter()
                .map(|&(a, b)| r[a..b].iter().sum::<f64>() / (b - a) as f64)
                .collect()
        })
        .collect();
    let mut rss = 0.0;
    for (r, m) in y.rows().zip(&mu) {
        for (&(a, b), &level) in segments.iter().zip(m) {
            rss += r[a..b]
                .iter()
                .map(|v| (v - level) * (v - level))
                .sum::<f64>();
        }
    }
    let sigma1_sq = rss / count;

    let xi: Vec<Vec<f64>> = z
        .rows()
        .zip(&initial.alpha)
        .map(|(r, a)| r.iter().map(|v| v - a).collect())
        .collect();
    let mut s2 = initial.sigma2_sq;
    let mut b = vec![vec![0.0; segments.len()]; n_seq];
    // EM between the segment imbalances and the shared mixture variance
    for _ in 0..200 {
        let mut acc = 0.0;
        for (row, bn) in xi.iter().zip(b.iter_mut()) {
            for (&(lo, hi), bs) in segments.iter().zip(bn.iter_mut()) {
                let seg = &row[lo..hi];
                *bs = mixture_mle(seg, s2)?.0;
                let bv = *bs;
                acc += seg
                    .iter()
                    .map(|&x| {
                        let w = 0.5 * (1.0 + (x * bv / s2).tanh());
                        w * (x - bv) * (x - bv) + (1.0 - w) * (x + bv) * (x + bv)
                    })
                    .sum::<f64>();
            }
        }
        let next = acc / count;
        let done = ((next - s2) / s2).abs() < 1e-10;
        s2 = next;
        if done {
            break;
        }
    }

    let params = AlleleModelParams {
        sigma1_sq,
        sigma2_sq: s2,
        alpha: initial.alpha,
    };
    params.validate(n_seq)?;
    Ok(AlleleFit {
        params,
        boundaries,
        mu,
        b,
    })
}
