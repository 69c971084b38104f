// SPDX-License-Identifier: MIT OR Apache-2.0

//! Slow reference implementations for tests.
//!
//! Everything here is written directly from the definitions, without prefix
//! sums, heaps, or any helper from the production modules. Inputs are plain
//! slices so the oracles cannot accidentally reuse production state.

use std::f64::consts::PI;

const P_CLAMP: f64 = 1e-15;

/// Mean of `values[from..to]` (0-based, half open) by direct summation.
fn direct_mean(values: &[f64], from: usize, to: usize) -> f64 {
    let mut s = 0.0;
    for v in &values[from..to] {
        s += v;
    }
    s / (to - from) as f64
}

/// Signed two-window statistic at `t` with right window `k` and left window
/// `l`: `(mean(Y[t+1..=t+k]) - mean(Y[t-l+1..=t])) / sqrt(1/k + 1/l)`.
pub fn naive_z(values: &[f64], t: usize, k: usize, l: usize) -> f64 {
    assert!(
        k >= 1 && l >= 1 && l <= t && t + k <= values.len(),
        "window out of range"
    );
    let right = direct_mean(values, t, t + k);
    let left = direct_mean(values, t - l, t);
    (right - left) / (1.0 / k as f64 + 1.0 / l as f64).sqrt()
}

/// `|naive_z|`.
pub fn naive_local_stat(values: &[f64], t: usize, k: usize, l: usize) -> f64 {
    naive_z(values, t, k, l).abs()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// the Legendre recurrence.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Upper normal tail `P(Z > z)` by composite Gauss-Legendre quadrature of
/// `phi(z) * int_0^inf exp(-z u - u^2 / 2) du`.
pub fn normal_tail(z: f64) -> f64 {
    if z < 0.0 {
        return 1.0 - normal_tail(-z);
    }
    let nodes = gauss_legendre(20);
    // the integrand is below 1e-40 beyond this point
    let upper = -z + (z * z + 2.0 * 92.0).sqrt();
    let panels = 64;
    let h = upper / panels as f64;
    let mut integral = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for &(x, w) in &nodes {
            let u = mid + 0.5 * h * x;
            integral += 0.5 * h * w * (-z * u - 0.5 * u * u).exp();
        }
    }
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt() * integral
}

/// Higher criticism over the first `floor(N/2)` sorted p-values.
pub fn naive_hc(p: &[f64]) -> f64 {
    let mut s: Vec<f64> = p.iter().map(|&v| v.clamp(P_CLAMP, 1.0 - P_CLAMP)).collect();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    let mut best = f64::NEG_INFINITY;
    for i in 1..=s.len() / 2 {
        let q = s[i - 1];
        let v = (i as f64 - n * q) / (n * q * (1.0 - q)).sqrt();
        if v > best {
            best = v;
        }
    }
    best
}

fn naive_b_plus(u: f64, p: f64) -> f64 {
    if u <= p {
        return 0.0;
    }
    let a = u * (u / p).ln();
    let b = if u == 1.0 {
        0.0
    } else {
        (1.0 - u) * ((1.0 - u) / (1.0 - p)).ln()
    };
    a + b
}

/// Berk-Jones over the first `floor(N/2)` sorted p-values.
pub fn naive_bj(p: &[f64]) -> f64 {
    let mut s: Vec<f64> = p.iter().map(|&v| v.clamp(P_CLAMP, 1.0 - P_CLAMP)).collect();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len() as f64;
    let mut best = 0.0f64;
    for i in 1..=s.len() / 2 {
        best = best.max(naive_b_plus(i as f64 / n, s[i - 1]));
    }
    n * best
}

/// One term `log(1 + p0 (exp(z^2/4)/sqrt 2 - 1))` of the score statistic.
pub fn naive_score_term(z: f64, p0: f64) -> f64 {
    let u = z * z / 4.0;
    if u < 600.0 {
        (1.0 + p0 * (u.exp() / 2f64.sqrt() - 1.0)).ln()
    } else {
        // factor out exp(u) p0 / sqrt 2
        let lead = u + (p0 / 2f64.sqrt()).ln();
        lead + (1.0 + (1.0 - p0) * 2f64.sqrt() / p0 * (-u).exp()).ln()
    }
}

/// Score statistic with `p0 = sqrt(log T / N)`.
pub fn naive_score(z: &[f64], len: usize) -> f64 {
    let p0 = ((len as f64).ln() / z.len() as f64).sqrt();
    z.iter().map(|&v| naive_score_term(v, p0)).sum()
}

/// Pooled statistic of the rows at `(t, k, l)`; `kind` is one of
/// `"hc"`, `"bj"`, `"score"`. A single row gives `|z|`.
pub fn naive_panel_stat(rows: &[Vec<f64>], t: usize, k: usize, l: usize, kind: &str) -> f64 {
    let z: Vec<f64> = rows.iter().map(|r| naive_z(r, t, k, l)).collect();
    if z.len() == 1 {
        return z[0].abs();
    }
    let p: Vec<f64> = z.iter().map(|v| 2.0 * normal_tail(v.abs())).collect();
    match kind {
        "hc" => naive_hc(&p),
        "bj" => naive_bj(&p),
        "score" => naive_score(&z, rows[0].len()),
        other => panic!("unknown statistic {other}"),
    }
}

/// Reverse segmentation by rescanning every active point each round.
/// `stat(t, k, l)` scores `t` with windows reaching to its neighbours.
/// Returns the full deletion order and the minimum at each deletion;
/// ties go to the smallest location.
pub fn naive_reverse_trace(
    len: usize,
    stat: impl Fn(usize, usize, usize) -> f64,
) -> (Vec<usize>, Vec<f64>) {
    let mut active: Vec<usize> = (1..len).collect();
    let mut order = Vec::new();
    let mut values = Vec::new();
    while !active.is_empty() {
        let mut best_i = 0;
        let mut best_x = f64::INFINITY;
        for i in 0..active.len() {
            let prev = if i == 0 { 0 } else { active[i - 1] };
            let next = if i + 1 == active.len() {
                len
            } else {
                active[i + 1]
            };
            let t = active[i];
            let x = stat(t, next - t, t - prev);
            if x < best_x {
                best_x = x;
                best_i = i;
            }
        }
        order.push(active.remove(best_i));
        values.push(best_x);
    }
    (order, values)
}

/// Survivors of reverse segmentation at threshold `c`: delete the weakest
/// point while its statistic is below `c`.
pub fn naive_reverse(len: usize, c: f64, stat: impl Fn(usize, usize, usize) -> f64) -> Vec<usize> {
    let mut active: Vec<usize> = (1..len).collect();
    loop {
        if active.is_empty() {
            return active;
        }
        let mut best_i = 0;
        let mut best_x = f64::INFINITY;
        for i in 0..active.len() {
            let prev = if i == 0 { 0 } else { active[i - 1] };
            let next = if i + 1 == active.len() {
                len
            } else {
                active[i + 1]
            };
            let x = stat(active[i], next - active[i], active[i] - prev);
            if x < best_x {
                best_x = x;
                best_i = i;
            }
        }
        if best_x >= c {
            return active;
        }
        active.remove(best_i);
    }
}

/// Full log-likelihood of the symmetric mixture `N(-b, s2)/2 + N(b, s2)/2`.
pub fn mixture_full_loglik(xi: &[f64], b: f64, sigma2_sq: f64) -> f64 {
    let norm = -0.5 * (2.0 * PI * sigma2_sq).ln();
    xi.iter()
        .map(|&x| {
            let a = -(x - b) * (x - b) / (2.0 * sigma2_sq);
            let c = -(x + b) * (x + b) / (2.0 * sigma2_sq);
            let m = a.max(c);
            norm + m + (0.5 * (a - m).exp() + 0.5 * (c - m).exp()).ln()
        })
        .sum()
}

/// Maximizer of the mixture likelihood over `b >= 0` by a dense grid on
/// `[0, max|xi| + 4 sigma2]` followed by repeated local zooming. Returns
/// `(b, loglik(b) - loglik(0))`.
pub fn grid_mle_b(xi: &[f64], sigma2_sq: f64) -> (f64, f64) {
    let sd = sigma2_sq.sqrt();
    let b_max = xi.iter().fold(0.0f64, |m, x| m.max(x.abs())) + 4.0 * sd;
    let ll = |b: f64| mixture_full_loglik(xi, b, sigma2_sq);
    let base = ll(0.0);
    let (mut lo, mut hi) = (0.0, b_max);
    let mut best = (0.0, base);
    for _ in 0..12 {
        let steps = 400;
        let h = (hi - lo) / steps as f64;
        for i in 0..=steps {
            let b = lo + i as f64 * h;
            let v = ll(b);
            if v > best.1 {
                best = (b, v);
            }
        }
        lo = (best.0 - 2.0 * h).max(0.0);
        hi = (best.0 + 2.0 * h).min(b_max);
    }
    (best.0, best.1 - base)
}

/// All window pairs `(floor(r^a), floor(r^b))` with `k + l <= T` and aspect
/// ratio at most `h`, by exhaustive search over exponents.
pub fn naive_grid(len: usize, r: f64, h: f64) -> Vec<(usize, usize)> {
    let mut lengths = Vec::new();
    let mut a = 0;
    loop {
        let v = r.powf(a as f64).floor() as usize;
        if v > len {
            break;
        }
        if !lengths.contains(&v) {
            lengths.push(v);
        }
        a += 1;
    }
    let mut out = Vec::new();
    for &k in &lengths {
        for &l in &lengths {
            let (big, small) = (k.max(l) as f64, k.min(l) as f64);
            if k + l <= len && big / small <= h && !out.contains(&(k, l)) {
                out.push((k, l));
            }
        }
    }
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_reference_values() {
        // P(Z > 1.959964) ~ 0.025, P(Z > 0) = 1/2
        assert!((normal_tail(1.959964) - 0.025).abs() < 1e-6);
        assert!((normal_tail(0.0) - 0.5).abs() < 1e-15);
        // P(Z > 5) = 2.866515718791939e-7 (exact to 16 digits)
        assert!((normal_tail(5.0) / 2.866_515_718_791_939e-7 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn naive_four_point_reverse() {
        let y = [0.0, 0.0, 10.0, 10.0];
        let (order, values) = naive_reverse_trace(4, |t, k, l| naive_local_stat(&y, t, k, l));
        assert_eq!(order, vec![1, 3, 2]);
        assert_eq!(values[2], 10.0);
        assert_eq!(
            naive_reverse(4, 3.0, |t, k, l| naive_local_stat(&y, t, k, l)),
            vec![2]
        );
        assert_eq!(
            naive_reverse(4, 0.0, |t, k, l| naive_local_stat(&y, t, k, l)),
            vec![1, 2, 3]
        );
    }

    #[test]
    fn grid_mle_recovers_spread() {
        let xi: Vec<f64> = (0..200)
            .map(|i| if i % 2 == 0 { 3.0 } else { -3.0 })
            .collect();
        let (b, gain) = grid_mle_b(&xi, 1.0);
        assert!((b - 3.0).abs() < 0.05);
        assert!(gain > 0.0);
        let (b0, _) = grid_mle_b(&[0.1, -0.2, 0.05], 1.0);
        assert!(b0 < 0.3);
    }

    #[test]
    fn hc_hand_value() {
        let v = naive_hc(&[0.01, 0.5, 0.6, 0.9]);
        assert!((v - 0.96 / (0.04f64 * 0.99).sqrt()).abs() < 1e-12);
    }
}
