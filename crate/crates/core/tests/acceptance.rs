// SPDX-License-Identifier: MIT OR Apache-2.0

//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and fails
//! if any criterion fails. `SEGSCAN_ACCEPT=1,4,7` restricts the run.
//!
//! Runtime is dominated by the pooled null runs of criterion 4.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use segscan_core::calibrate::{calibrate_null, null_panel, replicate_rng, NullSpec};
use segscan_core::oracle::{naive_local_stat, naive_panel_stat, naive_reverse_trace};
use segscan_core::panelstat::panel_stat;
use segscan_core::segment::reverse_trace;
use segscan_core::seqcore::{local_stat, PrefixSums, SingleSource};
use segscan_core::simlab::{
    detection_boundary, example1_spec, run_replicates, sparse_scenario, DetectionMetrics,
    MethodConfig, ReplicateOutcome, EXAMPLE1_LEN,
};
use segscan_core::{
    Detector, SequencePanel, StatKind, StatSource, ThresholdPolicy, ThresholdShape, WindowPair,
};

const EXAMPLE1_REPS: usize = 1000;
const TABLE_TOL: f64 = 0.05;
const REVERSE_HITS: [f64; 5] = [0.803, 0.889, 0.901, 0.902, 0.893];
const CONSTANT_HITS: [f64; 5] = [0.678, 0.902, 0.886, 0.896, 0.909];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn calibrate(
    detector: &Detector,
    shape: ThresholdShape,
    len: usize,
    n_seq: usize,
    alpha: f64,
    n_mc: usize,
    seed: u64,
) -> ThresholdPolicy {
    calibrate_null(&NullSpec {
        len,
        n_seq,
        detector: detector.clone(),
        shape,
        alpha,
        n_mc,
        seed,
    })
    .expect("calibration")
    .policy
}

fn within(x: f64, centre: f64, tol: f64) -> bool {
    (x - centre).abs() <= tol
}

fn fmt_hits(h: &[f64]) -> String {
    let parts: Vec<String> = h.iter().map(|p| format!("{p:.3}")).collect();
    format!("({})", parts.join(", "))
}

/// Example 1 runs shared by criteria 1, 2, 3 and 8.
struct Example1 {
    reverse: Vec<ReplicateOutcome>,
    constant: Vec<ReplicateOutcome>,
    multiscale: Vec<ReplicateOutcome>,
}

impl Example1 {
    fn run() -> Self {
        let spec = example1_spec(0);
        let run = |detector: Detector, shape: ThresholdShape, seed: u64| {
            let policy = calibrate(&detector, shape, EXAMPLE1_LEN, 1, 0.05, 2000, seed);
            eprintln!(
                "example 1: {} {:?} calibrated to {policy:?}",
                detector.algorithm, shape
            );
            run_replicates(
                &spec,
                &MethodConfig { detector, policy },
                EXAMPLE1_REPS,
                2024,
            )
            .expect("benchmark")
        };
        Self {
            reverse: run(
                Detector::reverse(StatKind::Single),
                ThresholdShape::Flat,
                101,
            ),
            constant: run(
                Detector::local(StatKind::Single),
                ThresholdShape::Constant,
                102,
            ),
            multiscale: run(
                Detector::local(StatKind::Single),
                ThresholdShape::Multiscale,
                103,
            ),
        }
    }
}

fn metrics(outcomes: &[ReplicateOutcome]) -> DetectionMetrics {
    DetectionMetrics::from_outcomes(outcomes, 10)
}

fn table_row(
    outcomes: &[ReplicateOutcome],
    bias: f64,
    bias_tol: f64,
    hits: &[f64; 5],
    first_tol: f64,
) -> Verdict {
    let m = metrics(outcomes);
    let bias_ok = within(m.j_bias, bias, bias_tol);
    let hits_ok = m
        .interval_hits
        .iter()
        .zip(hits)
        .enumerate()
        .all(|(i, (&p, &target))| within(p, target, if i == 0 { first_tol } else { TABLE_TOL }));
    verdict(
        bias_ok && hits_ok,
        format!(
            "J_hat-J = {:.3}, hits = {}",
            m.j_bias,
            fmt_hits(&m.interval_hits)
        ),
    )
}

fn criterion1(ex: &Example1) -> Verdict {
    table_row(&ex.reverse, -0.11, 0.10, &REVERSE_HITS, TABLE_TOL)
}

fn criterion2(ex: &Example1) -> Verdict {
    table_row(&ex.constant, -0.33, 0.12, &CONSTANT_HITS, 0.05)
}

fn criterion3(ex: &Example1) -> Verdict {
    let (c, m) = (metrics(&ex.constant), metrics(&ex.multiscale));
    let (pc, pm) = (c.interval_hits[0], m.interval_hits[0]);
    verdict(
        within(pm, 0.486, 0.06) && pc - pm >= 0.10,
        format!(
            "multiscale P1 = {pm:.3}, constant P1 = {pc:.3}, gap = {:.3}",
            pc - pm
        ),
    )
}

fn criterion4() -> Verdict {
    let (n_seq, len, fresh) = (26usize, 200usize, 2000u64);
    let mut pass = true;
    let mut parts = Vec::new();
    for kind in [StatKind::Hc, StatKind::Bj, StatKind::Score] {
        for detector in [Detector::local(kind), Detector::reverse(kind)] {
            let policy = calibrate(
                &detector,
                ThresholdShape::Flat,
                len,
                n_seq,
                0.05,
                1000,
                400 + kind as u64,
            );
            let hits = (0..fresh)
                .into_par_iter()
                .filter(|&i| {
                    let panel = null_panel(n_seq, len, &mut replicate_rng(0xACCE, i));
                    !detector
                        .segment(&panel, &policy)
                        .expect("segment")
                        .is_empty()
                })
                .count();
            let rate = hits as f64 / fresh as f64;
            pass &= (0.03..=0.07).contains(&rate);
            parts.push(format!("{}/{kind} {rate:.4}", detector.algorithm));
        }
    }
    verdict(pass, parts.join(", "))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0)
}

fn criterion5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let gauss = |rng: &mut ChaCha8Rng, n: usize| -> Vec<f64> {
        (0..n).map(|_| StandardNormal.sample(rng)).collect()
    };
    let mut triples = 0usize;
    let mut mismatches = 0usize;
    for _ in 0..10 {
        let len = rng.gen_range(20..300);
        let y = gauss(&mut rng, len);
        let sums = PrefixSums::from_slice(&y);
        for _ in 0..1000 {
            let k = rng.gen_range(1..len);
            let l = rng.gen_range(1..=len - k);
            let t = rng.gen_range(l..=len - k);
            let fast = local_stat(&sums, t, WindowPair { k, l }).expect("stat");
            mismatches += usize::from(!close(fast, naive_local_stat(&y, t, k, l)));
            triples += 1;
        }
    }
    let rows: Vec<Vec<f64>> = (0..8).map(|_| gauss(&mut rng, 150)).collect();
    let sums = PrefixSums::from_panel(&SequencePanel::from_rows(&rows).expect("panel"));
    for (kind, name) in [
        (StatKind::Hc, "hc"),
        (StatKind::Bj, "bj"),
        (StatKind::Score, "score"),
    ] {
        for _ in 0..1000 {
            let k = rng.gen_range(1..150);
            let l = rng.gen_range(1..=150 - k);
            let t = rng.gen_range(l..=150 - k);
            let fast = panel_stat(&sums, t, WindowPair { k, l }, kind).expect("stat");
            mismatches += usize::from(!close(fast, naive_panel_stat(&rows, t, k, l, name)));
            triples += 1;
        }
    }
    let mut reverse_bad = 0;
    for _ in 0..100 {
        let len = rng.gen_range(2..=300);
        let y = gauss(&mut rng, len);
        let src = SingleSource::new(&y);
        let fast = reverse_trace(&src);
        let (order, values) = naive_reverse_trace(len, |t, k, l| src.stat(t, WindowPair { k, l }));
        reverse_bad +=
            usize::from(fast.order() != order.as_slice() || fast.values() != values.as_slice());
    }
    verdict(
        triples >= 10_000 && mismatches == 0 && reverse_bad == 0,
        format!("{triples} triples, {mismatches} mismatches; reverse {reverse_bad}/100 differ"),
    )
}

fn criterion6() -> Verdict {
    let (len, reps) = (1000usize, 500u64);
    let mut pass = true;
    let mut parts = Vec::new();
    for (shape, seed) in [
        (ThresholdShape::Constant, 61),
        (ThresholdShape::Multiscale, 62),
    ] {
        let detector = Detector::local(StatKind::Single);
        let policy = calibrate(&detector, shape, len, 1, 0.01, 2000, seed);
        let good = (0..reps)
            .into_par_iter()
            .filter(|&i| {
                let mut rng = replicate_rng(600, i);
                let y: Vec<f64> = (0..len)
                    .map(|t| {
                        let e: f64 = StandardNormal.sample(&mut rng);
                        e + if t < 500 { 0.0 } else { 1.0 }
                    })
                    .collect();
                let res = detector
                    .segment(&SequencePanel::single(&y).expect("panel"), &policy)
                    .expect("segment");
                res.refined.len() == 1 && res.refined[0].abs_diff(500) <= 20
            })
            .count();
        let rate = good as f64 / reps as f64;
        pass &= rate >= 0.95;
        parts.push(format!("{shape:?} {rate:.3}"));
    }
    verdict(pass, format!("alpha = 0.01: {}", parts.join(", ")))
}

/// Fraction of `truth` with an estimate within `tol`.
fn recovered(est: &[usize], truth: &[usize], tol: usize) -> f64 {
    let n = truth
        .iter()
        .filter(|&&tau| est.iter().any(|&t| t.abs_diff(tau) <= tol))
        .count();
    n as f64 / truth.len() as f64
}

fn criterion7() -> Verdict {
    let (n_seq, len, beta, d, n_cp, reps) = (100usize, 500usize, 0.4, 20usize, 20usize, 500u64);
    let delta = (10.0 * (n_seq as f64).ln() / d as f64).sqrt();
    let sc = sparse_scenario(n_seq, len, beta, delta, d, n_cp, 7).expect("scenario");
    let pooled = Detector::reverse(StatKind::Score);
    let pooled_policy = calibrate(&pooled, ThresholdShape::Flat, len, n_seq, 0.05, 500, 71);
    let single = Detector::reverse(StatKind::Single);
    let single_policy = calibrate(&single, ThresholdShape::Flat, len, 1, 0.05, 2000, 72);
    let per_rep: Vec<(f64, Vec<f64>)> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let sim = sc.spec.replicate(7, i).expect("draw");
            let res = pooled.segment(&sim.panel, &pooled_policy).expect("segment");
            let p = recovered(res.change_points(true), &sc.change_points, d / 4);
            let singles = sc
                .affected
                .iter()
                .map(|&n| {
                    let row = SequencePanel::single(sim.panel.row(n)).expect("row");
                    let res = single.segment(&row, &single_policy).expect("segment");
                    recovered(res.change_points(true), &sc.change_points, d / 4)
                })
                .collect();
            (p, singles)
        })
        .collect();
    let pooled_power = per_rep.iter().map(|r| r.0).sum::<f64>() / reps as f64;
    let best = (0..sc.affected.len())
        .map(|j| per_rep.iter().map(|r| r.1[j]).sum::<f64>() / reps as f64)
        .fold(0.0, f64::max);
    verdict(
        pooled_power - best >= 0.2,
        format!(
            "pooled score {pooled_power:.3}, best single {best:.3}, gap {:.3}",
            pooled_power - best
        ),
    )
}

fn criterion8(ex: &Example1) -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, outcomes) in [
        ("reverse", &ex.reverse),
        ("constant", &ex.constant),
        ("multiscale", &ex.multiscale),
    ] {
        let paired: Vec<(usize, usize)> = outcomes
            .iter()
            .filter_map(|o| Some((o.raw_error?, o.refined_error?)))
            .collect();
        let n = paired.len().max(1) as f64;
        let raw = paired.iter().map(|p| p.0 as f64).sum::<f64>() / n;
        let refined = paired.iter().map(|p| p.1 as f64).sum::<f64>() / n;
        pass &= !paired.is_empty() && refined <= raw;
        parts.push(format!(
            "{name} {refined:.3} <= {raw:.3} ({} reps)",
            paired.len()
        ));
    }
    verdict(pass, parts.join(", "))
}

fn criterion9() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let thresholds = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0];
    let mut bad = 0;
    for _ in 0..100 {
        let len = rng.gen_range(2..=300);
        let n_seq = rng.gen_range(1..=4);
        let rows: Vec<Vec<f64>> = (0..n_seq)
            .map(|_| {
                (0..len)
                    .map(|t| {
                        let e: f64 = StandardNormal.sample(&mut rng);
                        e + if t > len / 2 { 1.5 } else { 0.0 }
                    })
                    .collect()
            })
            .collect();
        let panel = SequencePanel::from_rows(&rows).expect("panel");
        let kind = if n_seq == 1 {
            StatKind::Single
        } else {
            StatKind::Hc
        };
        let detector = Detector::reverse(kind).with_refine(None);
        let results: Vec<_> = thresholds
            .iter()
            .map(|&c| {
                detector
                    .segment(&panel, &ThresholdPolicy::Calibrated { c })
                    .expect("segment")
            })
            .collect();
        let nested = results
            .windows(2)
            .all(|p| p[1].raw.iter().all(|t| p[0].raw.contains(t)));
        let same_ranking = results.iter().all(|r| r.ranking == results[0].ranking);
        bad += usize::from(!(nested && same_ranking));
    }
    verdict(
        bad == 0,
        format!("{bad}/100 instances violate nestedness or ranking"),
    )
}

fn criterion10() -> Verdict {
    let mut worst = 0.0f64;
    for i in 0..10 {
        let zeta = 0.1 * i as f64;
        let b = 0.75 * (1.0 - zeta);
        let at = detection_boundary(b, zeta).expect("boundary");
        let below = detection_boundary(b * (1.0 - 1e-14), zeta).expect("boundary");
        let above = detection_boundary(b * (1.0 + 1e-14), zeta).expect("boundary");
        worst = worst.max((at - below).abs()).max((above - at).abs());
    }
    let classical = detection_boundary(0.75, 0.0).expect("boundary");
    let top = detection_boundary(1.0, 0.0).expect("boundary");
    verdict(
        worst <= 1e-12 && (classical - 0.25).abs() <= 1e-12 && (top - 1.0).abs() <= 1e-12,
        format!("max jump {worst:.2e}, rho(0.75, 0) = {classical}, rho(1, 0) = {top}"),
    )
}

#[test]
fn acceptance() {
    let only: Option<Vec<usize>> = std::env::var("SEGSCAN_ACCEPT")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let wanted = |i: usize| only.as_ref().is_none_or(|v| v.contains(&i));

    let needs_example1 = [1, 2, 3, 8].into_iter().any(wanted);
    let ex = needs_example1.then(Example1::run);
    let mut failed = Vec::new();
    let mut report = |i: usize, v: Verdict, started: Instant| {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {i:>2}: {tag}  {}  [{:.1}s]",
            v.detail,
            started.elapsed().as_secs_f64()
        );
        if !v.pass {
            failed.push(i);
        }
    };
    for i in 1..=10 {
        if !wanted(i) {
            continue;
        }
        let started = Instant::now();
        let v = match i {
            1 => criterion1(ex.as_ref().unwrap()),
            2 => criterion2(ex.as_ref().unwrap()),
            3 => criterion3(ex.as_ref().unwrap()),
            4 => criterion4(),
            5 => criterion5(),
            6 => criterion6(),
            7 => criterion7(),
            8 => criterion8(ex.as_ref().unwrap()),
            9 => criterion9(),
            _ => criterion10(),
        };
        report(i, v, started);
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
