// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use segscan_core::ascn::{segment_allele, VarianceStep};
use segscan_core::calibrate::{calibrate_null, calibrate_permutation, NullSpec};
use segscan_core::seqcore::{build_panel, difference_variance, PrefixSums};
use segscan_core::simlab::{example1_spec, run_benchmark, MethodConfig};
use segscan_core::{
    Algorithm, SegmentationResult, SequencePanel, Standardize, StatKind, ThresholdPolicy,
};

use crate::cli::{
    AscnArgs, CalibrateArgs, MultisegArgs, OutputArgs, SegmentArgs, SimulateArgs, ThresholdArg,
};
use crate::input::{read_matrix, Matrix};
use crate::thresholds::{calibration_shape, detector, load_calibration, resolve, PolicyInfo};
use crate::Invalid;

/// One reported change-point; locations are original column numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChangePoint {
    pub raw: usize,
    pub refined: usize,
    pub stat: f64,
    pub k: usize,
    pub l: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub contributors: Vec<Contributor>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contributor {
    pub sequence: String,
    pub z: f64,
}

#[derive(Clone, Debug, Serialize)]
struct InputInfo {
    path: String,
    n_seq: usize,
    columns: usize,
    used: usize,
    dropped_columns: Vec<usize>,
}

#[derive(Serialize)]
struct SegmentReport<'a, C: Serialize> {
    command: &'static str,
    version: &'static str,
    config: &'a C,
    input: InputInfo,
    scales: Vec<f64>,
    policy: PolicyInfo,
    raw: Vec<usize>,
    refined: Vec<usize>,
    change_points: Vec<ChangePoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ranking: Option<Vec<usize>>,
}

/// Builds the panel and scales it to unit noise. A sequence with constant
/// first differences carries no noise estimate and is left unscaled.
fn open_panel(matrix: &Matrix, sigma: Option<f64>) -> anyhow::Result<(SequencePanel, Vec<f64>)> {
    let mut panel = build_panel(&matrix.rows)?;
    if let Some(s) = sigma {
        let scales = panel.standardize(Standardize::Known(s))?;
        return Ok((panel, scales));
    }
    let scales: Vec<f64> = panel
        .rows()
        .enumerate()
        .map(|(n, row)| match difference_variance(row) {
            v if v > 0.0 => v.sqrt(),
            _ => {
                log::warn!("{}: no noise estimate, left unscaled", matrix.names[n]);
                1.0
            }
        })
        .collect();
    let panel = panel.map_rows(|n, row| row.iter_mut().for_each(|v| *v /= scales[n]));
    Ok((panel, scales))
}

fn input_info(path: &Path, matrix: &Matrix, panel: &SequencePanel) -> InputInfo {
    InputInfo {
        path: path.display().to_string(),
        n_seq: panel.n_seq(),
        columns: matrix.rows[0].len(),
        used: panel.len(),
        dropped_columns: panel.dropped_columns().to_vec(),
    }
}

fn change_points(
    res: &SegmentationResult,
    panel: &SequencePanel,
    labels: Option<&Vec<String>>,
) -> Vec<ChangePoint> {
    (0..res.raw.len())
        .map(|j| {
            let refined = panel.to_original(res.refined[j]);
            ChangePoint {
                raw: panel.to_original(res.raw[j]),
                refined,
                stat: res.stats[j],
                k: res.windows[j].k,
                l: res.windows[j].l,
                label: labels.map(|l| l[refined - 1].clone()),
                contributors: Vec::new(),
            }
        })
        .collect()
}

fn write_json(value: &impl Serialize, out: &OutputArgs) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match &out.output {
        Some(path) => {
            std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "{text}")?;
            Ok(())
        }
    }
}

fn write_change_point_csv(path: &Path, cps: &[ChangePoint]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    w.write_record(["index", "raw", "refined", "stat", "k", "l", "label"])?;
    for (i, cp) in cps.iter().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            cp.raw.to_string(),
            cp.refined.to_string(),
            cp.stat.to_string(),
            cp.k.to_string(),
            cp.l.to_string(),
            cp.label.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn original_ranking(
    res: &SegmentationResult,
    panel: &SequencePanel,
    top: Option<usize>,
) -> Option<Vec<usize>> {
    (!res.ranking.is_empty()).then(|| {
        let n = top.unwrap_or(res.ranking.len()).min(res.ranking.len());
        res.ranking[..n]
            .iter()
            .map(|&t| panel.to_original(t))
            .collect()
    })
}

pub fn segment(args: &SegmentArgs) -> anyhow::Result<()> {
    let matrix = read_matrix(&args.input.input, args.input.header)?;
    if matrix.rows.len() != 1 {
        return Err(Invalid(format!(
            "segment takes one sequence, input has {}; use multiseg",
            matrix.rows.len()
        ))
        .into());
    }
    let (panel, scales) = open_panel(&matrix, args.detect.sigma)?;
    let det = detector(&args.detect, StatKind::Single);
    let policy = resolve(&args.detect, &det, &panel)?;
    let res = det.segment(&panel, &policy.policy)?;
    let cps = change_points(&res, &panel, matrix.labels.as_ref());
    if let Some(path) = &args.out.csv {
        write_change_point_csv(path, &cps)?;
    }
    write_json(
        &SegmentReport {
            command: "segment",
            version: env!("CARGO_PKG_VERSION"),
            config: args,
            input: input_info(&args.input.input, &matrix, &panel),
            scales,
            policy,
            raw: cps.iter().map(|c| c.raw).collect(),
            refined: cps.iter().map(|c| c.refined).collect(),
            ranking: original_ranking(&res, &panel, None),
            change_points: cps,
        },
        &args.out,
    )
}

/// Sequences with the largest `|z|` at each change-point, using the
/// admission window clipped to the sequence.
fn contributors(
    res: &SegmentationResult,
    panel: &SequencePanel,
    names: &[String],
    top: usize,
    cps: &mut [ChangePoint],
) -> anyhow::Result<()> {
    let sums = PrefixSums::from_panel(panel);
    for (j, cp) in cps.iter_mut().enumerate() {
        let t = res.refined[j];
        let mut w = res.windows[j];
        w.l = w.l.min(t);
        w.k = w.k.min(panel.len() - t);
        let mut z: Vec<(usize, f64)> = (0..panel.n_seq())
            .map(|n| sums.z(n, t, w).map(|v| (n, v)))
            .collect::<Result<_, _>>()?;
        z.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
        cp.contributors = z
            .into_iter()
            .take(top)
            .map(|(n, v)| Contributor {
                sequence: names[n].clone(),
                z: v,
            })
            .collect();
    }
    Ok(())
}

pub fn multiseg(args: &MultisegArgs) -> anyhow::Result<()> {
    let matrix = read_matrix(&args.input.input, args.input.header)?;
    if matrix.rows.len() > 1 && args.stat == StatKind::Single {
        return Err(Invalid("--stat single needs exactly one sequence".into()).into());
    }
    let (panel, scales) = open_panel(&matrix, args.detect.sigma)?;
    let det = detector(&args.detect, args.stat);
    let policy = resolve(&args.detect, &det, &panel)?;
    let res = det.segment(&panel, &policy.policy)?;
    let mut cps = change_points(&res, &panel, matrix.labels.as_ref());
    contributors(&res, &panel, &matrix.names, args.top_contributors, &mut cps)?;
    if let Some(path) = &args.out.csv {
        write_change_point_csv(path, &cps)?;
    }
    write_json(
        &SegmentReport {
            command: "multiseg",
            version: env!("CARGO_PKG_VERSION"),
            config: args,
            input: input_info(&args.input.input, &matrix, &panel),
            scales,
            policy,
            raw: cps.iter().map(|c| c.raw).collect(),
            refined: cps.iter().map(|c| c.refined).collect(),
            ranking: original_ranking(&res, &panel, Some(args.top_k)),
            change_points: cps,
        },
        &args.out,
    )
}

pub fn simulate(args: &SimulateArgs) -> anyhow::Result<()> {
    if args.scenario != "example1" {
        return Err(Invalid(format!(
            "unknown scenario '{}'; available: example1",
            args.scenario
        ))
        .into());
    }
    if args.bench_reps == 0 {
        return Err(Invalid("--bench-reps must be positive".into()).into());
    }
    let spec = example1_spec(args.detect.seed);
    let det = detector(&args.detect, StatKind::Single);
    let policy = match (&args.detect.threshold, args.detect.c) {
        (ThresholdArg::Calibrated(path), _) => load_calibration(path)?.policy,
        (ThresholdArg::Theorem2, _) => ThresholdPolicy::Theorem2 {
            a: args
                .detect
                .a
                .ok_or_else(|| Invalid("--threshold theorem2 needs --a".into()))?,
        },
        (ThresholdArg::Multiscale, Some(c)) => ThresholdPolicy::Multiscale { c },
        (ThresholdArg::Constant, Some(c)) => ThresholdPolicy::Constant { c },
        (threshold, None) => {
            let shape = calibration_shape(threshold, args.detect.algo, 1)?;
            calibrate_null(&NullSpec {
                len: spec.len,
                n_seq: 1,
                detector: det.clone(),
                shape,
                alpha: args.detect.alpha,
                n_mc: args.detect.reps,
                seed: args.detect.seed,
            })?
            .policy
        }
    };
    let method = MethodConfig {
        detector: det,
        policy,
    };
    let metrics = run_benchmark(&spec, &method, args.bench_reps, args.detect.seed)?;
    let name = match (method.detector.algorithm, &method.policy) {
        (Algorithm::Reverse, _) => "reverse".to_string(),
        (_, p) => format!("local ({})", p.mode_name()),
    };
    let (header, row) = (metrics.table_header(), metrics.table_row(&name));
    if let Some(path) = &args.out.csv {
        let mut w =
            csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(&header)?;
        w.write_record(&row)?;
        w.flush()?;
    }
    if args.out.output.is_some() {
        println!("{}\n{}", header.join("\t"), row.join("\t"));
    }
    #[derive(Serialize)]
    struct Report<'a> {
        command: &'static str,
        version: &'static str,
        config: &'a SimulateArgs,
        method: &'a MethodConfig,
        metrics: segscan_core::simlab::DetectionMetrics,
    }
    write_json(
        &Report {
            command: "simulate",
            version: env!("CARGO_PKG_VERSION"),
            config: args,
            method: &method,
            metrics,
        },
        &args.out,
    )
}

pub fn calibrate(args: &CalibrateArgs) -> anyhow::Result<()> {
    let det = detector(&args.detect, args.stat);
    let observed = match &args.input {
        Some(path) => Some(open_panel(&read_matrix(path, false)?, args.detect.sigma)?.0),
        None => None,
    };
    let (len, n_seq) = match (&observed, args.len) {
        (Some(p), _) => (p.len(), p.n_seq()),
        (None, Some(len)) => (len, args.n_seq),
        (None, None) => return Err(Invalid("calibrate needs --len or --input".into()).into()),
    };
    if n_seq > 1 && args.stat == StatKind::Single {
        return Err(Invalid("--stat single needs --n-seq 1".into()).into());
    }
    let shape = calibration_shape(&args.detect.threshold, args.detect.algo, n_seq)?;
    let cal = if args.detect.permute {
        let panel = observed
            .as_ref()
            .ok_or_else(|| Invalid("--permute needs --input".into()))?;
        calibrate_permutation(
            panel,
            &det,
            shape,
            args.detect.alpha,
            args.detect.reps,
            args.detect.seed,
        )?
    } else {
        calibrate_null(&NullSpec {
            len,
            n_seq,
            detector: det,
            shape,
            alpha: args.detect.alpha,
            n_mc: args.detect.reps,
            seed: args.detect.seed,
        })?
    };
    log::info!("calibrated threshold: {}", cal.policy);
    match &args.out.output {
        Some(path) => std::fs::write(path, cal.to_json()? + "\n")
            .with_context(|| format!("writing {}", path.display())),
        None => {
            println!("{}", cal.to_json()?);
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct SegmentFit {
    start: usize,
    end: usize,
    mu: Vec<f64>,
    b: Vec<f64>,
}

pub fn ascn(args: &AscnArgs) -> anyhow::Result<()> {
    let y = read_matrix(&args.y, args.header)?;
    let z = read_matrix(&args.z, args.header)?;
    if y.rows.len() != z.rows.len() || y.rows[0].len() != z.rows[0].len() {
        return Err(Invalid(format!(
            "--y is {}x{} but --z is {}x{}",
            y.rows.len(),
            y.rows[0].len(),
            z.rows.len(),
            z.rows[0].len()
        ))
        .into());
    }
    // a column missing in either channel is dropped from both
    let joint: Vec<_> = y.rows.iter().chain(&z.rows).cloned().collect();
    let both = build_panel(&joint)?;
    let n_seq = y.rows.len();
    let rows: Vec<Vec<f64>> = both.rows().map(<[f64]>::to_vec).collect();
    let yp = SequencePanel::from_rows(&rows[..n_seq])?;
    let zp = SequencePanel::from_rows(&rows[n_seq..])?;

    let det = detector(
        &args.detect,
        if n_seq == 1 {
            StatKind::Single
        } else {
            args.stat
        },
    );
    let policy = match (&args.detect.threshold, args.detect.c) {
        (ThresholdArg::Calibrated(path), _) => {
            let cal = load_calibration(path)?;
            if cal.len != yp.len() {
                return Err(Invalid(format!(
                    "calibration is for T = {} but the channels have T = {}",
                    cal.len,
                    yp.len()
                ))
                .into());
            }
            PolicyInfo::from_file(cal, path)
        }
        (ThresholdArg::Theorem2, _) => PolicyInfo::fixed(ThresholdPolicy::Theorem2 {
            a: args
                .detect
                .a
                .ok_or_else(|| Invalid("--threshold theorem2 needs --a".into()))?,
        }),
        (_, Some(c)) => PolicyInfo::fixed(ThresholdPolicy::Calibrated { c }),
        (_, None) if n_seq == 1 => {
            let tests = match det.grid(yp.len())? {
                Some(grid) => grid.n_triples(),
                None => yp.len() - 1,
            };
            // chi-square(2) tail exp(-c/2) summed over every test
            let c = 2.0 * (tests as f64 / args.detect.alpha).ln();
            PolicyInfo::bonferroni(c, args.detect.alpha)
        }
        (_, None) => {
            return Err(Invalid(
                "pooled allele-specific segmentation needs --c or a calibration file".into(),
            )
            .into())
        }
    };
    let run = segment_allele(&yp, &zp, &det, &policy.policy, args.tol, args.max_rounds)?;
    let cps = change_points(&run.result, &both, y.labels.as_ref());
    if let Some(path) = &args.out.csv {
        write_change_point_csv(path, &cps)?;
    }
    let map = both.index_map();
    let segments: Vec<SegmentFit> = run
        .fit
        .boundaries
        .windows(2)
        .enumerate()
        .map(|(s, b)| SegmentFit {
            start: map[b[0]],
            end: map[b[1] - 1],
            mu: run.fit.mu.iter().map(|m| m[s]).collect(),
            b: run.fit.b.iter().map(|v| v[s]).collect(),
        })
        .collect();
    let trace: Vec<VarianceStep> = run
        .trace
        .iter()
        .map(|s| VarianceStep {
            change_points: s
                .change_points
                .iter()
                .map(|&t| both.to_original(t))
                .collect(),
            ..s.clone()
        })
        .collect();
    #[derive(Serialize)]
    struct Report<'a> {
        command: &'static str,
        version: &'static str,
        config: &'a AscnArgs,
        policy: PolicyInfo,
        n_seq: usize,
        used: usize,
        dropped_columns: Vec<usize>,
        raw: Vec<usize>,
        refined: Vec<usize>,
        change_points: Vec<ChangePoint>,
        sigma1_sq: f64,
        sigma2_sq: f64,
        alpha: Vec<f64>,
        segments: Vec<SegmentFit>,
        trace: Vec<VarianceStep>,
        converged: bool,
    }
    write_json(
        &Report {
            command: "ascn",
            version: env!("CARGO_PKG_VERSION"),
            config: args,
            policy,
            n_seq,
            used: both.len(),
            dropped_columns: both.dropped_columns().to_vec(),
            raw: cps.iter().map(|c| c.raw).collect(),
            refined: cps.iter().map(|c| c.refined).collect(),
            change_points: cps,
            sigma1_sq: run.fit.params.sigma1_sq,
            sigma2_sq: run.fit.params.sigma2_sq,
            alpha: run.fit.params.alpha.clone(),
            segments,
            trace,
            converged: run.converged,
        },
        &args.out,
    )
}
