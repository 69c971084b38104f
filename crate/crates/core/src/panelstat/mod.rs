// SPDX-License-Identifier: MIT OR Apache-2.0

//! Pooled multi-sequence statistics built from per-sequence window
//! z-scores: higher criticism, Berk-Jones, the sparse-mixture score, and
//! the two-channel allele-specific statistic.

mod allele;
mod pooled;

pub use allele::{
    allele_v_stat, allelic_glr, chi2_2_sf, estimate_variances, mixture_loglik, mixture_mle,
    AlleleFit, AlleleModelParams, AlleleSource,
};
pub use pooled::{
    b_plus, bj_stat, hc_stat, panel_stat, score_stat, PValueVector, PanelSource, ScoreParams,
    StatKind, P_FLOOR,
};
