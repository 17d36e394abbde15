use serde::{Deserialize, Serialize};

use super::{two_node_counts, SplitContext, SplitRule};

/// Scan the midpoints between consecutive distinct values of `sorted`
/// (ascending, with labels). Counts in `base_left` always sit on the left.
/// Ties keep the smallest threshold.
pub(crate) fn scan_midpoints(sorted: &[(f64, usize)], base_left: &[usize], w: &[f64]) -> Option<(f64, f64)> {
    let mut left = base_left.to_vec();
    let mut right = vec![0usize; base_left.len()];
    for &(_, l) in sorted {
        right[l] += 1;
    }
    let mut best: Option<(f64, f64)> = None;
    for i in 0..sorted.len().saturating_sub(1) {
        let (v, l) = sorted[i];
        left[l] += 1;
        right[l] -= 1;
        let next = sorted[i + 1].0;
        if next <= v {
            continue;
        }
        let imp = two_node_counts(&left, &right, w);
        if best.is_none_or(|(_, b)| imp < b) {
            best = Some((midpoint(v, next), imp));
        }
    }
    best
}

pub(crate) fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b {
        a
    } else {
        m
    }
}

/// Best split `X <= c` on a numeric predictor over all midpoints, with
/// missing values sent left. A split isolating the missing values is also
/// tried when both sides hold at least `m0` rows.
pub fn split_numeric(ctx: &SplitContext, rows: &[usize], var: usize, m0: usize) -> Option<(SplitRule, f64)> {
    let j = ctx.data.n_classes();
    let mut missing = vec![0usize; j];
    let mut present = Vec::with_capacity(rows.len());
    for &r in rows {
        let v = ctx.data.num(r, var);
        if v.is_nan() {
            missing[ctx.data.label(r)] += 1;
        } else {
            present.push((v, ctx.data.label(r)));
        }
    }
    present.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = scan_midpoints(&present, &missing, ctx.w())
        .map(|(threshold, imp)| (SplitRule::Numeric { var, threshold }, imp));
    let n_missing: usize = missing.iter().sum();
    if n_missing >= m0.max(1) && present.len() >= m0.max(1) {
        let mut right = vec![0usize; j];
        for &(_, l) in &present {
            right[l] += 1;
        }
        let imp = two_node_counts(&missing, &right, ctx.w());
        if best.as_ref().is_none_or(|(_, b)| imp < *b) {
            best = Some((SplitRule::Missing { var }, imp));
        }
    }
    best
}

/// Candidate thresholds `S_k`: evenly spaced order statistics that keep at
/// least `m0` observations on each side.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictedSplitPoints {
    /// One-based ranks `i_j`.
    pub ranks: Vec<usize>,
    /// Order statistics `x_(i_j)`.
    pub values: Vec<f64>,
}

/// Restricted split points for the non-missing values in `values`.
/// `n_train` is the training sample size driving the sampling fraction.
pub fn restricted_points(values: &[f64], n_train: usize, m0: usize) -> RestrictedSplitPoints {
    let mut sorted: Vec<f64> = values.iter().copied().filter(|v| !v.is_nan()).collect();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n < 2 * m0 || n == 0 {
        return RestrictedSplitPoints {
            ranks: Vec::new(),
            values: Vec::new(),
        };
    }
    let f = (100.0 / n_train.max(1) as f64).min(1.0);
    let d = ((f * n as f64).floor() as usize).max(9).min(n - 2 * m0 + 1);
    let span = n - 2 * m0;
    let ranks: Vec<usize> = (1..=d).map(|j| m0 + (j * span) / (d + 1)).collect();
    let values = ranks.iter().map(|&i| sorted[i.max(1) - 1]).collect();
    RestrictedSplitPoints { ranks, values }
}

/// Distinct restricted thresholds usable as splits (strictly below the
/// largest value), ascending.
pub(crate) fn usable_thresholds(values: &[f64], n_train: usize, m0: usize) -> Vec<f64> {
    let pts = restricted_points(values, n_train, m0);
    let max = values.iter().copied().filter(|v| !v.is_nan()).fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = pts.values.into_iter().filter(|&c| c < max).collect();
    out.dedup();
    out
}

/// Smallest value in `values` strictly above `c`, for turning an order
/// statistic into a midpoint threshold.
pub(crate) fn commit_threshold(values: &[f64], c: f64) -> f64 {
    let next = values
        .iter()
        .copied()
        .filter(|&v| v > c)
        .fold(f64::INFINITY, f64::min);
    if next.is_finite() {
        midpoint(c, next)
    } else {
        c
    }
}
