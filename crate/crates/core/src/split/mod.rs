//! Split selection: Bonferroni-gated main-effect, interaction and linear
//! tests followed by Gini-minimizing split search.
//!
//! The search procedures work on class-count vectors; an observation of
//! class `j` carries weight `pi(j)/N_j` inside the Gini index while child
//! proportions are plain sample fractions.

mod categorical;
mod numeric;
mod pair;

use serde::{Deserialize, Serialize};

use crate::dataset::{Cell, ClassModel, Dataset, NodeClassStats, PredictorKind};
use crate::stats::{
    chi2_1_upper_quantile, interaction_stat, is_nonconstant, linear_stat, main_effect_stat, DiscriminantDirection,
};

pub use categorical::{exhaustive_categorical, split_categorical, prefix_order, CategoricalSplit};
pub use numeric::{restricted_points, split_numeric, RestrictedSplitPoints};
pub use pair::{split_pair_categorical, split_pair_mixed, split_pair_numeric, PairSearch};

/// Gini impurity `1 - sum_j p(j|t)^2`.
pub fn gini(stats: &NodeClassStats) -> f64 {
    gini_masses(stats.joint.iter().copied())
}

/// `p_L g(t_L) + p_R g(t_R)` with sample-fraction weights.
pub fn two_node_impurity(left: &NodeClassStats, right: &NodeClassStats) -> f64 {
    let n = (left.n + right.n) as f64;
    (node_term(left) + node_term(right)) / n
}

/// Four-grandchild weighted Gini sum; empty grandchildren contribute zero.
pub fn four_node_impurity(
    ll: &NodeClassStats,
    lr: &NodeClassStats,
    rl: &NodeClassStats,
    rr: &NodeClassStats,
) -> f64 {
    let n = (ll.n + lr.n + rl.n + rr.n) as f64;
    ((node_term(ll) + node_term(lr)) + (node_term(rl) + node_term(rr))) / n
}

fn node_term(s: &NodeClassStats) -> f64 {
    if s.n == 0 {
        0.0
    } else {
        s.n as f64 * gini(s)
    }
}

#[inline]
fn gini_masses(masses: impl Iterator<Item = f64>) -> f64 {
    let mut tot = 0.0;
    let mut sq = 0.0;
    for p in masses {
        tot += p;
        sq += p * p;
    }
    if tot <= 0.0 {
        0.0
    } else {
        1.0 - sq / (tot * tot)
    }
}

#[inline]
pub(crate) fn gini_counts(counts: &[usize], w: &[f64]) -> f64 {
    gini_masses(counts.iter().zip(w).map(|(&c, &wj)| wj * c as f64))
}

/// `n(t) * g(t)` for one node given its class counts.
#[inline]
pub(crate) fn weighted_gini(counts: &[usize], w: &[f64]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        0.0
    } else {
        n as f64 * gini_counts(counts, w)
    }
}

#[inline]
pub(crate) fn two_node_counts(left: &[usize], right: &[usize], w: &[f64]) -> f64 {
    let n: usize = left.iter().sum::<usize>() + right.iter().sum::<usize>();
    (weighted_gini(left, w) + weighted_gini(right, w)) / n as f64
}

/// A committed binary split. Rows satisfying the condition go left.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SplitRule {
    /// `X <= threshold`; missing goes left.
    Numeric { var: usize, threshold: f64 },
    /// `X in levels`; missing goes left iff `missing_left`; unseen levels go right.
    Categorical {
        var: usize,
        levels: Vec<u32>,
        missing_left: bool,
    },
    /// `coef . (X1, X2) <= threshold`; either coordinate missing goes left.
    Linear {
        vars: [usize; 2],
        coef: [f64; 2],
        threshold: f64,
    },
    /// `X` missing.
    Missing { var: usize },
}

impl SplitRule {
    pub fn vars(&self) -> Vec<usize> {
        match self {
            SplitRule::Numeric { var, .. } | SplitRule::Categorical { var, .. } | SplitRule::Missing { var } => {
                vec![*var]
            }
            SplitRule::Linear { vars, .. } => vars.to_vec(),
        }
    }

    /// Route one observation given an accessor for its predictor cells.
    pub fn goes_left_with(&self, cell: impl Fn(usize) -> Cell) -> bool {
        match self {
            SplitRule::Numeric { var, threshold } => match cell(*var) {
                Cell::Num(v) => v.is_nan() || v <= *threshold,
                Cell::Cat(_) => true,
            },
            SplitRule::Categorical {
                var,
                levels,
                missing_left,
            } => match cell(*var) {
                Cell::Cat(None) => *missing_left,
                Cell::Cat(Some(code)) => levels.binary_search(&code).is_ok(),
                Cell::Num(_) => false,
            },
            SplitRule::Linear { vars, coef, threshold } => match (cell(vars[0]), cell(vars[1])) {
                (Cell::Num(a), Cell::Num(b)) => a.is_nan() || b.is_nan() || coef[0] * a + coef[1] * b <= *threshold,
                _ => true,
            },
            SplitRule::Missing { var } => cell(*var).is_missing(),
        }
    }

    pub fn goes_left(&self, row: &[Cell]) -> bool {
        self.goes_left_with(|v| row[v])
    }

    pub fn goes_left_data(&self, data: &Dataset, r: usize) -> bool {
        self.goes_left_with(|v| data.cell(r, v))
    }
}

/// Which test led to the split.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelectionPath {
    Main,
    Interaction,
    Linear,
    Fallback,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitDecision {
    pub rule: SplitRule,
    pub path: SelectionPath,
    /// Variables chosen by the selection tests (one, or a pair).
    pub selected: Vec<usize>,
    /// Weighted Gini sum achieved by the search (two- or four-node).
    pub impurity: f64,
}

/// Bonferroni thresholds for one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelectionThresholds {
    pub k: usize,
    pub k_numeric: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl SelectionThresholds {
    pub fn new(k: usize, k_numeric: usize) -> SelectionThresholds {
        let kf = k as f64;
        let k1 = k_numeric as f64;
        SelectionThresholds {
            k,
            k_numeric,
            alpha: if k > 0 { 0.05 / kf } else { 0.05 },
            beta: if k > 1 { 0.05 / (kf * (kf - 1.0)) } else { 0.0 },
            gamma: if k_numeric > 1 { 0.05 / (k1 * (k1 - 1.0)) } else { 0.0 },
        }
    }

    pub fn main_critical(&self) -> f64 {
        chi2_1_upper_quantile(self.alpha)
    }

    pub fn interaction_critical(&self) -> f64 {
        chi2_1_upper_quantile(self.beta)
    }

    pub fn linear_critical(&self) -> f64 {
        chi2_1_upper_quantile(self.gamma)
    }
}

/// Variables selected at a node.
#[derive(Clone, Debug, PartialEq)]
pub enum Selection {
    Main(usize),
    Interaction(usize, usize),
    Linear(usize, usize, DiscriminantDirection),
    Fallback(usize),
}

impl Selection {
    pub fn path(&self) -> SelectionPath {
        match self {
            Selection::Main(_) => SelectionPath::Main,
            Selection::Interaction(..) => SelectionPath::Interaction,
            Selection::Linear(..) => SelectionPath::Linear,
            Selection::Fallback(_) => SelectionPath::Fallback,
        }
    }

    pub fn vars(&self) -> Vec<usize> {
        match self {
            Selection::Main(v) | Selection::Fallback(v) => vec![*v],
            Selection::Interaction(a, b) | Selection::Linear(a, b, _) => vec![*a, *b],
        }
    }
}

/// Outcome of the selection tests with the statistics that were computed.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionReport {
    pub selection: Selection,
    pub thresholds: SelectionThresholds,
    pub main: Vec<(usize, f64)>,
    pub interaction: Vec<((usize, usize), f64)>,
    pub linear: Vec<((usize, usize), f64)>,
}

/// Split-search configuration for one node.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitConfig {
    /// Allow linear splits (selection with the linear option).
    pub linear: bool,
    /// Run interaction tests when no main effect is significant.
    pub interactions: bool,
    pub m0: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            linear: true,
            interactions: true,
            m0: 5,
        }
    }
}

/// Data and class model shared by all searches in one tree.
#[derive(Clone, Copy, Debug)]
pub struct SplitContext<'a> {
    pub data: &'a Dataset,
    pub classes: &'a ClassModel,
    /// Training sample size `N` (used by the restricted split points).
    pub n_train: usize,
}

impl SplitContext<'_> {
    pub(crate) fn counts(&self, rows: &[usize]) -> Vec<usize> {
        self.data.counts_of(rows)
    }

    pub(crate) fn w(&self) -> &[f64] {
        &self.classes.weights
    }
}

fn argmax_first<T: Copy>(items: &[(T, f64)]) -> Option<(T, f64)> {
    let mut best: Option<(T, f64)> = None;
    for &(k, v) in items {
        match best {
            Some((_, b)) if v <= b => {}
            _ => best = Some((k, v)),
        }
    }
    best
}

fn nonconstant(ctx: &SplitContext, rows: &[usize], candidates: &[usize]) -> Vec<usize> {
    candidates
        .iter()
        .copied()
        .filter(|&v| is_nonconstant(ctx.data, rows, v))
        .collect()
}

/// Run the selection tests over `candidates` (predictor indices).
///
/// With `linear` the interaction stage is followed by the discriminant
/// tests on numeric pairs. Returns `None` when no candidate is non-constant.
pub fn select_variables(
    ctx: &SplitContext,
    rows: &[usize],
    candidates: &[usize],
    interactions: bool,
    linear: bool,
) -> Option<SelectionReport> {
    let vars = nonconstant(ctx, rows, candidates);
    let k = vars.len();
    if k == 0 {
        return None;
    }
    let numeric: Vec<usize> = vars
        .iter()
        .copied()
        .filter(|&v| ctx.data.kind(v) == PredictorKind::Numeric)
        .collect();
    let thresholds = SelectionThresholds::new(k, numeric.len());
    let mut report = SelectionReport {
        selection: Selection::Main(vars[0]),
        thresholds,
        main: Vec::new(),
        interaction: Vec::new(),
        linear: Vec::new(),
    };
    if k == 1 {
        report.main.push((vars[0], f64::INFINITY));
        return Some(report);
    }
    report.main = vars
        .iter()
        .map(|&v| (v, main_effect_stat(ctx.data, rows, v).value))
        .collect();
    let (best_main, wm) = argmax_first(&report.main).expect("k > 1");
    if wm > thresholds.main_critical() {
        report.selection = Selection::Main(best_main);
        return Some(report);
    }
    report.selection = Selection::Fallback(best_main);
    if !interactions {
        return Some(report);
    }
    for (i, &a) in vars.iter().enumerate() {
        for &b in &vars[i + 1..] {
            report
                .interaction
                .push(((a, b), interaction_stat(ctx.data, rows, a, b).value));
        }
    }
    if let Some(((a, b), wi)) = argmax_first(&report.interaction) {
        if wi > thresholds.interaction_critical() {
            report.selection = Selection::Interaction(a, b);
            return Some(report);
        }
    }
    if !linear || numeric.len() <= 1 {
        return Some(report);
    }
    let mut best: Option<((usize, usize), f64, DiscriminantDirection)> = None;
    for (i, &a) in numeric.iter().enumerate() {
        for &b in &numeric[i + 1..] {
            let (stat, dir) = linear_stat(ctx.data, rows, a, b);
            report.linear.push(((a, b), stat.value));
            if let Some(dir) = dir {
                if best.as_ref().is_none_or(|(_, v, _)| stat.value > *v) {
                    best = Some(((a, b), stat.value, dir));
                }
            }
        }
    }
    if let Some(((a, b), wl, dir)) = best {
        if wl > thresholds.linear_critical() {
            report.selection = Selection::Linear(a, b, dir);
        }
    }
    Some(report)
}

/// Best univariate split on one variable.
pub fn split_univariate(ctx: &SplitContext, rows: &[usize], var: usize, m0: usize) -> Option<(SplitRule, f64)> {
    match ctx.data.kind(var) {
        PredictorKind::Numeric => split_numeric(ctx, rows, var, m0),
        PredictorKind::Categorical => {
            let s = split_categorical(ctx, rows, var)?;
            Some((s.rule, s.impurity))
        }
    }
}

/// Split on the discriminant coordinate: scan every midpoint of the
/// projected values; rows missing either variable stay left.
pub fn split_linear(
    ctx: &SplitContext,
    rows: &[usize],
    a: usize,
    b: usize,
    dir: &DiscriminantDirection,
) -> Option<(SplitRule, f64)> {
    let mut base_left = vec![0usize; ctx.data.n_classes()];
    let mut projected = Vec::with_capacity(rows.len());
    for &r in rows {
        let (x, y) = (ctx.data.num(r, a), ctx.data.num(r, b));
        if x.is_nan() || y.is_nan() {
            base_left[ctx.data.label(r)] += 1;
        } else {
            projected.push((dir.project([x, y]), ctx.data.label(r)));
        }
    }
    projected.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (threshold, impurity) = numeric::scan_midpoints(&projected, &base_left, ctx.w())?;
    Some((
        SplitRule::Linear {
            vars: [a, b],
            coef: dir.coef,
            threshold,
        },
        impurity,
    ))
}

fn split_pair(ctx: &SplitContext, rows: &[usize], a: usize, b: usize, m0: usize) -> Option<PairSearch> {
    use PredictorKind::*;
    match (ctx.data.kind(a), ctx.data.kind(b)) {
        (Numeric, Numeric) => split_pair_numeric(ctx, rows, a, b, m0),
        (Numeric, Categorical) => split_pair_mixed(ctx, rows, a, b, m0),
        (Categorical, Numeric) => split_pair_mixed(ctx, rows, b, a, m0),
        (Categorical, Categorical) => split_pair_categorical(ctx, rows, a, b),
    }
}

/// Choose the split of a node, or `None` when it should be a leaf.
///
/// `candidates` restricts the predictors considered (all when `None`).
pub fn choose_split(
    ctx: &SplitContext,
    rows: &[usize],
    cfg: &SplitConfig,
    candidates: Option<&[usize]>,
) -> Option<SplitDecision> {
    let all: Vec<usize> = (0..ctx.data.n_predictors()).collect();
    let candidates = candidates.unwrap_or(&all);
    let report = select_variables(ctx, rows, candidates, cfg.interactions, cfg.linear)?;
    decide(ctx, rows, cfg, &report)
}

pub(crate) fn decide(ctx: &SplitContext, rows: &[usize], cfg: &SplitConfig, report: &SelectionReport) -> Option<SplitDecision> {
    let univariate = |var: usize, path: SelectionPath| {
        split_univariate(ctx, rows, var, cfg.m0).map(|(rule, impurity)| SplitDecision {
            rule,
            path,
            selected: vec![var],
            impurity,
        })
    };
    match &report.selection {
        Selection::Main(v) => univariate(*v, SelectionPath::Main),
        Selection::Fallback(v) => univariate(*v, SelectionPath::Fallback),
        Selection::Interaction(a, b) => match split_pair(ctx, rows, *a, *b, cfg.m0) {
            Some(p) => Some(SplitDecision {
                rule: p.rule,
                path: SelectionPath::Interaction,
                selected: vec![*a, *b],
                impurity: p.impurity,
            }),
            None => {
                let wm = |v: usize| report.main.iter().find(|m| m.0 == v).map_or(0.0, |m| m.1);
                let v = if wm(*b) > wm(*a) { *b } else { *a };
                split_univariate(ctx, rows, v, cfg.m0).map(|(rule, impurity)| SplitDecision {
                    rule,
                    path: SelectionPath::Interaction,
                    selected: vec![*a, *b],
                    impurity,
                })
            }
        },
        Selection::Linear(a, b, dir) => match split_linear(ctx, rows, *a, *b, dir) {
            Some((rule, impurity)) => Some(SplitDecision {
                rule,
                path: SelectionPath::Linear,
                selected: vec![*a, *b],
                impurity,
            }),
            None => {
                let (v, _) = argmax_first(&report.main)?;
                univariate(v, SelectionPath::Fallback)
            }
        },
    }
}
