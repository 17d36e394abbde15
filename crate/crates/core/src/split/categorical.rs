use serde::{Deserialize, Serialize};

use super::{weighted_gini, SplitContext, SplitRule};
use crate::dataset::ClassModel;
use crate::stats::lda_leading;

/// Best categorical split: the levels sent left (missing is the extra level
/// `n_levels`) and the achieved two-node impurity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoricalSplit {
    pub rule: SplitRule,
    pub left: Vec<usize>,
    pub impurity: f64,
}

/// Level-by-class counts of `var` over `rows`; the last row of the table
/// counts missing values.
pub(crate) fn level_table(ctx: &SplitContext, rows: &[usize], var: usize) -> Vec<Vec<usize>> {
    let nlev = ctx.data.n_levels(var);
    let mut table = vec![vec![0usize; ctx.data.n_classes()]; nlev + 1];
    for &r in rows {
        table[ctx.data.level(r, var) as usize][ctx.data.label(r)] += 1;
    }
    table
}

pub(crate) fn present_levels(table: &[Vec<usize>]) -> Vec<usize> {
    (0..table.len()).filter(|&a| table[a].iter().any(|&c| c > 0)).collect()
}

pub(crate) fn sum_levels(table: &[Vec<usize>], levels: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut out = vec![0usize; table.first().map_or(0, |r| r.len())];
    for a in levels {
        for (o, c) in out.iter_mut().zip(&table[a]) {
            *o += c;
        }
    }
    out
}

/// Order the levels with data by their weighted share of the first
/// (super)class, ascending; ties keep level order. `first[j]` marks the
/// classes in the first superclass.
pub fn prefix_order(table: &[Vec<usize>], first: &[bool], w: &[f64]) -> Vec<usize> {
    let mut keyed: Vec<(usize, f64, f64)> = present_levels(table)
        .into_iter()
        .map(|a| {
            let mut num = 0.0;
            let mut den = 0.0;
            for (j, &c) in table[a].iter().enumerate() {
                let m = w[j] * c as f64;
                den += m;
                if first[j] {
                    num += m;
                }
            }
            (a, num, den)
        })
        .collect();
    keyed.sort_by(|x, y| {
        let share = |t: &(usize, f64, f64)| if t.2 > 0.0 { t.1 / t.2 } else { 0.0 };
        share(x).total_cmp(&share(y)).then(x.0.cmp(&y.0))
    });
    keyed.into_iter().map(|k| k.0).collect()
}

/// Classes forming the first superclass for a node with counts `counts`:
/// the smaller class when at most two are present, otherwise the
/// cost-minimizing class on its own.
pub(crate) fn first_superclass(counts: &[usize], classes: &ClassModel) -> Vec<bool> {
    let present: Vec<usize> = (0..counts.len()).filter(|&j| counts[j] > 0).collect();
    let mut first = vec![false; counts.len()];
    if present.len() <= 2 {
        if let Some(&j) = present.first() {
            first[j] = true;
        }
    } else {
        first[classes.assign(counts)] = true;
    }
    first
}

/// Best prefix of `order`: returns the prefix length and the unnormalized
/// sum `n_L g_L + n_R g_R`. With `allow_whole` the full order (no split)
/// is a candidate too. Ties keep the shortest prefix.
pub(crate) fn best_prefix(table: &[Vec<usize>], order: &[usize], w: &[f64], allow_whole: bool) -> Option<(usize, f64)> {
    let total = sum_levels(table, order.iter().copied());
    let mut left = vec![0usize; total.len()];
    let mut best: Option<(usize, f64)> = None;
    let last = if allow_whole { order.len() } else { order.len().saturating_sub(1) };
    for (i, &a) in order.iter().enumerate().take(last) {
        for (l, c) in left.iter_mut().zip(&table[a]) {
            *l += c;
        }
        let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
        let s = weighted_gini(&left, w) + weighted_gini(&right, w);
        if best.is_none_or(|(_, b)| s < b) {
            best = Some((i + 1, s));
        }
    }
    best
}

/// Exhaustive search over all two-way partitions of the levels with data;
/// the last such level always stays right. Returns the left set and the
/// unnormalized impurity sum.
pub fn exhaustive_categorical(table: &[Vec<usize>], w: &[f64]) -> Option<(Vec<usize>, f64)> {
    let present = present_levels(table);
    let n = present.len();
    if n < 2 {
        return None;
    }
    let total = sum_levels(table, present.iter().copied());
    let mut best: Option<(u64, f64)> = None;
    for mask in 1u64..(1u64 << (n - 1)) {
        let left = sum_levels(table, (0..n - 1).filter(|&i| mask >> i & 1 == 1).map(|i| present[i]));
        let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
        let s = weighted_gini(&left, w) + weighted_gini(&right, w);
        if best.is_none_or(|(_, b)| s < b) {
            best = Some((mask, s));
        }
    }
    let (mask, s) = best?;
    Some(((0..n - 1).filter(|&i| mask >> i & 1 == 1).map(|i| present[i]).collect(), s))
}

fn mapped_search(table: &[Vec<usize>], present: &[usize], classes: &ClassModel, w: &[f64]) -> Option<Vec<usize>> {
    let j = classes.n_classes();
    let mapped: Vec<usize> = present.iter().map(|&a| classes.assign(&table[a])).collect();
    let mut grouped = vec![vec![0usize; j]; j];
    for (&a, &m) in present.iter().zip(&mapped) {
        for (g, c) in grouped[m].iter_mut().zip(&table[a]) {
            *g += c;
        }
    }
    let (groups, _) = exhaustive_categorical(&grouped, w)?;
    Some(
        present
            .iter()
            .zip(&mapped)
            .filter(|(_, m)| groups.contains(m))
            .map(|(&a, _)| a)
            .collect(),
    )
}

fn dummy_lda_search(table: &[Vec<usize>], present: &[usize], w: &[f64], n_classes: usize) -> Option<Vec<usize>> {
    let dim = present.len();
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (k, &a) in present.iter().enumerate() {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        for (j, &c) in table[a].iter().enumerate() {
            for _ in 0..c {
                points.push(e.clone());
                labels.push(j);
            }
        }
    }
    let coef = lda_leading(&points, &labels, n_classes)?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&x, &y| coef[x].total_cmp(&coef[y]).then(x.cmp(&y)));
    let total = sum_levels(table, present.iter().copied());
    let mut left = vec![0usize; total.len()];
    let mut best: Option<(usize, f64)> = None;
    for i in 0..dim - 1 {
        for (l, c) in left.iter_mut().zip(&table[present[order[i]]]) {
            *l += c;
        }
        if coef[order[i + 1]] <= coef[order[i]] {
            continue;
        }
        let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
        let s = weighted_gini(&left, w) + weighted_gini(&right, w);
        if best.is_none_or(|(_, b)| s < b) {
            best = Some((i + 1, s));
        }
    }
    let (len, _) = best?;
    Some(order[..len].iter().map(|&k| present[k]).collect())
}

pub(crate) fn rule_from_levels(var: usize, n_levels: usize, left: &[usize]) -> SplitRule {
    let mut levels: Vec<u32> = left.iter().filter(|&&a| a < n_levels).map(|&a| a as u32).collect();
    levels.sort_unstable();
    SplitRule::Categorical {
        var,
        levels,
        missing_left: left.contains(&n_levels),
    }
}

/// Split-set search for a categorical predictor (missing values form
/// their own level).
pub fn split_categorical(ctx: &SplitContext, rows: &[usize], var: usize) -> Option<CategoricalSplit> {
    let table = level_table(ctx, rows, var);
    let present = present_levels(&table);
    if present.len() < 2 {
        return None;
    }
    let w = ctx.w();
    let counts = sum_levels(&table, present.iter().copied());
    let n: usize = counts.iter().sum();
    let j_present = counts.iter().filter(|&&c| c > 0).count();
    let n_classes = ctx.data.n_classes();
    let left: Vec<usize> = if j_present <= 2 {
        let first = first_superclass(&counts, ctx.classes);
        let order = prefix_order(&table, &first, w);
        let (len, _) = best_prefix(&table, &order, w, false)?;
        order[..len].to_vec()
    } else if present.len() <= 11 {
        exhaustive_categorical(&table, w)?.0
    } else {
        let mapped = if n_classes <= 11 && present.len() > 20 {
            mapped_search(&table, &present, ctx.classes, w)
        } else {
            None
        };
        match mapped.or_else(|| dummy_lda_search(&table, &present, w, n_classes)) {
            Some(l) => l,
            None => {
                let first = first_superclass(&counts, ctx.classes);
                let order = prefix_order(&table, &first, w);
                let (len, _) = best_prefix(&table, &order, w, false)?;
                order[..len].to_vec()
            }
        }
    };
    let lc = sum_levels(&table, left.iter().copied());
    let rc: Vec<usize> = counts.iter().zip(&lc).map(|(t, l)| t - l).collect();
    let impurity = (weighted_gini(&lc, w) + weighted_gini(&rc, w)) / n as f64;
    let mut left = left;
    left.sort_unstable();
    Some(CategoricalSplit {
        rule: rule_from_levels(var, ctx.data.n_levels(var), &left),
        left,
        impurity,
    })
}
