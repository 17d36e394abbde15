use super::categorical::{best_prefix, first_superclass, present_levels, rule_from_levels, sum_levels, prefix_order};
use super::numeric::{commit_threshold, usable_thresholds};
use super::{weighted_gini, SplitContext, SplitRule};

/// Result of a two-level search. Only the top-level split is kept.
#[derive(Clone, Debug, PartialEq)]
pub struct PairSearch {
    pub rule: SplitRule,
    /// Four-node impurity of the committed split with its best refinements.
    pub impurity: f64,
    /// Best value with the first variable on top (infinite if none).
    pub first_value: f64,
    /// Best value with the second variable on top (infinite if none).
    pub second_value: f64,
}

/// Rows of a node sorted by one numeric variable, for repeated threshold
/// scans over subsets.
struct NumericScan {
    /// (value, local index) for non-missing values, ascending.
    sorted: Vec<(f64, usize)>,
    missing: Vec<usize>,
    thresholds: Vec<f64>,
}

impl NumericScan {
    fn new(ctx: &SplitContext, rows: &[usize], var: usize, m0: usize) -> NumericScan {
        let mut sorted = Vec::new();
        let mut missing = Vec::new();
        let mut values = Vec::new();
        for (i, &r) in rows.iter().enumerate() {
            let v = ctx.data.num(r, var);
            if v.is_nan() {
                missing.push(i);
            } else {
                sorted.push((v, i));
                values.push(v);
            }
        }
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let thresholds = usable_thresholds(&values, ctx.n_train, m0);
        NumericScan {
            sorted,
            missing,
            thresholds,
        }
    }

    fn goes_left(&self, value: f64, c: f64) -> bool {
        value.is_nan() || value <= c
    }

    /// Minimum of `n_L g_L + n_R g_R` over the thresholds, restricted to
    /// rows with `part[i]`. Without thresholds the part stays whole.
    fn best_sum(&self, part: &[bool], labels: &[usize], j: usize, w: &[f64]) -> f64 {
        let mut total = vec![0usize; j];
        for (i, &p) in part.iter().enumerate() {
            if p {
                total[labels[i]] += 1;
            }
        }
        if self.thresholds.is_empty() {
            return weighted_gini(&total, w);
        }
        let mut left = vec![0usize; j];
        for &i in &self.missing {
            if part[i] {
                left[labels[i]] += 1;
            }
        }
        let mut best = f64::INFINITY;
        let mut k = 0;
        for &d in &self.thresholds {
            while k < self.sorted.len() && self.sorted[k].0 <= d {
                let i = self.sorted[k].1;
                if part[i] {
                    left[labels[i]] += 1;
                }
                k += 1;
            }
            let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
            let s = weighted_gini(&left, w) + weighted_gini(&right, w);
            if s < best {
                best = s;
            }
        }
        best
    }
}

fn local_labels(ctx: &SplitContext, rows: &[usize]) -> Vec<usize> {
    rows.iter().map(|&r| ctx.data.label(r)).collect()
}

fn numeric_values(ctx: &SplitContext, rows: &[usize], var: usize) -> Vec<f64> {
    rows.iter().map(|&r| ctx.data.num(r, var)).collect()
}

/// Best top-level threshold on `top` with both children refined on `sub`.
fn numeric_top(
    rows: &[usize],
    top: &NumericScan,
    top_values: &[f64],
    sub_best: impl Fn(&[bool]) -> f64,
) -> Option<(f64, f64)> {
    let n = rows.len();
    let mut best: Option<(f64, f64)> = None;
    for &c in &top.thresholds {
        let part: Vec<bool> = top_values.iter().map(|&v| top.goes_left(v, c)).collect();
        let n_left = part.iter().filter(|&&p| p).count();
        if n_left == 0 || n_left == n {
            continue;
        }
        let other: Vec<bool> = part.iter().map(|p| !p).collect();
        let value = (sub_best(&part) + sub_best(&other)) / n as f64;
        if best.is_none_or(|(_, b)| value < b) {
            best = Some((c, value));
        }
    }
    best
}

/// Two-level search for two numeric predictors over the restricted split
/// points of each.
pub fn split_pair_numeric(ctx: &SplitContext, rows: &[usize], v1: usize, v2: usize, m0: usize) -> Option<PairSearch> {
    let j = ctx.data.n_classes();
    let w = ctx.w();
    let labels = local_labels(ctx, rows);
    let s1 = NumericScan::new(ctx, rows, v1, m0);
    let s2 = NumericScan::new(ctx, rows, v2, m0);
    let x1 = numeric_values(ctx, rows, v1);
    let x2 = numeric_values(ctx, rows, v2);
    let first = numeric_top(rows, &s1, &x1, |p| s2.best_sum(p, &labels, j, w));
    let second = numeric_top(rows, &s2, &x2, |p| s1.best_sum(p, &labels, j, w));
    let fv = first.map_or(f64::INFINITY, |f| f.1);
    let sv = second.map_or(f64::INFINITY, |s| s.1);
    let (var, values, (c, impurity)) = match (first, second) {
        (None, None) => return None,
        (Some(f), _) if fv <= sv => (v1, &x1, f),
        (_, Some(s)) => (v2, &x2, s),
        (Some(f), None) => (v1, &x1, f),
    };
    Some(PairSearch {
        rule: SplitRule::Numeric {
            var,
            threshold: commit_threshold(values, c),
        },
        impurity,
        first_value: fv,
        second_value: sv,
    })
}

/// Level-by-class table of a categorical variable over the rows of `part`.
fn part_table(levels: &[usize], labels: &[usize], part: &[bool], n_levels: usize, j: usize) -> Vec<Vec<usize>> {
    let mut t = vec![vec![0usize; j]; n_levels];
    for i in 0..levels.len() {
        if part[i] {
            t[levels[i]][labels[i]] += 1;
        }
    }
    t
}

/// Prefix-scan refinement of one part on a categorical variable, with
/// orderings relative to the first superclass `first`.
fn categorical_sum(table: &[Vec<usize>], first: &[bool], w: &[f64]) -> f64 {
    let order = prefix_order(table, first, w);
    if order.is_empty() {
        return 0.0;
    }
    best_prefix(table, &order, w, true).map_or(0.0, |b| b.1)
}

/// Two-level search for a numeric and a categorical predictor.
pub fn split_pair_mixed(ctx: &SplitContext, rows: &[usize], num: usize, cat: usize, m0: usize) -> Option<PairSearch> {
    let j = ctx.data.n_classes();
    let w = ctx.w();
    let n = rows.len();
    let labels = local_labels(ctx, rows);
    let nlev = ctx.data.n_levels(cat) + 1;
    let levels: Vec<usize> = rows.iter().map(|&r| ctx.data.level(r, cat) as usize).collect();
    let all = vec![true; n];
    if present_levels(&part_table(&levels, &labels, &all, nlev, j)).len() < 2 {
        return None;
    }
    let scan = NumericScan::new(ctx, rows, num, m0);
    let x = numeric_values(ctx, rows, num);
    let refine_cat = |part: &[bool]| {
        let table = part_table(&levels, &labels, part, nlev, j);
        let counts = sum_levels(&table, 0..nlev);
        let first = first_superclass(&counts, ctx.classes);
        categorical_sum(&table, &first, w)
    };
    // Step 1: numeric split on top, categorical refinements below.
    let step1 = numeric_top(rows, &scan, &x, refine_cat);
    let delta1 = step1.map_or(f64::INFINITY, |s| s.1);

    // Step 2: categorical candidates from the orderings within each side of c*.
    let mut cat_best: Option<(Vec<usize>, f64)> = None;
    if let Some((c_star, _)) = step1 {
        for side in [true, false] {
            let sub: Vec<bool> = x.iter().map(|&v| scan.goes_left(v, c_star) == side).collect();
            let table = part_table(&levels, &labels, &sub, nlev, j);
            let first = first_superclass(&sum_levels(&table, 0..nlev), ctx.classes);
            let order = prefix_order(&table, &first, w);
            for i in 1..order.len() {
                let u = &order[..i];
                let part: Vec<bool> = levels.iter().map(|l| u.contains(l)).collect();
                let other: Vec<bool> = part.iter().map(|p| !p).collect();
                let value =
                    (scan.best_sum(&part, &labels, j, w) + scan.best_sum(&other, &labels, j, w)) / n as f64;
                if cat_best.as_ref().is_none_or(|(_, b)| value < *b) {
                    cat_best = Some((u.to_vec(), value));
                }
            }
        }
    }
    let delta_cat = cat_best.as_ref().map_or(f64::INFINITY, |c| c.1);
    match (step1, cat_best) {
        (Some((c, d1)), _) if d1 <= delta_cat => Some(PairSearch {
            rule: SplitRule::Numeric {
                var: num,
                threshold: commit_threshold(&x, c),
            },
            impurity: d1,
            first_value: delta1,
            second_value: delta_cat,
        }),
        (_, Some((u, dc))) => Some(PairSearch {
            rule: rule_from_levels(cat, nlev - 1, &u),
            impurity: dc,
            first_value: delta1,
            second_value: delta_cat,
        }),
        _ => None,
    }
}

/// Level cube `cube[a][b][j]` for two categorical predictors.
fn level_cube(ctx: &SplitContext, rows: &[usize], a: usize, b: usize) -> Vec<Vec<Vec<usize>>> {
    let na = ctx.data.n_levels(a) + 1;
    let nb = ctx.data.n_levels(b) + 1;
    let j = ctx.data.n_classes();
    let mut cube = vec![vec![vec![0usize; j]; nb]; na];
    for &r in rows {
        cube[ctx.data.level(r, a) as usize][ctx.data.level(r, b) as usize][ctx.data.label(r)] += 1;
    }
    cube
}

fn transpose_cube(cube: &[Vec<Vec<usize>>]) -> Vec<Vec<Vec<usize>>> {
    let na = cube.len();
    let nb = cube.first().map_or(0, |c| c.len());
    (0..nb).map(|b| (0..na).map(|a| cube[a][b].clone()).collect()).collect()
}

/// Candidate top-level sets for the first variable of a categorical pair.
fn top_sets(marginal: &[Vec<usize>], first: &[bool], w: &[f64], binary: bool) -> Vec<Vec<usize>> {
    let present = present_levels(marginal);
    let k = present.len();
    if k < 2 {
        return Vec::new();
    }
    let all = if binary { k <= 11 } else { k <= 5 };
    if all {
        (1u64..(1u64 << (k - 1)))
            .map(|mask| (0..k - 1).filter(|&i| mask >> i & 1 == 1).map(|i| present[i]).collect())
            .collect()
    } else {
        let order = prefix_order(marginal, first, w);
        (1..order.len()).map(|i| order[..i].to_vec()).collect()
    }
}

/// One direction of the categorical pair search: best top-level set on the
/// first axis of `cube` with prefix refinements on the second.
fn categorical_top(cube: &[Vec<Vec<usize>>], first: &[bool], w: &[f64], binary: bool, n: usize) -> Option<(Vec<usize>, f64)> {
    let marginal: Vec<Vec<usize>> = cube.iter().map(|plane| sum_levels(plane, 0..plane.len())).collect();
    let nb = cube.first().map_or(0, |c| c.len());
    let j = first.len();
    let mut best: Option<(Vec<usize>, f64)> = None;
    for u in top_sets(&marginal, first, w, binary) {
        let mut in_u = vec![false; cube.len()];
        for &a in &u {
            in_u[a] = true;
        }
        let mut left = vec![vec![0usize; j]; nb];
        let mut right = vec![vec![0usize; j]; nb];
        for (a, plane) in cube.iter().enumerate() {
            let dst = if in_u[a] { &mut left } else { &mut right };
            for (d, s) in dst.iter_mut().zip(plane) {
                for (x, y) in d.iter_mut().zip(s) {
                    *x += y;
                }
            }
        }
        let value = (categorical_sum(&left, first, w) + categorical_sum(&right, first, w)) / n as f64;
        if best.as_ref().is_none_or(|(_, b)| value < *b) {
            best = Some((u, value));
        }
    }
    best
}

/// Two-level search for two categorical predictors.
pub fn split_pair_categorical(ctx: &SplitContext, rows: &[usize], v1: usize, v2: usize) -> Option<PairSearch> {
    let w = ctx.w();
    let counts = ctx.counts(rows);
    let binary = counts.iter().filter(|&&c| c > 0).count() <= 2;
    let first = first_superclass(&counts, ctx.classes);
    let cube = level_cube(ctx, rows, v1, v2);
    let cube_t = transpose_cube(&cube);
    let has_two = |c: &[Vec<Vec<usize>>]| {
        let m: Vec<Vec<usize>> = c.iter().map(|p| sum_levels(p, 0..p.len())).collect();
        present_levels(&m).len() >= 2
    };
    if !has_two(&cube) || !has_two(&cube_t) {
        return None;
    }
    let n = rows.len();
    let d1 = categorical_top(&cube, &first, w, binary, n);
    let d2 = categorical_top(&cube_t, &first, w, binary, n);
    let fv = d1.as_ref().map_or(f64::INFINITY, |d| d.1);
    let sv = d2.as_ref().map_or(f64::INFINITY, |d| d.1);
    let (var, (set, impurity)) = match (d1, d2) {
        (Some(a), _) if fv <= sv => (v1, a),
        (_, Some(b)) => (v2, b),
        (Some(a), None) => (v1, a),
        (None, None) => return None,
    };
    Some(PairSearch {
        rule: rule_from_levels(var, ctx.data.n_levels(var), &set),
        impurity,
        first_value: fv,
        second_value: sv,
    })
}
