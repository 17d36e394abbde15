//! Synthetic data generators, the root-selection bias simulation and
//! cross-validated evaluation.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{ClassModel, Column, CostMatrix, Dataset};
use crate::error::{Error, Result};
use crate::split::{choose_split, SplitConfig, SplitContext, SplitRule};
use crate::tree::{fit, stratified_folds, GrowConfig, Method, Tree};

/// Independent RNG stream `stream` of master seed `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn labels(j: usize) -> Vec<String> {
    (1..=j).map(|c| c.to_string()).collect()
}

fn num(name: &str, v: Vec<f64>) -> (String, Column, Vec<String>) {
    (name.to_string(), Column::Numeric(v), vec![])
}

fn cat(name: &str, v: Vec<Option<u32>>, n_levels: usize) -> (String, Column, Vec<String>) {
    (
        name.to_string(),
        Column::Categorical(v),
        (1..=n_levels).map(|l| l.to_string()).collect(),
    )
}

/// Class of the square containing `(x1, x2)` on the 4x4 board over
/// `[-1, 1]^2`: 0 when the column and row indices have an even sum.
pub fn chessboard_class(x1: f64, x2: f64) -> usize {
    let cell = |x: f64| (((x + 1.0) / 0.5).floor() as i64).clamp(0, 3);
    ((cell(x1) + cell(x2)) % 2) as usize
}

/// Two classes on alternating squares of a 4x4 board in `(x1, x2)` plus
/// eight uniform noise variables.
pub fn gen_chessboard(n: usize, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::Config("chessboard needs n >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut cols: Vec<Vec<f64>> = (0..10).map(|_| Vec::with_capacity(n)).collect();
        let mut y = Vec::with_capacity(n);
        for _ in 0..n {
            let class = rng.random_range(0..2usize);
            // Squares of this class: (i + j) % 2 == class.
            let s = rng.random_range(0..8usize);
            let i = s / 2;
            let j = 2 * (s % 2) + (i + class) % 2;
            cols[0].push(-1.0 + 0.5 * (i as f64 + rng.random::<f64>()));
            cols[1].push(-1.0 + 0.5 * (j as f64 + rng.random::<f64>()));
            for col in cols.iter_mut().skip(2) {
                col.push(rng.random::<f64>());
            }
            y.push(class);
        }
        if y.contains(&0) && y.contains(&1) {
            let preds = cols
                .into_iter()
                .enumerate()
                .map(|(v, c)| num(&format!("X{}", v + 1), c))
                .collect();
            return Dataset::from_columns("class", labels(2), preds, y);
        }
    }
}

/// Class 1 on the unit circle, classes 2 and 3 on the two diagonals, three
/// uniform and three 21-level categorical noise variables.
pub fn gen_circle_lines(n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 || !n.is_multiple_of(3) {
        return Err(Error::Config("circle-lines needs n divisible by 3".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per = n / 3;
    let mut x1 = Vec::with_capacity(n);
    let mut x2 = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for class in 0..3 {
        for _ in 0..per {
            let (a, b) = match class {
                0 => {
                    let t = rng.random_range(0.0..2.0 * PI);
                    (t.cos(), t.sin())
                }
                1 => {
                    let u = rng.random_range(-1.0..1.0);
                    (u, u)
                }
                _ => {
                    let u = rng.random_range(-1.0..1.0);
                    (u, -u)
                }
            };
            x1.push(a);
            x2.push(b);
            y.push(class);
        }
    }
    let mut preds = vec![num("X1", x1), num("X2", x2)];
    for v in 3..=5 {
        preds.push(num(&format!("X{v}"), (0..n).map(|_| rng.random::<f64>()).collect()));
    }
    for v in 6..=8 {
        let col = (0..n).map(|_| Some(rng.random_range(0..21u32))).collect();
        preds.push(cat(&format!("X{v}"), col, 21));
    }
    Dataset::from_columns("class", labels(3), preds, y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BiasScenario {
    Independence,
    Dependence,
}

/// Joint probabilities of `(X2, X3)` in the dependence scenario, in units of 1/24.
const DEPENDENT_X2_X3: [[u32; 6]; 3] = [[2, 2, 1, 1, 1, 1], [1, 1, 2, 2, 1, 1], [1, 1, 1, 1, 2, 2]];

fn draw_weighted(rng: &mut ChaCha8Rng, weights: &[u32]) -> usize {
    let total: u32 = weights.iter().sum();
    let mut u = rng.random_range(0..total);
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    unreachable!("u < total")
}

/// Six predictors, all independent of a balanced binary class.
pub fn gen_bias_scenario(kind: BiasScenario, n: usize, seed: u64) -> Result<Dataset> {
    if n < 2 {
        return Err(Error::Config("bias scenario needs n >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gen_bias_with(kind, n, &mut rng)
}

fn gen_bias_with(kind: BiasScenario, n: usize, rng: &mut ChaCha8Rng) -> Result<Dataset> {
    let y = loop {
        let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..2usize)).collect();
        if y.contains(&0) && y.contains(&1) {
            break y;
        }
    };
    let mut x1 = Vec::with_capacity(n);
    let mut x2 = Vec::with_capacity(n);
    let mut x3 = Vec::with_capacity(n);
    let mut x4 = Vec::with_capacity(n);
    let mut x5 = Vec::with_capacity(n);
    let mut x6 = Vec::with_capacity(n);
    for _ in 0..n {
        x1.push(Some(rng.random_range(0..2u32)));
        match kind {
            BiasScenario::Independence => {
                x2.push(Some(draw_weighted(rng, &[1, 2, 3]) as u32));
                x3.push(Some(rng.random_range(0..6u32)));
                let z: f64 = StandardNormal.sample(rng);
                x4.push(z * z);
                x5.push(StandardNormal.sample(rng));
            }
            BiasScenario::Dependence => {
                let flat: Vec<u32> = DEPENDENT_X2_X3.iter().flatten().copied().collect();
                let cell = draw_weighted(rng, &flat);
                x2.push(Some((cell / 6) as u32));
                x3.push(Some((cell % 6) as u32));
                let a: f64 = StandardNormal.sample(rng);
                let b: f64 = StandardNormal.sample(rng);
                x4.push(a);
                x5.push(0.7 * a + (1.0f64 - 0.49).sqrt() * b);
            }
        }
        x6.push(rng.random::<f64>());
    }
    let preds = vec![
        cat("X1", x1, 2),
        cat("X2", x2, 3),
        cat("X3", x3, 6),
        num("X4", x4),
        num("X5", x5),
        num("X6", x6),
    ];
    Dataset::from_columns("class", labels(2), preds, y)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub scenario: BiasScenario,
    pub trials: usize,
    /// Trials whose root produced a split.
    pub split_trials: usize,
    pub univariate: Vec<usize>,
    /// Appearances in linear splits (each such split counts both variables).
    pub linear: Vec<usize>,
    /// `(univariate + linear / 2) / split_trials`
    pub probabilities: Vec<f64>,
    /// `sqrt(p (1 - p) / split_trials)`
    pub standard_errors: Vec<f64>,
}

/// Root split of one simulated dataset.
pub fn root_split(data: &Dataset) -> Option<SplitRule> {
    let classes = ClassModel::new(data.class_counts(), None, CostMatrix::unit(data.n_classes()));
    let ctx = SplitContext {
        data,
        classes: &classes,
        n_train: data.n_rows(),
    };
    let rows: Vec<usize> = (0..data.n_rows()).collect();
    choose_split(&ctx, &rows, &SplitConfig::default(), None).map(|d| d.rule)
}

/// Count which predictors the root split uses over `trials` simulated
/// datasets of size `n`.
pub fn run_bias_simulation(kind: BiasScenario, trials: usize, n: usize, seed: u64) -> Result<BiasReport> {
    if trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    let rules: Vec<Option<SplitRule>> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Option<SplitRule>> {
            let mut rng = stream_rng(seed, t as u64);
            let data = gen_bias_with(kind, n, &mut rng)?;
            Ok(root_split(&data))
        })
        .collect::<Result<_>>()?;
    let k = 6;
    let mut univariate = vec![0; k];
    let mut linear = vec![0; k];
    let mut split_trials = 0;
    for rule in rules.iter().flatten() {
        split_trials += 1;
        match rule {
            SplitRule::Linear { vars, .. } => {
                for &v in vars {
                    linear[v] += 1;
                }
            }
            r => univariate[r.vars()[0]] += 1,
        }
    }
    let denom = split_trials.max(1) as f64;
    let probabilities: Vec<f64> = (0..k)
        .map(|v| (univariate[v] as f64 + linear[v] as f64 / 2.0) / denom)
        .collect();
    let standard_errors = probabilities.iter().map(|p| (p * (1.0 - p) / denom).sqrt()).collect();
    Ok(BiasReport {
        scenario: kind,
        trials,
        split_trials,
        univariate,
        linear,
        probabilities,
        standard_errors,
    })
}

/// Anything that predicts a class index for a dataset row.
pub trait Classifier {
    fn classify(&self, data: &Dataset, row: usize) -> usize;

    fn leaves(&self) -> Option<usize> {
        None
    }
}

impl Classifier for Tree {
    fn classify(&self, data: &Dataset, row: usize) -> usize {
        self.predict_data(data, row)
    }

    fn leaves(&self) -> Option<usize> {
        Some(self.n_leaves())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvEstimate {
    /// Mean of the per-fold held-out misclassification costs.
    pub error: f64,
    pub fold_errors: Vec<f64>,
    /// Mean leaf count of the fold models, when they are trees.
    pub mean_leaves: Option<f64>,
}

/// Cross-validate an arbitrary fitting procedure with stratified folds.
pub fn crossval_with<C, F>(data: &Dataset, costs: &CostMatrix, folds: usize, seed: u64, fit_fold: F) -> Result<CvEstimate>
where
    C: Classifier + Send,
    F: Fn(&Dataset) -> Result<C> + Sync,
{
    if folds < 2 {
        return Err(Error::Config("folds must be at least 2".into()));
    }
    let fold = stratified_folds(data.labels(), data.n_classes(), folds, seed);
    let results: Vec<(f64, Option<usize>)> = (0..folds)
        .into_par_iter()
        .map(|v| -> Result<(f64, Option<usize>)> {
            let train: Vec<usize> = (0..data.n_rows()).filter(|&r| fold[r] != v).collect();
            let test: Vec<usize> = (0..data.n_rows()).filter(|&r| fold[r] == v).collect();
            if test.is_empty() {
                return Err(Error::Config(format!("fold {v} is empty")));
            }
            let model = fit_fold(&data.subset(&train))?;
            let cost: f64 = test
                .iter()
                .map(|&r| costs.cost(model.classify(data, r), data.label(r)))
                .sum();
            Ok((cost / test.len() as f64, model.leaves()))
        })
        .collect::<Result<_>>()?;
    let fold_errors: Vec<f64> = results.iter().map(|r| r.0).collect();
    let leaves: Option<Vec<usize>> = results.iter().map(|r| r.1).collect();
    Ok(CvEstimate {
        error: fold_errors.iter().sum::<f64>() / folds as f64,
        mean_leaves: leaves.map(|l| l.iter().sum::<usize>() as f64 / folds as f64),
        fold_errors,
    })
}

/// Cross-validated error of growing and pruning a tree with `cfg`.
pub fn crossval_error(data: &Dataset, cfg: &GrowConfig, folds: usize, seed: u64) -> Result<CvEstimate> {
    let costs = cfg.costs.clone().unwrap_or_else(|| CostMatrix::unit(data.n_classes()));
    crossval_with(data, &costs, folds, seed, |d| fit(d, cfg))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelativeTable {
    /// Per-method mean of the row-relative values.
    pub means: Vec<f64>,
    /// Rows whose minimum was zero.
    pub flagged: Vec<usize>,
}

/// Divide each row by its minimum and average the ratios per column.
///
/// A row with minimum zero gives ratio 1 to the zero entries and divides
/// the rest by the smallest positive entry.
pub fn relative_metrics(rows: &[Vec<f64>]) -> Result<RelativeTable> {
    let m = rows.first().map_or(0, |r| r.len());
    if rows.is_empty() || m < 2 {
        return Err(Error::Config("need at least one row and two methods".into()));
    }
    if rows.iter().any(|r| r.len() != m || r.iter().any(|v| !v.is_finite() || *v < 0.0)) {
        return Err(Error::Config("every cell must be a nonnegative number".into()));
    }
    let mut sums = vec![0.0; m];
    let mut flagged = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let min = row.iter().copied().fold(f64::INFINITY, f64::min);
        let base = if min > 0.0 {
            min
        } else {
            flagged.push(i);
            row.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min)
        };
        for (s, &v) in sums.iter_mut().zip(row) {
            *s += if v == 0.0 { 1.0 } else { v / base };
        }
    }
    Ok(RelativeTable {
        means: sums.iter().map(|s| s / rows.len() as f64).collect(),
        flagged,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeSummary {
    pub seed: u64,
    pub n: usize,
    pub leaves: usize,
    pub training_errors: usize,
    /// Variables used by splits at depth <= 2 (1-based names).
    pub top_split_vars: Vec<String>,
}

/// Fit a pruned tree and summarize it.
pub fn summarize_fit(data: &Dataset, cfg: &GrowConfig) -> Result<(Tree, TreeSummary)> {
    let tree = fit(data, cfg)?;
    let summary = TreeSummary {
        seed: cfg.seed,
        n: data.n_rows(),
        leaves: tree.n_leaves(),
        training_errors: tree.errors(data),
        top_split_vars: tree
            .split_vars_to_depth(2)
            .iter()
            .map(|&v| data.header().predictors[v].name.clone())
            .collect(),
    };
    Ok((tree, summary))
}

/// Method-S tree on a chessboard sample of size `n`.
pub fn chessboard_experiment(n: usize, seed: u64) -> Result<TreeSummary> {
    let data = gen_chessboard(n, seed)?;
    let cfg = GrowConfig {
        seed,
        ..GrowConfig::with_method(Method::S)
    };
    Ok(summarize_fit(&data, &cfg)?.1)
}

/// Tree of `method` on a circle-and-lines sample of size `n`.
pub fn circle_lines_experiment(method: Method, n: usize, seed: u64) -> Result<TreeSummary> {
    let data = gen_circle_lines(n, seed)?;
    let cfg = GrowConfig {
        seed,
        ..GrowConfig::with_method(method)
    };
    Ok(summarize_fit(&data, &cfg)?.1)
}

/// Write `<stem>.csv` and `<stem>.schema` into `dir`.
pub fn write_dataset(data: &Dataset, dir: &Path, stem: &str) -> Result<()> {
    std::fs::write(dir.join(format!("{stem}.csv")), data.to_csv())?;
    std::fs::write(dir.join(format!("{stem}.schema")), data.header().schema.to_text())?;
    Ok(())
}

#[cfg(test)]
mod tests;
