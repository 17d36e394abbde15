//! Node classifiers: constant, kernel density and nearest-neighbor models
//! on the one or two variables selected at a node.

use serde::{Deserialize, Serialize};

use crate::dataset::{Cell, ClassModel, Dataset, PredictorKind};
use crate::stats::mean_sd;

const LN_2PI: f64 = 1.8378770664093453;

/// Kernel bandwidth `2.5 min(s, 0.7413 r) n^(-1/5)` (or `2.5 s n^(-1/5)`
/// when `r = 0`). `None` when the sample has no spread.
pub fn bandwidth(s: f64, r: f64, n: usize) -> Option<f64> {
    if !(s > 0.0) || n == 0 {
        return None;
    }
    let scale = if r > 0.0 { s.min(0.7413 * r) } else { s };
    Some(2.5 * scale * (n as f64).powf(-0.2))
}

/// Neighbor count `max(3, ceil(ln n))`, capped at `n`.
pub fn k_neighbors(n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    let k = ((n as f64).ln().ceil() as usize).max(3);
    k.min(n)
}

/// Sample quantile with linear interpolation between order statistics.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn spread(values: &[f64]) -> (f64, f64) {
    if values.len() < 2 {
        return (0.0, 0.0);
    }
    let (_, s) = mean_sd(values);
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    (s, quantile(&sorted, 0.75) - quantile(&sorted, 0.25))
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = terms.collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Gaussian kernel density estimate at `x`.
pub fn kernel_density_1d(points: &[f64], h: f64, x: f64) -> f64 {
    log_kde_1d(points, h, x).exp()
}

fn log_kde_1d(points: &[f64], h: f64, x: f64) -> f64 {
    if points.is_empty() {
        return f64::NEG_INFINITY;
    }
    let n = points.len() as f64;
    log_sum_exp(points.iter().map(|p| {
        let u = (x - p) / h;
        -0.5 * u * u
    })) - (n * h).ln()
        - 0.5 * LN_2PI
}

/// Bivariate Gaussian kernel density with bandwidths `h` and kernel
/// correlation `rho`.
pub fn kernel_density_2d(points: &[[f64; 2]], h: [f64; 2], rho: f64, x: [f64; 2]) -> f64 {
    log_kde_2d(points, h, rho, x).exp()
}

fn log_kde_2d(points: &[[f64; 2]], h: [f64; 2], rho: f64, x: [f64; 2]) -> f64 {
    if points.is_empty() {
        return f64::NEG_INFINITY;
    }
    let n = points.len() as f64;
    let one_m = 1.0 - rho * rho;
    log_sum_exp(points.iter().map(|p| {
        let u = (x[0] - p[0]) / h[0];
        let v = (x[1] - p[1]) / h[1];
        -(u * u - 2.0 * rho * u * v + v * v) / (2.0 * one_m)
    })) - (n * h[0] * h[1] * one_m.sqrt()).ln()
        - LN_2PI
}

/// Class score: number of matched point masses, then log density.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Score {
    dirac: u8,
    log: f64,
}

impl Score {
    const ZERO: Score = Score {
        dirac: 0,
        log: f64::NEG_INFINITY,
    };

    fn beats(&self, other: &Score) -> bool {
        self.dirac > other.dirac || (self.dirac == other.dirac && self.log > other.log)
    }

    fn is_zero(&self) -> bool {
        self.dirac == 0 && self.log == f64::NEG_INFINITY
    }
}

fn pick(scores: impl Iterator<Item = Score>, fallback: usize) -> usize {
    let mut best: Option<(usize, Score)> = None;
    for (j, s) in scores.enumerate() {
        if s.is_zero() {
            continue;
        }
        if best.is_none_or(|(_, b)| s.beats(&b)) {
            best = Some((j, s));
        }
    }
    best.map_or(fallback, |b| b.0)
}

/// One coordinate of a class density: a kernel with bandwidth `h`, or a
/// point mass at `at` when the class shows no spread.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Axis {
    Kernel { h: f64 },
    PointMass { at: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelClass1d {
    pub points: Vec<f64>,
    pub axis: Axis,
}

impl KernelClass1d {
    fn score(&self, x: f64) -> Score {
        if self.points.is_empty() {
            return Score::ZERO;
        }
        match self.axis {
            Axis::Kernel { h } => Score {
                dirac: 0,
                log: log_kde_1d(&self.points, h, x),
            },
            Axis::PointMass { at } if at == x => Score { dirac: 1, log: 0.0 },
            Axis::PointMass { .. } => Score::ZERO,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelClass2d {
    pub points: Vec<[f64; 2]>,
    pub axes: [Axis; 2],
    pub rho: f64,
}

impl KernelClass2d {
    fn score(&self, x: [f64; 2]) -> Score {
        if self.points.is_empty() {
            return Score::ZERO;
        }
        match (&self.axes[0], &self.axes[1]) {
            (Axis::Kernel { h: h0 }, Axis::Kernel { h: h1 }) if self.rho.abs() == 1.0 => {
                // Each kernel lives on the line through its point with slope
                // rho * h1 / h0.
                let slope = self.rho * h1 / h0;
                let tol = 1e-9 * h1;
                let along: Vec<f64> = self
                    .points
                    .iter()
                    .filter(|p| ((x[1] - p[1]) - slope * (x[0] - p[0])).abs() <= tol)
                    .map(|p| p[0])
                    .collect();
                if along.is_empty() {
                    return Score::ZERO;
                }
                let n = self.points.len() as f64;
                Score {
                    dirac: 1,
                    log: log_kde_1d(&along, *h0, x[0]) + (along.len() as f64 / n).ln(),
                }
            }
            (Axis::Kernel { h: h0 }, Axis::Kernel { h: h1 }) => Score {
                dirac: 0,
                log: log_kde_2d(&self.points, [*h0, *h1], self.rho, x),
            },
            (Axis::PointMass { at }, Axis::Kernel { h }) => {
                if *at != x[0] {
                    return Score::ZERO;
                }
                let pts: Vec<f64> = self.points.iter().map(|p| p[1]).collect();
                Score {
                    dirac: 1,
                    log: log_kde_1d(&pts, *h, x[1]),
                }
            }
            (Axis::Kernel { h }, Axis::PointMass { at }) => {
                if *at != x[1] {
                    return Score::ZERO;
                }
                let pts: Vec<f64> = self.points.iter().map(|p| p[0]).collect();
                Score {
                    dirac: 1,
                    log: log_kde_1d(&pts, *h, x[0]),
                }
            }
            (Axis::PointMass { at: a }, Axis::PointMass { at: b }) => {
                if *a == x[0] && *b == x[1] {
                    Score { dirac: 2, log: 0.0 }
                } else {
                    Score::ZERO
                }
            }
        }
    }
}

/// A fitted node classifier. Rows missing any of the model's variables get
/// `fallback`, the node's cost-minimizing class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum NodeModel {
    Constant {
        class: usize,
    },
    /// Per-class densities of one numeric variable.
    Kernel1d {
        var: usize,
        classes: Vec<KernelClass1d>,
        class_weights: Option<Vec<f64>>,
        fallback: usize,
    },
    /// Per-class bivariate densities of two numeric variables.
    Kernel2d {
        vars: [usize; 2],
        classes: Vec<KernelClass2d>,
        class_weights: Option<Vec<f64>>,
        fallback: usize,
    },
    /// For each level of `cat`, per-class densities of `num` weighted by the
    /// class frequency of that level.
    KernelMixed {
        cat: usize,
        num: usize,
        /// `cells[level][class]`
        cells: Vec<Vec<KernelClass1d>>,
        /// `n_{level,class} / n_class`
        freq: Vec<Vec<f64>>,
        class_weights: Option<Vec<f64>>,
        fallback: usize,
    },
    /// Cell scores over the levels of one or two categorical variables;
    /// the highest-scoring class of the row's cell is predicted.
    Table {
        vars: Vec<usize>,
        /// Number of levels per variable (missing excluded).
        dims: Vec<usize>,
        /// `scores[cell][class]`; an all-zero cell predicts `fallback`.
        scores: Vec<Vec<f64>>,
        fallback: usize,
    },
    Nn1d {
        var: usize,
        points: Vec<(f64, usize)>,
        k: usize,
        n_classes: usize,
        fallback: usize,
    },
    Nn2d {
        vars: [usize; 2],
        points: Vec<([f64; 2], usize)>,
        k: usize,
        /// Inverse of the node covariance used in the Mahalanobis distance.
        inv_cov: [[f64; 2]; 2],
        n_classes: usize,
        fallback: usize,
    },
    /// k-NN on `num` among training rows sharing the level of `cat`.
    NnMixed {
        cat: usize,
        num: usize,
        /// `cells[level]`
        cells: Vec<Vec<(f64, usize)>>,
        n_classes: usize,
        fallback: usize,
    },
}

/// Which node-model family to fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelFamily {
    Constant,
    Kernel,
    NearestNeighbor,
}

/// Kernel classification rule: raw class densities, or densities
/// multiplied by the node class probabilities `p(j|t)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum DensityRule {
    #[default]
    Raw,
    PriorWeighted,
}

fn numeric_class_points(data: &Dataset, rows: &[usize], var: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new(); data.n_classes()];
    for &r in rows {
        let v = data.num(r, var);
        if !v.is_nan() {
            out[data.label(r)].push(v);
        }
    }
    out
}

fn axis_for(values: &[f64], n: usize) -> Axis {
    let (s, r) = spread(values);
    match bandwidth(s, r, n) {
        Some(h) => Axis::Kernel { h },
        None => Axis::PointMass {
            at: values.first().copied().unwrap_or(0.0),
        },
    }
}

fn class_weights(classes: &ClassModel, counts: &[usize], rule: DensityRule) -> Option<Vec<f64>> {
    match rule {
        DensityRule::Raw => None,
        DensityRule::PriorWeighted => Some(classes.stats(counts).conditional),
    }
}

fn correlation(points: &[[f64; 2]]) -> f64 {
    let n = points.len() as f64;
    if points.len() < 2 {
        return 0.0;
    }
    let mx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        sxy += (p[0] - mx) * (p[1] - my);
        sxx += (p[0] - mx).powi(2);
        syy += (p[1] - my).powi(2);
    }
    let r = sxy / (sxx * syy).sqrt();
    if !r.is_finite() {
        0.0
    } else if r.abs() >= 1.0 - 1e-12 {
        r.signum()
    } else {
        r
    }
}

fn level_of(data: &Dataset, r: usize, var: usize) -> Option<usize> {
    match data.cell(r, var) {
        Cell::Cat(Some(l)) => Some(l as usize),
        _ => None,
    }
}

fn table_cells(data: &Dataset, rows: &[usize], vars: &[usize]) -> (Vec<usize>, Vec<Vec<usize>>) {
    let dims: Vec<usize> = vars.iter().map(|&v| data.n_levels(v)).collect();
    let size: usize = dims.iter().product();
    let mut cells = vec![vec![0usize; data.n_classes()]; size];
    for &r in rows {
        let mut idx = 0;
        let mut ok = true;
        for (&v, &d) in vars.iter().zip(&dims) {
            match level_of(data, r, v) {
                Some(l) => idx = idx * d + l,
                None => ok = false,
            }
        }
        if ok {
            cells[idx][data.label(r)] += 1;
        }
    }
    (dims, cells)
}

/// Fit the model of `family` at a node with rows `rows` on the selected
/// variables (one or two).
pub fn fit_node_model(
    data: &Dataset,
    rows: &[usize],
    classes: &ClassModel,
    vars: &[usize],
    family: ModelFamily,
    rule: DensityRule,
) -> NodeModel {
    let counts = data.counts_of(rows);
    let fallback = classes.assign(&counts);
    let present = counts.iter().filter(|&&c| c > 0).count();
    if family == ModelFamily::Constant || present <= 1 || vars.is_empty() {
        return NodeModel::Constant { class: fallback };
    }
    match family {
        ModelFamily::Kernel => fit_kernel_model(data, rows, classes, vars, rule),
        _ => fit_nn_model(data, rows, classes, vars),
    }
}

/// Kernel discriminant model on one or two variables.
pub fn fit_kernel_model(
    data: &Dataset,
    rows: &[usize],
    classes: &ClassModel,
    vars: &[usize],
    rule: DensityRule,
) -> NodeModel {
    let counts = data.counts_of(rows);
    let fallback = classes.assign(&counts);
    let lw = class_weights(classes, &counts, rule);
    let j = data.n_classes();
    let constant = NodeModel::Constant { class: fallback };
    use PredictorKind::*;
    match vars {
        [v] => match data.kind(*v) {
            Categorical => {
                let (dims, cells) = table_cells(data, rows, &[*v]);
                let weights = classes.stats(&counts).conditional;
                let scores = cells
                    .iter()
                    .map(|cell| {
                        (0..j)
                            .map(|c| {
                                let f = if counts[c] > 0 { cell[c] as f64 / counts[c] as f64 } else { 0.0 };
                                match rule {
                                    DensityRule::Raw => f,
                                    DensityRule::PriorWeighted => f * weights[c],
                                }
                            })
                            .collect()
                    })
                    .collect();
                NodeModel::Table {
                    vars: vec![*v],
                    dims,
                    scores,
                    fallback,
                }
            }
            Numeric => {
                let pts = numeric_class_points(data, rows, *v);
                let n: usize = pts.iter().map(|p| p.len()).sum();
                let classes_fit: Vec<KernelClass1d> = pts
                    .into_iter()
                    .map(|p| KernelClass1d {
                        axis: axis_for(&p, n),
                        points: p,
                    })
                    .collect();
                if n == 0 {
                    return constant;
                }
                NodeModel::Kernel1d {
                    var: *v,
                    classes: classes_fit,
                    class_weights: lw,
                    fallback,
                }
            }
        },
        [a, b] => match (data.kind(*a), data.kind(*b)) {
            (Categorical, Categorical) => {
                let (dims, cells) = table_cells(data, rows, &[*a, *b]);
                let weights = classes.stats(&counts).conditional;
                let scores = cells
                    .iter()
                    .map(|cell| {
                        (0..j)
                            .map(|c| {
                                let f = if counts[c] > 0 { cell[c] as f64 / counts[c] as f64 } else { 0.0 };
                                match rule {
                                    DensityRule::Raw => f,
                                    DensityRule::PriorWeighted => f * weights[c],
                                }
                            })
                            .collect()
                    })
                    .collect();
                NodeModel::Table {
                    vars: vec![*a, *b],
                    dims,
                    scores,
                    fallback,
                }
            }
            (Numeric, Numeric) => {
                let mut pts: Vec<Vec<[f64; 2]>> = vec![Vec::new(); j];
                for &r in rows {
                    let (x, y) = (data.num(r, *a), data.num(r, *b));
                    if !x.is_nan() && !y.is_nan() {
                        pts[data.label(r)].push([x, y]);
                    }
                }
                if pts.iter().all(|p| p.is_empty()) {
                    return constant;
                }
                let fitted = pts
                    .into_iter()
                    .map(|p| {
                        let n = p.len();
                        let xs: Vec<f64> = p.iter().map(|q| q[0]).collect();
                        let ys: Vec<f64> = p.iter().map(|q| q[1]).collect();
                        KernelClass2d {
                            axes: [axis_for(&xs, n), axis_for(&ys, n)],
                            rho: correlation(&p),
                            points: p,
                        }
                    })
                    .collect();
                NodeModel::Kernel2d {
                    vars: [*a, *b],
                    classes: fitted,
                    class_weights: lw,
                    fallback,
                }
            }
            (Categorical, Numeric) => fit_kernel_mixed(data, rows, *a, *b, lw, fallback),
            (Numeric, Categorical) => fit_kernel_mixed(data, rows, *b, *a, lw, fallback),
        },
        _ => constant,
    }
}

fn fit_kernel_mixed(
    data: &Dataset,
    rows: &[usize],
    cat: usize,
    num: usize,
    class_weights: Option<Vec<f64>>,
    fallback: usize,
) -> NodeModel {
    let j = data.n_classes();
    let nlev = data.n_levels(cat);
    let mut pts = vec![vec![Vec::new(); j]; nlev];
    let mut class_all = vec![Vec::new(); j];
    let mut class_n = vec![0usize; j];
    for &r in rows {
        let x = data.num(r, num);
        let Some(l) = level_of(data, r, cat) else { continue };
        if x.is_nan() {
            continue;
        }
        pts[l][data.label(r)].push(x);
        class_all[data.label(r)].push(x);
        class_n[data.label(r)] += 1;
    }
    // Average the per-(level, class) bandwidths within each class.
    let hbar: Vec<Axis> = (0..j)
        .map(|c| {
            let hs: Vec<f64> = (0..nlev)
                .filter_map(|l| {
                    let (s, r) = spread(&pts[l][c]);
                    bandwidth(s, r, pts[l][c].len())
                })
                .collect();
            if hs.is_empty() {
                axis_for(&class_all[c], class_all[c].len())
            } else {
                Axis::Kernel {
                    h: hs.iter().sum::<f64>() / hs.len() as f64,
                }
            }
        })
        .collect();
    let freq = (0..nlev)
        .map(|l| {
            (0..j)
                .map(|c| {
                    if class_n[c] == 0 {
                        0.0
                    } else {
                        pts[l][c].len() as f64 / class_n[c] as f64
                    }
                })
                .collect()
        })
        .collect();
    let cells = pts
        .into_iter()
        .map(|row| {
            row.into_iter()
                .enumerate()
                .map(|(c, p)| {
                    let axis = match &hbar[c] {
                        Axis::Kernel { h } => Axis::Kernel { h: *h },
                        Axis::PointMass { .. } => Axis::PointMass {
                            at: p.first().copied().unwrap_or(0.0),
                        },
                    };
                    KernelClass1d { points: p, axis }
                })
                .collect()
        })
        .collect();
    NodeModel::KernelMixed {
        cat,
        num,
        cells,
        freq,
        class_weights,
        fallback,
    }
}

fn pooled_inverse(points: &[([f64; 2], usize)]) -> [[f64; 2]; 2] {
    let n = points.len() as f64;
    if points.len() < 2 {
        return [[1.0, 0.0], [0.0, 1.0]];
    }
    let mx = points.iter().map(|p| p.0[0]).sum::<f64>() / n;
    let my = points.iter().map(|p| p.0[1]).sum::<f64>() / n;
    let (mut a, mut b, mut d) = (0.0, 0.0, 0.0);
    for (p, _) in points {
        a += (p[0] - mx).powi(2);
        b += (p[0] - mx) * (p[1] - my);
        d += (p[1] - my).powi(2);
    }
    a /= n - 1.0;
    b /= n - 1.0;
    d /= n - 1.0;
    let trace = a + d;
    if trace <= 0.0 {
        return [[1.0, 0.0], [0.0, 1.0]];
    }
    let mut det = a * d - b * b;
    if det <= 1e-12 * trace * trace {
        let ridge = 1e-8 * trace;
        a += ridge;
        d += ridge;
        det = a * d - b * b;
    }
    if a == 0.0 || d == 0.0 {
        let ia = if a > 0.0 { 1.0 / a } else { 0.0 };
        let id = if d > 0.0 { 1.0 / d } else { 0.0 };
        return [[ia, 0.0], [0.0, id]];
    }
    [[d / det, -b / det], [-b / det, a / det]]
}

/// Nearest-neighbor model on one or two variables.
pub fn fit_nn_model(data: &Dataset, rows: &[usize], classes: &ClassModel, vars: &[usize]) -> NodeModel {
    let counts = data.counts_of(rows);
    let fallback = classes.assign(&counts);
    let j = data.n_classes();
    use PredictorKind::*;
    let table = |vs: &[usize]| {
        let (dims, cells) = table_cells(data, rows, vs);
        let scores = cells
            .iter()
            .map(|cell| {
                if cell.iter().all(|&c| c == 0) {
                    vec![0.0; j]
                } else {
                    classes.stats(cell).conditional
                }
            })
            .collect();
        NodeModel::Table {
            vars: vs.to_vec(),
            dims,
            scores,
            fallback,
        }
    };
    match vars {
        [v] => match data.kind(*v) {
            Categorical => table(&[*v]),
            Numeric => {
                let points: Vec<(f64, usize)> = rows
                    .iter()
                    .filter(|&&r| !data.num(r, *v).is_nan())
                    .map(|&r| (data.num(r, *v), data.label(r)))
                    .collect();
                NodeModel::Nn1d {
                    var: *v,
                    k: k_neighbors(points.len()),
                    points,
                    n_classes: j,
                    fallback,
                }
            }
        },
        [a, b] => match (data.kind(*a), data.kind(*b)) {
            (Categorical, Categorical) => table(&[*a, *b]),
            (Numeric, Numeric) => {
                let points: Vec<([f64; 2], usize)> = rows
                    .iter()
                    .filter(|&&r| !data.num(r, *a).is_nan() && !data.num(r, *b).is_nan())
                    .map(|&r| ([data.num(r, *a), data.num(r, *b)], data.label(r)))
                    .collect();
                NodeModel::Nn2d {
                    vars: [*a, *b],
                    k: k_neighbors(points.len()),
                    inv_cov: pooled_inverse(&points),
                    points,
                    n_classes: j,
                    fallback,
                }
            }
            (Categorical, Numeric) => nn_mixed(data, rows, *a, *b, fallback),
            (Numeric, Categorical) => nn_mixed(data, rows, *b, *a, fallback),
        },
        _ => NodeModel::Constant { class: fallback },
    }
}

fn nn_mixed(data: &Dataset, rows: &[usize], cat: usize, num: usize, fallback: usize) -> NodeModel {
    let mut cells = vec![Vec::new(); data.n_levels(cat)];
    for &r in rows {
        let x = data.num(r, num);
        if let (Some(l), false) = (level_of(data, r, cat), x.is_nan()) {
            cells[l].push((x, data.label(r)));
        }
    }
    NodeModel::NnMixed {
        cat,
        num,
        cells,
        n_classes: data.n_classes(),
        fallback,
    }
}

/// Majority vote among the points within the k-th smallest distance
/// (ties at rank k included); vote ties go to the smallest class.
fn knn_vote(dists: &mut [(f64, usize)], k: usize, n_classes: usize, fallback: usize) -> usize {
    if dists.is_empty() || k == 0 {
        return fallback;
    }
    let k = k.min(dists.len());
    dists.sort_by(|a, b| a.0.total_cmp(&b.0));
    let cutoff = dists[k - 1].0;
    let mut votes = vec![0usize; n_classes];
    for &(_, c) in dists.iter().take_while(|x| x.0 <= cutoff) {
        votes[c] += 1;
    }
    let mut best = 0;
    for c in 1..n_classes {
        if votes[c] > votes[best] {
            best = c;
        }
    }
    best
}

fn argmax_scores(scores: &[f64], fallback: usize) -> usize {
    let mut best: Option<(usize, f64)> = None;
    for (c, &s) in scores.iter().enumerate() {
        if s > 0.0 && best.is_none_or(|(_, b)| s > b) {
            best = Some((c, s));
        }
    }
    best.map_or(fallback, |b| b.0)
}

fn weighted(score: Score, weights: &Option<Vec<f64>>, c: usize) -> Score {
    match weights {
        Some(w) if !score.is_zero() => Score {
            dirac: score.dirac,
            log: score.log + w[c].ln(),
        },
        _ => score,
    }
}

impl NodeModel {
    /// Variables the model reads.
    pub fn vars(&self) -> Vec<usize> {
        match self {
            NodeModel::Constant { .. } => vec![],
            NodeModel::Kernel1d { var, .. } | NodeModel::Nn1d { var, .. } => vec![*var],
            NodeModel::Kernel2d { vars, .. } | NodeModel::Nn2d { vars, .. } => vars.to_vec(),
            NodeModel::KernelMixed { cat, num, .. } | NodeModel::NnMixed { cat, num, .. } => vec![*cat, *num],
            NodeModel::Table { vars, .. } => vars.clone(),
        }
    }

    pub fn fallback(&self) -> usize {
        match self {
            NodeModel::Constant { class } => *class,
            NodeModel::Kernel1d { fallback, .. }
            | NodeModel::Kernel2d { fallback, .. }
            | NodeModel::KernelMixed { fallback, .. }
            | NodeModel::Table { fallback, .. }
            | NodeModel::Nn1d { fallback, .. }
            | NodeModel::Nn2d { fallback, .. }
            | NodeModel::NnMixed { fallback, .. } => *fallback,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            NodeModel::Constant { .. } => "constant",
            NodeModel::Kernel1d { .. } => "kernel-1d",
            NodeModel::Kernel2d { .. } => "kernel-2d",
            NodeModel::KernelMixed { .. } => "kernel-mixed",
            NodeModel::Table { .. } => "table",
            NodeModel::Nn1d { .. } => "nn-1d",
            NodeModel::Nn2d { .. } => "nn-2d",
            NodeModel::NnMixed { .. } => "nn-mixed",
        }
    }

    /// Predict one row given an accessor for its predictor cells.
    pub fn predict_with(&self, cell: impl Fn(usize) -> Cell) -> usize {
        let num = |v: usize| match cell(v) {
            Cell::Num(x) if !x.is_nan() => Some(x),
            _ => None,
        };
        let lev = |v: usize, n: usize| match cell(v) {
            Cell::Cat(Some(l)) if (l as usize) < n => Some(l as usize),
            _ => None,
        };
        match self {
            NodeModel::Constant { class } => *class,
            NodeModel::Kernel1d {
                var,
                classes,
                class_weights,
                fallback,
            } => match num(*var) {
                Some(x) => pick(
                    classes.iter().enumerate().map(|(c, k)| weighted(k.score(x), class_weights, c)),
                    *fallback,
                ),
                None => *fallback,
            },
            NodeModel::Kernel2d {
                vars,
                classes,
                class_weights,
                fallback,
            } => match (num(vars[0]), num(vars[1])) {
                (Some(x), Some(y)) => pick(
                    classes.iter().enumerate().map(|(c, k)| weighted(k.score([x, y]), class_weights, c)),
                    *fallback,
                ),
                _ => *fallback,
            },
            NodeModel::KernelMixed {
                cat,
                num: nv,
                cells,
                freq,
                class_weights,
                fallback,
            } => match (lev(*cat, cells.len()), num(*nv)) {
                (Some(l), Some(x)) => pick(
                    cells[l].iter().enumerate().map(|(c, k)| {
                        let s = k.score(x);
                        let s = if s.is_zero() {
                            s
                        } else {
                            Score {
                                dirac: s.dirac,
                                log: s.log + freq[l][c].ln(),
                            }
                        };
                        weighted(s, class_weights, c)
                    }),
                    *fallback,
                ),
                _ => *fallback,
            },
            NodeModel::Table {
                vars,
                dims,
                scores,
                fallback,
            } => {
                let mut idx = 0;
                for (&v, &d) in vars.iter().zip(dims) {
                    match lev(v, d) {
                        Some(l) => idx = idx * d + l,
                        None => return *fallback,
                    }
                }
                argmax_scores(&scores[idx], *fallback)
            }
            NodeModel::Nn1d {
                var,
                points,
                k,
                n_classes,
                fallback,
            } => match num(*var) {
                Some(x) => {
                    let mut d: Vec<(f64, usize)> = points.iter().map(|&(p, c)| ((p - x).abs(), c)).collect();
                    knn_vote(&mut d, *k, *n_classes, *fallback)
                }
                None => *fallback,
            },
            NodeModel::Nn2d {
                vars,
                points,
                k,
                inv_cov,
                n_classes,
                fallback,
            } => match (num(vars[0]), num(vars[1])) {
                (Some(x), Some(y)) => {
                    let mut d: Vec<(f64, usize)> = points
                        .iter()
                        .map(|&(p, c)| (mahalanobis(inv_cov, [p[0] - x, p[1] - y]), c))
                        .collect();
                    knn_vote(&mut d, *k, *n_classes, *fallback)
                }
                _ => *fallback,
            },
            NodeModel::NnMixed {
                cat,
                num: nv,
                cells,
                n_classes,
                fallback,
            } => match (lev(*cat, cells.len()), num(*nv)) {
                (Some(l), Some(x)) if !cells[l].is_empty() => {
                    let mut d: Vec<(f64, usize)> = cells[l].iter().map(|&(p, c)| ((p - x).abs(), c)).collect();
                    knn_vote(&mut d, k_neighbors(cells[l].len()), *n_classes, *fallback)
                }
                _ => *fallback,
            },
        }
    }

    pub fn predict(&self, row: &[Cell]) -> usize {
        self.predict_with(|v| row[v])
    }

    pub fn predict_data(&self, data: &Dataset, r: usize) -> usize {
        self.predict_with(|v| data.cell(r, v))
    }
}

fn mahalanobis(inv: &[[f64; 2]; 2], d: [f64; 2]) -> f64 {
    d[0] * (inv[0][0] * d[0] + inv[0][1] * d[1]) + d[1] * (inv[1][0] * d[0] + inv[1][1] * d[1])
}

#[cfg(test)]
mod tests;
