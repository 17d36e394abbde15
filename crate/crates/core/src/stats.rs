//! Chi-squared machinery for variable selection: contingency tables, the
//! Wilson–Hilferty reduction to one degree of freedom, discretization of
//! numeric predictors, and the trimmed two-variable discriminant used for
//! linear splits.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, PredictorKind};

/// Class-by-bin table of counts.
#[derive(Clone, Debug, PartialEq)]
pub struct ContingencyTable {
    counts: Vec<Vec<usize>>,
}

impl ContingencyTable {
    pub fn new(rows: usize, cols: usize) -> Self {
        ContingencyTable {
            counts: vec![vec![0; cols]; rows],
        }
    }

    pub fn from_counts(counts: Vec<Vec<usize>>) -> Self {
        ContingencyTable { counts }
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize) {
        self.counts[row][col] += 1;
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    /// Pearson statistic and degrees of freedom after deleting empty rows
    /// and columns.
    pub fn chi2(&self) -> (f64, usize) {
        pearson_chi2(&self.counts)
    }
}

/// Pearson chi-squared statistic over the non-empty rows and columns of
/// `table`. Returns `(0, 0)` when fewer than two rows or columns survive.
pub fn pearson_chi2(table: &[Vec<usize>]) -> (f64, usize) {
    let n_cols = table.iter().map(Vec::len).max().unwrap_or(0);
    let row_tot: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let mut col_tot = vec![0usize; n_cols];
    for r in table {
        for (c, &v) in r.iter().enumerate() {
            col_tot[c] += v;
        }
    }
    let rows: Vec<usize> = (0..table.len()).filter(|&i| row_tot[i] > 0).collect();
    let cols: Vec<usize> = (0..n_cols).filter(|&c| col_tot[c] > 0).collect();
    if rows.len() <= 1 || cols.len() <= 1 {
        return (0.0, 0);
    }
    let total: usize = row_tot.iter().sum();
    let total = total as f64;
    let mut chi2 = 0.0;
    for &i in &rows {
        for &c in &cols {
            let expected = row_tot[i] as f64 * col_tot[c] as f64 / total;
            let observed = table[i].get(c).copied().unwrap_or(0) as f64;
            let d = observed - expected;
            chi2 += d * d / expected;
        }
    }
    (chi2, (rows.len() - 1) * (cols.len() - 1))
}

/// Convert a chi-squared value with `nu` degrees of freedom into the
/// equivalent one-degree-of-freedom value. Identity for `nu <= 1`.
pub fn wilson_hilferty(chi2: f64, nu: usize) -> f64 {
    if nu <= 1 {
        return if nu == 0 { 0.0 } else { chi2 };
    }
    let nu = nu as f64;
    let inner = 7.0 / 9.0 + nu.sqrt() * ((chi2 / nu).cbrt() - 1.0 + 2.0 / (9.0 * nu));
    (inner * inner * inner).max(0.0)
}

/// Upper-`alpha` quantile of the chi-squared distribution with one degree
/// of freedom, by bisection on the regularized upper incomplete gamma.
pub fn chi2_1_upper_quantile(alpha: f64) -> f64 {
    if alpha <= 0.0 {
        return f64::INFINITY;
    }
    if alpha >= 1.0 {
        return 0.0;
    }
    let tail = |x: f64| statrs::function::gamma::gamma_ur(0.5, x / 2.0);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while tail(hi) > alpha {
        hi *= 2.0;
    }
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if tail(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Mean and standard deviation (denominator `n - 1`; zero for `n < 2`).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n as f64 - 1.0)).sqrt())
}

/// Bin assignment of a numeric sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Binning {
    pub bins: Vec<usize>,
    pub n_bins: usize,
    pub boundaries: Vec<f64>,
}

fn assign_bins(values: &[f64], boundaries: Vec<f64>) -> Binning {
    let bins = values
        .iter()
        .map(|&v| boundaries.iter().take_while(|&&b| v > b).count())
        .collect();
    Binning {
        bins,
        n_bins: boundaries.len() + 1,
        boundaries,
    }
}

/// Main-effect discretization: four bins at `mean, mean ± s√3/2` when
/// `n_node >= 20 * classes`, otherwise three bins at `mean ± s√3/3`.
/// A value equal to a boundary goes to the lower bin.
pub fn discretize_main(values: &[f64], n_node: usize, classes: usize) -> Binning {
    let (mean, sd) = mean_sd(values);
    if sd == 0.0 || !sd.is_finite() {
        return Binning {
            bins: vec![0; values.len()],
            n_bins: 1,
            boundaries: Vec::new(),
        };
    }
    let boundaries = if n_node >= 20 * classes {
        let h = sd * 3f64.sqrt() / 2.0;
        vec![mean - h, mean, mean + h]
    } else {
        let h = sd * 3f64.sqrt() / 3.0;
        vec![mean - h, mean + h]
    };
    assign_bins(values, boundaries)
}

/// Interaction discretization: two bins split at the mean when
/// `n_node < 45 * classes`, otherwise three bins at `mean ± s√3/3`.
pub fn discretize_interaction(values: &[f64], n_node: usize, classes: usize) -> Binning {
    let (mean, sd) = mean_sd(values);
    if sd == 0.0 || !sd.is_finite() {
        return Binning {
            bins: vec![0; values.len()],
            n_bins: 1,
            boundaries: Vec::new(),
        };
    }
    let boundaries = if n_node < 45 * classes {
        vec![mean]
    } else {
        let h = sd * 3f64.sqrt() / 3.0;
        vec![mean - h, mean + h]
    };
    assign_bins(values, boundaries)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StatKind {
    Main,
    Interaction,
    Linear,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestStatistic {
    /// One-degree-of-freedom chi-squared value.
    pub value: f64,
    pub kind: StatKind,
    pub vars: Vec<usize>,
}

pub(crate) fn classes_present(data: &Dataset, rows: &[usize]) -> usize {
    let mut seen = vec![false; data.n_classes()];
    for &r in rows {
        seen[data.label(r)] = true;
    }
    seen.iter().filter(|&&s| s).count()
}

/// True when the predictor takes at least two distinct values in the node.
/// Missing categorical values count as a level; numeric missing values do not.
pub fn is_nonconstant(data: &Dataset, rows: &[usize], var: usize) -> bool {
    match data.kind(var) {
        PredictorKind::Numeric => {
            let mut first = None;
            for &r in rows {
                let v = data.num(r, var);
                if v.is_nan() {
                    continue;
                }
                match first {
                    None => first = Some(v),
                    Some(f) if f != v => return true,
                    _ => {}
                }
            }
            false
        }
        PredictorKind::Categorical => {
            let mut first = None;
            for &r in rows {
                let l = data.level(r, var);
                match first {
                    None => first = Some(l),
                    Some(f) if f != l => return true,
                    _ => {}
                }
            }
            false
        }
    }
}

/// Main-effect statistic `W_M` for one predictor in the node.
pub fn main_effect_stat(data: &Dataset, rows: &[usize], var: usize) -> TestStatistic {
    let stat = |value| TestStatistic {
        value,
        kind: StatKind::Main,
        vars: vec![var],
    };
    if !is_nonconstant(data, rows, var) {
        return stat(0.0);
    }
    let j = data.n_classes();
    let table = match data.kind(var) {
        PredictorKind::Categorical => {
            let mut t = ContingencyTable::new(j, data.n_levels(var) + 1);
            for &r in rows {
                t.add(data.label(r), data.level(r, var) as usize);
            }
            t
        }
        PredictorKind::Numeric => {
            let mut present = Vec::with_capacity(rows.len());
            let mut missing = Vec::new();
            for &r in rows {
                if data.num(r, var).is_nan() {
                    missing.push(r);
                } else {
                    present.push(r);
                }
            }
            let values: Vec<f64> = present.iter().map(|&r| data.num(r, var)).collect();
            let binning = discretize_main(&values, rows.len(), classes_present(data, rows));
            let mut t = ContingencyTable::new(j, binning.n_bins + 1);
            for (&r, &b) in present.iter().zip(&binning.bins) {
                t.add(data.label(r), b);
            }
            for &r in &missing {
                t.add(data.label(r), binning.n_bins);
            }
            t
        }
    };
    let (chi2, nu) = table.chi2();
    stat(wilson_hilferty(chi2, nu))
}

/// Main-effect statistic of an arbitrary numeric sample (used for the
/// discriminant coordinate).
pub fn main_effect_values(values: &[f64], labels: &[usize], n_classes: usize) -> f64 {
    let mut seen = vec![false; n_classes];
    for &l in labels {
        seen[l] = true;
    }
    let present = seen.iter().filter(|&&s| s).count();
    let binning = discretize_main(values, values.len(), present);
    if binning.n_bins < 2 {
        return 0.0;
    }
    let mut t = ContingencyTable::new(n_classes, binning.n_bins);
    for (&l, &b) in labels.iter().zip(&binning.bins) {
        t.add(l, b);
    }
    let (chi2, nu) = t.chi2();
    wilson_hilferty(chi2, nu)
}

/// Interaction statistic `W_I` for a pair of predictors. Rows missing a
/// numeric member of the pair are left out; categorical missing values are
/// a level of their own.
pub fn interaction_stat(data: &Dataset, rows: &[usize], v1: usize, v2: usize) -> TestStatistic {
    let stat = |value| TestStatistic {
        value,
        kind: StatKind::Interaction,
        vars: vec![v1, v2],
    };
    if !is_nonconstant(data, rows, v1) || !is_nonconstant(data, rows, v2) {
        return stat(0.0);
    }
    let complete: Vec<usize> = rows
        .iter()
        .copied()
        .filter(|&r| {
            [v1, v2]
                .iter()
                .all(|&v| data.kind(v) == PredictorKind::Categorical || !data.num(r, v).is_nan())
        })
        .collect();
    if complete.len() < 2 {
        return stat(0.0);
    }
    let n_node = rows.len();
    let jt = classes_present(data, rows);
    let cells = |v: usize| -> (Vec<usize>, usize) {
        match data.kind(v) {
            PredictorKind::Categorical => (
                complete.iter().map(|&r| data.level(r, v) as usize).collect(),
                data.n_levels(v) + 1,
            ),
            PredictorKind::Numeric => {
                let vals: Vec<f64> = complete.iter().map(|&r| data.num(r, v)).collect();
                let b = discretize_interaction(&vals, n_node, jt);
                (b.bins, b.n_bins)
            }
        }
    };
    let (b1, n1) = cells(v1);
    let (b2, n2) = cells(v2);
    let mut t = ContingencyTable::new(data.n_classes(), n1 * n2);
    for (k, &r) in complete.iter().enumerate() {
        t.add(data.label(r), b1[k] * n2 + b2[k]);
    }
    let (chi2, nu) = t.chi2();
    stat(wilson_hilferty(chi2, nu))
}

/// Leading discriminant coordinate of a two-variable sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantDirection {
    /// Unit-length coefficients; the first non-zero one is positive.
    pub coef: [f64; 2],
    /// Per-class means and SDs of the two variables before trimming.
    pub class_means: Vec<[f64; 2]>,
    pub class_sds: Vec<[f64; 2]>,
}

impl DiscriminantDirection {
    pub fn project(&self, x: [f64; 2]) -> f64 {
        self.coef[0] * x[0] + self.coef[1] * x[1]
    }
}

fn sym_pinv_sqrt(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return None;
    }
    let n = m.nrows();
    let mut out = DMatrix::zeros(n, n);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > 1e-10 * max {
            let v = eig.eigenvectors.column(k);
            out += (v * v.transpose()) / lam.sqrt();
        }
    }
    Some(out)
}

fn leading_eigvec(m: &DMatrix<f64>) -> Option<(f64, DVector<f64>)> {
    let eig = SymmetricEigen::new(m.clone());
    let (k, &lam) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))?;
    Some((lam, eig.eigenvectors.column(k).into_owned()))
}

fn normalize_sign(mut v: Vec<f64>) -> Option<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0) || !norm.is_finite() {
        return None;
    }
    for x in v.iter_mut() {
        *x /= norm;
    }
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
        if *first < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
    Some(v)
}

/// Leading linear discriminant coordinate of `points` (any dimension).
///
/// Maximizes between-class over within-class scatter; a singular
/// within-class scatter is handled with a spectral pseudo-inverse dropping
/// eigenvalues below `1e-10` of the largest. Returns `None` with fewer than
/// two classes or no between-class spread.
pub fn lda_leading(points: &[Vec<f64>], labels: &[usize], n_classes: usize) -> Option<Vec<f64>> {
    let dim = points.first()?.len();
    let mut sums = vec![vec![0.0; dim]; n_classes];
    let mut counts = vec![0usize; n_classes];
    for (p, &l) in points.iter().zip(labels) {
        counts[l] += 1;
        for d in 0..dim {
            sums[l][d] += p[d];
        }
    }
    if counts.iter().filter(|&&c| c > 0).count() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let grand: Vec<f64> = (0..dim).map(|d| sums.iter().map(|s| s[d]).sum::<f64>() / n).collect();
    let means: Vec<Vec<f64>> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s.iter().map(|v| if c > 0 { v / c as f64 } else { 0.0 }).collect())
        .collect();
    let mut within = DMatrix::<f64>::zeros(dim, dim);
    for (p, &l) in points.iter().zip(labels) {
        let d = DVector::from_iterator(dim, (0..dim).map(|k| p[k] - means[l][k]));
        within += &d * d.transpose();
    }
    let mut between = DMatrix::<f64>::zeros(dim, dim);
    for (m, &c) in means.iter().zip(&counts) {
        if c == 0 {
            continue;
        }
        let d = DVector::from_iterator(dim, (0..dim).map(|k| m[k] - grand[k]));
        between += (&d * d.transpose()) * c as f64;
    }
    let direction = match sym_pinv_sqrt(&within) {
        Some(w) => {
            let m = &w * &between * &w;
            let (lam, u) = leading_eigvec(&m)?;
            if !(lam > 0.0) {
                return None;
            }
            &w * u
        }
        None => {
            let (lam, u) = leading_eigvec(&between)?;
            if !(lam > 0.0) {
                return None;
            }
            u
        }
    };
    normalize_sign(direction.iter().cloned().collect())
}

/// Two-variable discriminant direction.
pub fn lda_direction(points: &[[f64; 2]], labels: &[usize], n_classes: usize) -> Option<DiscriminantDirection> {
    let pts: Vec<Vec<f64>> = points.iter().map(|p| p.to_vec()).collect();
    let v = lda_leading(&pts, labels, n_classes)?;
    Some(DiscriminantDirection {
        coef: [v[0], v[1]],
        class_means: Vec::new(),
        class_sds: Vec::new(),
    })
}

/// Discriminant statistic `W_L` for two numeric predictors, together with
/// the fitted direction. Rows missing either variable are excluded.
pub fn linear_stat(
    data: &Dataset,
    rows: &[usize],
    v1: usize,
    v2: usize,
) -> (TestStatistic, Option<DiscriminantDirection>) {
    let zero = || TestStatistic {
        value: 0.0,
        kind: StatKind::Linear,
        vars: vec![v1, v2],
    };
    let j = data.n_classes();
    let mut by_class: Vec<Vec<[f64; 2]>> = vec![Vec::new(); j];
    let mut all_points = Vec::with_capacity(rows.len());
    let mut all_labels = Vec::with_capacity(rows.len());
    for &r in rows {
        let (a, b) = (data.num(r, v1), data.num(r, v2));
        if a.is_nan() || b.is_nan() {
            continue;
        }
        by_class[data.label(r)].push([a, b]);
        all_points.push([a, b]);
        all_labels.push(data.label(r));
    }
    let mut class_means = vec![[0.0; 2]; j];
    let mut class_sds = vec![[0.0; 2]; j];
    let mut trimmed = Vec::new();
    let mut trimmed_labels = Vec::new();
    for (c, pts) in by_class.iter().enumerate() {
        if pts.is_empty() {
            continue;
        }
        for i in 0..2 {
            let vals: Vec<f64> = pts.iter().map(|p| p[i]).collect();
            let (m, s) = mean_sd(&vals);
            class_means[c][i] = m;
            class_sds[c][i] = s;
        }
        let kept: Vec<[f64; 2]> = pts
            .iter()
            .copied()
            .filter(|p| (0..2).all(|i| (p[i] - class_means[c][i]).abs() <= 2.0 * class_sds[c][i]))
            .collect();
        if kept.len() >= 2 {
            trimmed_labels.extend(std::iter::repeat_n(c, kept.len()));
            trimmed.extend(kept);
        }
    }
    let Some(mut dir) = lda_direction(&trimmed, &trimmed_labels, j) else {
        return (zero(), None);
    };
    dir.class_means = class_means;
    dir.class_sds = class_sds;
    let z: Vec<f64> = all_points.iter().map(|&p| dir.project(p)).collect();
    let value = main_effect_values(&z, &all_labels, j);
    (
        TestStatistic {
            value,
            kind: StatKind::Linear,
            vars: vec![v1, v2],
        },
        Some(dir),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Column, Header, PredictorInfo, Schema};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn numeric_dataset(cols: Vec<Vec<f64>>, y: Vec<usize>, j: usize) -> Dataset {
        let mut spec = String::from("y d\n");
        for i in 0..cols.len() {
            spec.push_str(&format!("x{} n\n", i + 1));
        }
        let header = Header {
            schema: Schema::parse(&spec).unwrap(),
            class_name: "y".into(),
            class_labels: (1..=j).map(|c| c.to_string()).collect(),
            predictors: (0..cols.len())
                .map(|i| PredictorInfo {
                    name: format!("x{}", i + 1),
                    kind: PredictorKind::Numeric,
                    levels: vec![],
                })
                .collect(),
        };
        Dataset::from_parts(header, cols.into_iter().map(Column::Numeric).collect(), y).unwrap()
    }

    #[test]
    fn pearson_examples() {
        let (c, nu) = pearson_chi2(&[vec![10, 0], vec![0, 10]]);
        assert!((c - 20.0).abs() < 1e-12);
        assert_eq!(nu, 1);
        assert_eq!(pearson_chi2(&[vec![5, 5], vec![5, 5]]), (0.0, 1));
        let (_, nu) = pearson_chi2(&[vec![3, 0, 7], vec![2, 0, 8]]);
        assert_eq!(nu, 1);
        assert_eq!(pearson_chi2(&[vec![3, 4], vec![0, 0]]), (0.0, 0));
    }

    #[test]
    fn wilson_hilferty_examples() {
        assert_eq!(wilson_hilferty(7.3, 1), 7.3);
        assert_eq!(wilson_hilferty(0.0, 4), 0.0);
        assert_eq!(wilson_hilferty(3.0, 0), 0.0);
        // (10,4): 7/9 + 2*((2.5)^(1/3) - 1 + 1/18)
        let inner: f64 = 7.0 / 9.0 + 2.0 * (2.5f64.powf(1.0 / 3.0) - 1.0 + 1.0 / 18.0);
        assert!((wilson_hilferty(10.0, 4) - inner.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn wilson_hilferty_monotone_on_grid() {
        for nu in 1..30 {
            let mut prev = -1.0;
            for k in 0..400 {
                let w = wilson_hilferty(k as f64 * 0.25, nu);
                assert!(w >= prev, "nu={nu} k={k}");
                prev = w;
            }
        }
    }

    #[test]
    fn chi2_quantile_table() {
        // upper quantiles of chi-squared(1), tabulated with scipy.stats.chi2.isf
        let table = [
            (0.5, 0.454936423119572),
            (0.25, 1.32330369693147),
            (0.1, 2.70554345409541),
            (0.05, 3.84145882069412),
            (0.025, 5.02388618731489),
            (0.01, 6.63489660102121),
            (0.005, 7.87943857662242),
            (0.001, 10.8275661706627),
            (0.0001, 15.1367052266236),
            (0.0025, 9.14059346124398),
            (0.05 / 6.0, 6.96040144105298),
            (0.05 / 3.0, 5.73113928193907),
        ];
        for (alpha, q) in table {
            let got = chi2_1_upper_quantile(alpha);
            assert!(((got - q) / q).abs() < 1e-6, "alpha={alpha} got={got} want={q}");
        }
    }

    #[test]
    fn discretize_main_four_and_three_bins() {
        let vals: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
        let b = discretize_main(&vals, 100, 2);
        assert_eq!(b.n_bins, 4);
        let (m, s) = mean_sd(&vals);
        let h = s * 3f64.sqrt() / 2.0;
        assert_eq!(b.boundaries, vec![m - h, m, m + h]);
        let mut counts = [0; 4];
        for &x in &b.bins {
            counts[x] += 1;
        }
        for c in counts {
            assert!((20..=30).contains(&c), "{counts:?}");
        }
        let b = discretize_main(&vals[..30], 30, 2);
        assert_eq!(b.n_bins, 3);
        let b = discretize_main(&[2.0; 10], 10, 2);
        assert_eq!(b.n_bins, 1);
        // ties at a boundary go to the lower bin
        let b = assign_bins(&[0.0, 1.0, 2.0], vec![1.0]);
        assert_eq!(b.bins, vec![0, 0, 1]);
    }

    #[test]
    fn uniform_sample_bins_roughly_equal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let vals: Vec<f64> = (0..20000).map(|_| rng.random::<f64>()).collect();
        let b = discretize_main(&vals, vals.len(), 2);
        let mut counts = [0f64; 4];
        for &x in &b.bins {
            counts[x] += 1.0;
        }
        for c in counts {
            assert!((c / 20000.0 - 0.25).abs() < 0.02, "{counts:?}");
        }
    }

    #[test]
    fn main_effect_perfect_categorical_separation() {
        let header = Header {
            schema: Schema::parse("y d\nx c\n").unwrap(),
            class_name: "y".into(),
            class_labels: vec!["1".into(), "2".into()],
            predictors: vec![PredictorInfo {
                name: "x".into(),
                kind: PredictorKind::Categorical,
                levels: vec!["a".into(), "b".into()],
            }],
        };
        let codes: Vec<Option<u32>> = (0..20).map(|i| Some((i >= 10) as u32)).collect();
        let y: Vec<usize> = (0..20).map(|i| (i >= 10) as usize).collect();
        let ds = Dataset::from_parts(header, vec![Column::Categorical(codes)], y).unwrap();
        let rows: Vec<usize> = (0..20).collect();
        let w = main_effect_stat(&ds, &rows, 0);
        assert!((w.value - 20.0).abs() < 1e-12);
    }

    #[test]
    fn constant_inputs_give_zero() {
        let ds = numeric_dataset(vec![vec![1.0; 10], (0..10).map(f64::from).collect()], (0..10).map(|i| i % 2).collect(), 2);
        let rows: Vec<usize> = (0..10).collect();
        assert_eq!(main_effect_stat(&ds, &rows, 0).value, 0.0);
        assert_eq!(interaction_stat(&ds, &rows, 0, 1).value, 0.0);
        assert_eq!(interaction_stat(&ds, &rows, 1, 0).value, 0.0);
    }

    #[test]
    fn missing_numeric_values_form_a_column() {
        let mut x: Vec<f64> = (0..40).map(|i| (i % 7) as f64).collect();
        let y: Vec<usize> = (0..40).map(|i| (i < 20) as usize).collect();
        for (i, v) in x.iter_mut().enumerate().take(20) {
            if i % 2 == 0 {
                *v = f64::NAN;
            }
        }
        let ds = numeric_dataset(vec![x], y, 2);
        let rows: Vec<usize> = (0..40).collect();
        // missingness is entirely within class 2, so the test picks it up
        assert!(main_effect_stat(&ds, &rows, 0).value > 5.0);
    }

    #[test]
    fn lda_symmetric_and_axis_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut pts = Vec::new();
        let mut lab = Vec::new();
        for c in 0..2 {
            for _ in 0..400 {
                let (a, b): (f64, f64) = (rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                pts.push([a + c as f64, b + c as f64]);
                lab.push(c);
            }
        }
        let d = lda_direction(&pts, &lab, 2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((d.coef[0] - s).abs() < 0.05 && (d.coef[1] - s).abs() < 0.05, "{:?}", d.coef);

        let pts = vec![[0.0, 0.0], [0.0, 1.0], [0.1, 0.5], [2.0, 0.0], [2.0, 1.0], [2.1, 0.5]];
        let d = lda_direction(&pts, &[0, 0, 0, 1, 1, 1], 2).unwrap();
        assert!((d.coef[0] - 1.0).abs() < 1e-9 && d.coef[1].abs() < 1e-9, "{:?}", d.coef);
    }

    #[test]
    fn lda_single_class_is_none() {
        assert!(lda_direction(&[[0.0, 1.0], [1.0, 2.0]], &[0, 0], 2).is_none());
    }
}
