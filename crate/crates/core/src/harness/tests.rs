use super::*;
use crate::dataset::Cell;

fn column(data: &Dataset, v: usize) -> Vec<f64> {
    (0..data.n_rows()).map(|r| data.num(r, v)).collect()
}

fn corr(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let sab: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let saa: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let sbb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    sab / (saa * sbb).sqrt()
}

#[test]
fn chessboard_construction() {
    let data = gen_chessboard(1000, 3).unwrap();
    assert_eq!(data.n_predictors(), 10);
    let counts = data.class_counts();
    assert!((counts[0] as f64 - 500.0).abs() <= 3.0 * 1000f64.sqrt());
    for r in 0..data.n_rows() {
        let (x1, x2) = (data.num(r, 0), data.num(r, 1));
        assert!((-1.0..=1.0).contains(&x1) && (-1.0..=1.0).contains(&x2));
        assert_eq!(chessboard_class(x1, x2), data.label(r));
        for v in 2..10 {
            assert!((0.0..1.0).contains(&data.num(r, v)));
        }
    }
    let squares: std::collections::HashSet<(i64, i64)> = (0..data.n_rows())
        .map(|r| (((data.num(r, 0) + 1.0) * 2.0).floor() as i64, ((data.num(r, 1) + 1.0) * 2.0).floor() as i64))
        .collect();
    assert_eq!(squares.len(), 16);
}

#[test]
fn circle_lines_construction() {
    let data = gen_circle_lines(300, 4).unwrap();
    assert_eq!(data.class_counts(), vec![100, 100, 100]);
    for r in 0..300 {
        let (x1, x2) = (data.num(r, 0), data.num(r, 1));
        match data.label(r) {
            0 => assert!((x1 * x1 + x2 * x2 - 1.0).abs() < 1e-12),
            1 => assert_eq!(x1, x2),
            _ => assert_eq!(x1, -x2),
        }
        assert!(x1.abs() <= 1.0 && x2.abs() <= 1.0);
    }
    for v in 5..8 {
        let mut levels: Vec<u32> = (0..300).map(|r| data.level(r, v)).collect();
        levels.sort_unstable();
        levels.dedup();
        assert!(levels.len() <= 21);
    }
    assert!(gen_circle_lines(301, 4).is_err());
}

#[test]
fn generators_are_deterministic() {
    assert_eq!(gen_chessboard(200, 9).unwrap().to_csv(), gen_chessboard(200, 9).unwrap().to_csv());
    assert_ne!(gen_chessboard(200, 9).unwrap().to_csv(), gen_chessboard(200, 10).unwrap().to_csv());
    assert_eq!(gen_circle_lines(90, 1).unwrap().to_csv(), gen_circle_lines(90, 1).unwrap().to_csv());
    let a = gen_bias_scenario(BiasScenario::Dependence, 100, 2).unwrap();
    let b = gen_bias_scenario(BiasScenario::Dependence, 100, 2).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
}

#[test]
fn dependence_cell_probability() {
    let trials = 20;
    let n = 500;
    let mut hits = 0;
    for t in 0..trials {
        let data = gen_bias_scenario(BiasScenario::Dependence, n, t).unwrap();
        hits += (0..n).filter(|&r| data.level(r, 1) == 0 && data.level(r, 2) == 0).count();
    }
    let total = (trials as usize * n) as f64;
    let p = 1.0 / 12.0;
    let band = 3.0 * (p * (1.0 - p) / total).sqrt();
    assert!((hits as f64 / total - p).abs() < band);
}

#[test]
fn scenario_correlations() {
    let ind = gen_bias_scenario(BiasScenario::Independence, 500, 5).unwrap();
    assert!(corr(&column(&ind, 3), &column(&ind, 4)).abs() < 0.1);
    assert!(column(&ind, 3).iter().all(|&v| v >= 0.0));
    let dep = gen_bias_scenario(BiasScenario::Dependence, 500, 5).unwrap();
    assert!((corr(&column(&dep, 3), &column(&dep, 4)) - 0.7).abs() < 0.1);
}

#[test]
fn independence_marginals() {
    let mut counts = [0usize; 3];
    for t in 0..10 {
        let data = gen_bias_scenario(BiasScenario::Independence, 600, 100 + t).unwrap();
        for r in 0..600 {
            counts[data.level(r, 1) as usize] += 1;
        }
    }
    let total = 6000.0;
    for (c, p) in counts.iter().zip([1.0 / 6.0, 1.0 / 3.0, 0.5]) {
        assert!((*c as f64 / total - p).abs() < 4.0 * (p * (1.0 - p) / total).sqrt());
    }
}

#[test]
fn small_bias_simulation_is_consistent() {
    let report = run_bias_simulation(BiasScenario::Independence, 120, 500, 7).unwrap();
    assert_eq!(report.split_trials, 120);
    assert!((report.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    assert_eq!(&report.linear[..3], &[0, 0, 0]);
    let again = run_bias_simulation(BiasScenario::Independence, 120, 500, 7).unwrap();
    assert_eq!(report, again);
    assert!(run_bias_simulation(BiasScenario::Independence, 0, 500, 7).is_err());
}

#[test]
fn crossval_on_separable_data() {
    let x: Vec<f64> = (0..200).map(|i| i as f64 / 10.0).collect();
    let y: Vec<usize> = x.iter().map(|&v| (v > 7.05) as usize).collect();
    let data = Dataset::from_columns("y", labels(2), vec![num("x", x)], y).unwrap();
    let cv = crossval_error(&data, &GrowConfig::default(), 10, 1).unwrap();
    assert!(cv.error <= 0.05, "{}", cv.error);
    assert_eq!(cv.fold_errors.len(), 10);
    assert_eq!(cv, crossval_error(&data, &GrowConfig::default(), 10, 1).unwrap());
}

#[test]
fn crossval_on_random_labels() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let x: Vec<f64> = (0..300).map(|_| rng.random()).collect();
    let mut y: Vec<usize> = (0..300).map(|i| i % 2).collect();
    rand::seq::SliceRandom::shuffle(&mut y[..], &mut rng);
    let data = Dataset::from_columns("y", labels(2), vec![num("x", x)], y).unwrap();
    let cv = crossval_error(&data, &GrowConfig::default(), 10, 3).unwrap();
    assert!((cv.error - 0.5).abs() <= 0.1, "{}", cv.error);
}

struct Majority(usize);

impl Classifier for Majority {
    fn classify(&self, _: &Dataset, _: usize) -> usize {
        self.0
    }
}

#[test]
fn majority_classifier_cv_error_is_exact() {
    // 70 / 30 split with folds of 7 and 3.
    let y: Vec<usize> = (0..100).map(|i| (i >= 70) as usize).collect();
    let x: Vec<f64> = (0..100).map(f64::from).collect();
    let data = Dataset::from_columns("y", labels(2), vec![num("x", x)], y).unwrap();
    let cv = crossval_with(&data, &CostMatrix::unit(2), 10, 5, |d| {
        let c = d.class_counts();
        Ok(Majority(if c[1] > c[0] { 1 } else { 0 }))
    })
    .unwrap();
    assert!((cv.error - 0.3).abs() < 1e-15);
    assert!(cv.fold_errors.iter().all(|&e| e == 0.3));
}

#[test]
fn relative_metrics_examples() {
    let t = relative_metrics(&[vec![0.1, 0.2]]).unwrap();
    assert_eq!(t.means, vec![1.0, 2.0]);
    let rows = vec![vec![0.1, 0.2, 0.3], vec![0.2, 0.2, 0.4], vec![0.5, 0.25, 1.0]];
    let t = relative_metrics(&rows).unwrap();
    let hand = [4.0 / 3.0, 4.0 / 3.0, 3.0];
    for (a, b) in t.means.iter().zip(hand) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!(t.flagged.is_empty());
    let best_everywhere = relative_metrics(&[vec![0.1, 0.3], vec![0.2, 0.25]]).unwrap();
    assert_eq!(best_everywhere.means[0], 1.0);
}

#[test]
fn relative_metrics_zero_rows() {
    let t = relative_metrics(&[vec![0.0, 0.0, 0.2], vec![0.1, 0.2, 0.1]]).unwrap();
    assert_eq!(t.flagged, vec![0]);
    assert_eq!(t.means, vec![1.0, 1.5, 1.0]);
    assert!(relative_metrics(&[vec![0.1]]).is_err());
    assert!(relative_metrics(&[vec![0.1, f64::NAN]]).is_err());
}

#[test]
fn dump_and_reload() {
    let dir = std::env::temp_dir().join(format!("uvtree-harness-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let data = gen_circle_lines(30, 2).unwrap();
    write_dataset(&data, &dir, "cl").unwrap();
    let schema = crate::dataset::Schema::from_path(dir.join("cl.schema")).unwrap();
    let back = Dataset::load_path(dir.join("cl.csv"), &schema, &Default::default()).unwrap();
    assert_eq!(back.n_rows(), 30);
    for r in 0..30 {
        assert_eq!(back.label(r), data.label(r));
        assert_eq!(back.num(r, 0), data.num(r, 0));
        let name = |d: &Dataset, r| match d.cell(r, 6) {
            Cell::Cat(Some(l)) => d.header().predictors[6].levels[l as usize].clone(),
            _ => unreachable!(),
        };
        assert_eq!(name(&back, r), name(&data, r));
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn stream_rngs_differ() {
    let a: u64 = stream_rng(1, 0).random();
    let b: u64 = stream_rng(1, 1).random();
    assert_ne!(a, b);
    assert_eq!(a, stream_rng(1, 0).random::<u64>());
}

#[test]
fn circle_lines_root_models_on_x1_x2() {
    use crate::models::{fit_node_model, DensityRule, ModelFamily};
    for (family, limit) in [(ModelFamily::Kernel, 10), (ModelFamily::NearestNeighbor, 20)] {
        let mut passing = 0;
        for seed in 1..=5 {
            let data = gen_circle_lines(300, seed).unwrap();
            let classes = ClassModel::new(data.class_counts(), None, CostMatrix::unit(3));
            let rows: Vec<usize> = (0..300).collect();
            let m = fit_node_model(&data, &rows, &classes, &[0, 1], family, DensityRule::Raw);
            let errors = rows.iter().filter(|&&r| m.predict_data(&data, r) != data.label(r)).count();
            if errors <= limit {
                passing += 1;
            }
        }
        assert!(passing >= 4, "{family:?}: {passing}/5");
    }
}
