use super::*;
use crate::testutil::{dataset, unit_model, TCol};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn rows(data: &Dataset) -> Vec<usize> {
    (0..data.n_rows()).collect()
}

#[test]
fn bandwidth_examples() {
    assert!((bandwidth(1.0, 0.0, 32).unwrap() - 1.25).abs() < 1e-12);
    assert!((bandwidth(1.0, 2.0, 32).unwrap() - 1.25).abs() < 1e-12);
    // 0.7413 * 1 < 2 picks the IQR term.
    assert!((bandwidth(2.0, 1.0, 32).unwrap() - 2.5 * 0.7413 * 0.5).abs() < 1e-12);
    assert_eq!(bandwidth(0.0, 0.0, 10), None);
}

#[test]
fn k_neighbors_examples() {
    assert_eq!(k_neighbors(3), 3);
    assert_eq!(k_neighbors(100), 5);
    assert_eq!(k_neighbors(20), 3);
    assert_eq!(k_neighbors(2), 2);
    for n in 3..5000 {
        let k = k_neighbors(n);
        assert!((3..=n).contains(&k));
    }
}

fn two_gaussians(rng: &mut ChaCha8Rng, per_class: usize) -> Dataset {
    let a = Normal::new(-1.0, 1.0).unwrap();
    let b = Normal::new(1.0, 1.0).unwrap();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for _ in 0..per_class {
        x.push(a.sample(rng));
        y.push(0);
        x.push(b.sample(rng));
        y.push(1);
    }
    dataset(vec![TCol::N(x)], y, 2)
}

#[test]
fn kernel_boundary_near_bayes_midpoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data = two_gaussians(&mut rng, 200);
    let m = fit_kernel_model(&data, &rows(&data), &unit_model(&data), &[0], DensityRule::Raw);
    // Class changes from 0 to 1 once in [-1, 1]; locate it.
    let grid: Vec<f64> = (0..=2000).map(|i| -1.0 + i as f64 / 1000.0).collect();
    let preds: Vec<usize> = grid.iter().map(|&x| m.predict(&[Cell::Num(x)])).collect();
    assert_eq!(preds[0], 0);
    assert_eq!(*preds.last().unwrap(), 1);
    let switch = grid[preds.iter().position(|&p| p == 1).unwrap()];
    assert!(switch.abs() < 0.15, "boundary at {switch}");
}

#[test]
fn kernel_density_integrates_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pts: Vec<f64> = (0..50).map(|_| rng.random_range(-2.0..3.0)).collect();
    let h = 0.4;
    let lo = pts.iter().copied().fold(f64::INFINITY, f64::min) - 8.0 * h;
    let hi = pts.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 8.0 * h;
    let steps = 20_000;
    let dx = (hi - lo) / steps as f64;
    let total: f64 = (0..=steps)
        .map(|i| {
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            w * kernel_density_1d(&pts, h, lo + i as f64 * dx)
        })
        .sum::<f64>()
        * dx;
    assert!((total - 1.0).abs() < 1e-3, "{total}");
}

#[test]
fn bivariate_density_integrates_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pts: Vec<[f64; 2]> = (0..30).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(0.0..2.0)]).collect();
    let h = [0.3, 0.5];
    let rho = 0.6;
    let (x0, x1) = (-1.0 - 8.0 * h[0], 1.0 + 8.0 * h[0]);
    let (y0, y1) = (0.0 - 8.0 * h[1], 2.0 + 8.0 * h[1]);
    let steps = 300;
    let (dx, dy) = ((x1 - x0) / steps as f64, (y1 - y0) / steps as f64);
    let mut total = 0.0;
    for i in 0..steps {
        for k in 0..steps {
            let x = [x0 + (i as f64 + 0.5) * dx, y0 + (k as f64 + 0.5) * dy];
            total += kernel_density_2d(&pts, h, rho, x);
        }
    }
    total *= dx * dy;
    assert!((total - 1.0).abs() < 5e-3, "{total}");
}

#[test]
fn single_class_node_is_constant() {
    let data = dataset(vec![TCol::N(vec![1.0, 2.0, 3.0, 4.0])], vec![1, 1, 1, 0], 2);
    let model = unit_model(&data);
    let m = fit_node_model(&data, &[0, 1, 2], &model, &[0], ModelFamily::Kernel, DensityRule::Raw);
    assert_eq!(m, NodeModel::Constant { class: 1 });
    assert_eq!(m.predict(&[Cell::Num(100.0)]), 1);
}

#[test]
fn kernel_predicts_class_at_isolated_training_points() {
    let x = vec![0.0, 0.1, 0.2, 10.0, 10.1, 10.2];
    let data = dataset(vec![TCol::N(x.clone())], vec![0, 0, 0, 1, 1, 1], 2);
    let m = fit_kernel_model(&data, &rows(&data), &unit_model(&data), &[0], DensityRule::Raw);
    for (i, &v) in x.iter().enumerate() {
        assert_eq!(m.predict(&[Cell::Num(v)]), data.label(i));
    }
}

#[test]
fn missing_and_unseen_use_fallback() {
    let data = dataset(
        vec![
            TCol::N(vec![0.0, 0.5, 1.0, 5.0, 5.5]),
            TCol::C(vec![Some(0), Some(0), Some(1), Some(1), Some(1)], 3),
        ],
        vec![0, 0, 0, 1, 1],
        2,
    );
    let model = unit_model(&data);
    for family in [ModelFamily::Kernel, ModelFamily::NearestNeighbor] {
        let m = fit_node_model(&data, &rows(&data), &model, &[0], family, DensityRule::Raw);
        assert_eq!(m.predict(&[Cell::Num(f64::NAN), Cell::Cat(Some(0))]), 0);
        let t = fit_node_model(&data, &rows(&data), &model, &[1], family, DensityRule::Raw);
        assert_eq!(t.kind_name(), "table");
        assert_eq!(t.predict(&[Cell::Num(1.0), Cell::Cat(Some(2))]), 0);
        assert_eq!(t.predict(&[Cell::Num(1.0), Cell::Cat(Some(crate::dataset::UNSEEN_LEVEL))]), 0);
        assert_eq!(t.predict(&[Cell::Num(1.0), Cell::Cat(None)]), 0);
        assert_eq!(t.predict(&[Cell::Num(1.0), Cell::Cat(Some(0))]), 0);
    }
}

#[test]
fn table_kernel_uses_class_frequencies() {
    // Level 1 holds 2 of 2 class-1 rows and 2 of 8 class-0 rows: the
    // class-conditional frequencies favor class 1 although class 0 is the
    // majority there under equal counts.
    let x = vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 1].into_iter().map(Some).collect();
    let y = vec![0, 0, 0, 0, 0, 0, 0, 0, 1, 1];
    let data = dataset(vec![TCol::C(x, 2)], y, 2);
    let model = unit_model(&data);
    let raw = fit_kernel_model(&data, &rows(&data), &model, &[0], DensityRule::Raw);
    assert_eq!(raw.predict(&[Cell::Cat(Some(1))]), 1);
    let weighted = fit_kernel_model(&data, &rows(&data), &model, &[0], DensityRule::PriorWeighted);
    // 2/8 * 0.8 = 0.2 vs 2/2 * 0.2 = 0.2: tie goes to class 0.
    assert_eq!(weighted.predict(&[Cell::Cat(Some(1))]), 0);
    let nn = fit_nn_model(&data, &rows(&data), &model, &[0]);
    assert_eq!(nn.predict(&[Cell::Cat(Some(1))]), 0);
}

#[test]
fn nn_three_nearest_decide() {
    let m = NodeModel::Nn1d {
        var: 0,
        points: vec![(0.0, 0), (0.5, 0), (5.0, 2), (5.1, 2), (5.2, 2), (9.0, 1)],
        k: 3,
        n_classes: 3,
        fallback: 0,
    };
    assert_eq!(m.predict(&[Cell::Num(5.05)]), 2);
}

#[test]
fn nn_ties_at_rank_k_included() {
    // Distances 1, 2, 2, 2: with k = 3 all four count, class 1 wins 3-1.
    let m = NodeModel::Nn1d {
        var: 0,
        points: vec![(1.0, 0), (2.0, 1), (-2.0, 1), (2.0, 1)],
        k: 3,
        n_classes: 2,
        fallback: 0,
    };
    assert_eq!(m.predict(&[Cell::Num(0.0)]), 1);
    // Vote tie goes to the smaller class.
    let m = NodeModel::Nn1d {
        var: 0,
        points: vec![(1.0, 1), (-1.0, 0), (5.0, 1)],
        k: 2,
        n_classes: 2,
        fallback: 1,
    };
    assert_eq!(m.predict(&[Cell::Num(0.0)]), 0);
}

fn random_2d(rng: &mut ChaCha8Rng, n: usize) -> Dataset {
    let x1: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let x2: Vec<f64> = (0..n).map(|i| 3.0 * x1[i] + rng.random_range(-1.0..1.0)).collect();
    let y: Vec<usize> = (0..n).map(|i| ((x1[i] + 0.2 * x2[i]) > 0.0) as usize).collect();
    dataset(vec![TCol::N(x1), TCol::N(x2)], y, 2)
}

/// Brute-force k-NN with the Mahalanobis metric of the sample covariance.
fn knn_oracle(data: &Dataset, q: [f64; 2]) -> usize {
    let n = data.n_rows();
    let pts: Vec<[f64; 2]> = (0..n).map(|r| [data.num(r, 0), data.num(r, 1)]).collect();
    let mean = [
        pts.iter().map(|p| p[0]).sum::<f64>() / n as f64,
        pts.iter().map(|p| p[1]).sum::<f64>() / n as f64,
    ];
    let mut c = [[0.0; 2]; 2];
    for p in &pts {
        for a in 0..2 {
            for b in 0..2 {
                c[a][b] += (p[a] - mean[a]) * (p[b] - mean[b]) / (n as f64 - 1.0);
            }
        }
    }
    let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
    let inv = [[c[1][1] / det, -c[0][1] / det], [-c[1][0] / det, c[0][0] / det]];
    let mut d: Vec<(f64, usize)> = pts
        .iter()
        .enumerate()
        .map(|(r, p)| {
            let v = [p[0] - q[0], p[1] - q[1]];
            let m = v[0] * v[0] * inv[0][0] + 2.0 * v[0] * v[1] * inv[0][1] + v[1] * v[1] * inv[1][1];
            (m, data.label(r))
        })
        .collect();
    d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let k = ((n as f64).ln().ceil() as usize).max(3);
    let cutoff = d[k - 1].0;
    let mut votes = [0usize; 2];
    for &(m, c) in &d {
        if m <= cutoff {
            votes[c] += 1;
        }
    }
    if votes[1] > votes[0] {
        1
    } else {
        0
    }
}

#[test]
fn nn_2d_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let data = random_2d(&mut rng, 50);
    let m = fit_nn_model(&data, &rows(&data), &unit_model(&data), &[0, 1]);
    assert_eq!(m.kind_name(), "nn-2d");
    for _ in 0..100 {
        let q = [rng.random_range(-1.2..1.2), rng.random_range(-4.0..4.0)];
        assert_eq!(m.predict(&[Cell::Num(q[0]), Cell::Num(q[1])]), knn_oracle(&data, q));
    }
}

#[test]
fn nn_2d_scale_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let data = random_2d(&mut rng, 80);
    for scale in [4.0, 0.25] {
        let x1: Vec<f64> = (0..80).map(|r| scale * data.num(r, 0)).collect();
        let x2: Vec<f64> = (0..80).map(|r| scale * data.num(r, 1)).collect();
        let scaled = dataset(vec![TCol::N(x1), TCol::N(x2)], data.labels().to_vec(), 2);
        let a = fit_nn_model(&data, &rows(&data), &unit_model(&data), &[0, 1]);
        let b = fit_nn_model(&scaled, &rows(&scaled), &unit_model(&scaled), &[0, 1]);
        for _ in 0..100 {
            let q = [rng.random_range(-1.2..1.2), rng.random_range(-4.0..4.0)];
            assert_eq!(
                a.predict(&[Cell::Num(q[0]), Cell::Num(q[1])]),
                b.predict(&[Cell::Num(scale * q[0]), Cell::Num(scale * q[1])])
            );
        }
    }
}

fn mixed(rng: &mut ChaCha8Rng, n: usize) -> Dataset {
    let c: Vec<Option<u32>> = (0..n).map(|_| Some(rng.random_range(0..3))).collect();
    let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y: Vec<usize> = (0..n)
        .map(|i| {
            let flip = c[i] == Some(1);
            ((x[i] > 0.0) ^ flip) as usize
        })
        .collect();
    dataset(vec![TCol::C(c, 3), TCol::N(x)], y, 2)
}

#[test]
fn mixed_models_follow_level_specific_boundaries() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let data = mixed(&mut rng, 300);
    let model = unit_model(&data);
    for family in [ModelFamily::Kernel, ModelFamily::NearestNeighbor] {
        let m = fit_node_model(&data, &rows(&data), &model, &[0, 1], family, DensityRule::Raw);
        assert!(m.kind_name().ends_with("mixed"));
        let mut errors = 0;
        for _ in 0..200 {
            let l = rng.random_range(0..3u32);
            let x: f64 = rng.random_range(-1.0..1.0);
            if x.abs() < 0.1 {
                continue;
            }
            let truth = ((x > 0.0) ^ (l == 1)) as usize;
            if m.predict(&[Cell::Cat(Some(l)), Cell::Num(x)]) != truth {
                errors += 1;
            }
        }
        assert!(errors <= 10, "{family:?}: {errors}");
    }
}

#[test]
fn kernel_2d_handles_constant_coordinate() {
    // Class 1 has a constant first coordinate: it becomes a point mass.
    let x1 = vec![0.0, 1.0, 2.0, 3.0, 5.0, 5.0, 5.0, 5.0];
    let x2 = vec![0.0, 1.0, 0.5, 2.0, 0.0, 1.0, 2.0, 3.0];
    let data = dataset(vec![TCol::N(x1), TCol::N(x2)], vec![0, 0, 0, 0, 1, 1, 1, 1], 2);
    let m = fit_kernel_model(&data, &rows(&data), &unit_model(&data), &[0, 1], DensityRule::Raw);
    assert_eq!(m.predict(&[Cell::Num(5.0), Cell::Num(1.5)]), 1);
    assert_eq!(m.predict(&[Cell::Num(4.9), Cell::Num(1.5)]), 0);
}

#[test]
fn models_round_trip_through_json() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let data = mixed(&mut rng, 60);
    let model = unit_model(&data);
    for family in [ModelFamily::Kernel, ModelFamily::NearestNeighbor] {
        for vars in [vec![0], vec![1], vec![0, 1]] {
            let m = fit_node_model(&data, &rows(&data), &model, &vars, family, DensityRule::PriorWeighted);
            let text = serde_json::to_string(&m).unwrap();
            let back: NodeModel = serde_json::from_str(&text).unwrap();
            assert_eq!(m, back);
        }
    }
}

#[test]
fn collinear_class_concentrates_on_its_line() {
    // Class 1 lies on x2 = 2 x1; class 0 is a diffuse cloud around it.
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut x1 = Vec::new();
    let mut x2 = Vec::new();
    let mut y = Vec::new();
    for _ in 0..40 {
        x1.push(rng.random_range(-1.0..1.0));
        x2.push(rng.random_range(-2.0..2.0));
        y.push(0);
        let u: f64 = rng.random_range(-1.0..1.0);
        x1.push(u);
        x2.push(2.0 * u);
        y.push(1);
    }
    let data = dataset(vec![TCol::N(x1.clone()), TCol::N(x2.clone())], y, 2);
    let m = fit_kernel_model(&data, &rows(&data), &unit_model(&data), &[0, 1], DensityRule::Raw);
    match &m {
        NodeModel::Kernel2d { classes, .. } => assert_eq!(classes[1].rho, 1.0),
        other => panic!("{other:?}"),
    }
    for r in 0..data.n_rows() {
        assert_eq!(m.predict(&[Cell::Num(x1[r]), Cell::Num(x2[r])]), data.label(r));
    }
    assert_eq!(m.predict(&[Cell::Num(0.25), Cell::Num(0.5)]), 1);
    assert_eq!(m.predict(&[Cell::Num(0.25), Cell::Num(0.51)]), 0);
}
