//! Bagged trees and random-subspace forests with plurality voting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Cell, Dataset};
use crate::error::{Error, Result};
use crate::harness::{stream_rng, Classifier};
use crate::tree::{grow, prune, GrowConfig, Method, Tree, FORMAT_VERSION};

pub const DEFAULT_BAGGED: usize = 100;
pub const DEFAULT_FOREST: usize = 500;
const BOOTSTRAP_ATTEMPTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnsembleKind {
    BG,
    GF,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Ensemble {
    pub format_version: u32,
    pub kind: EnsembleKind,
    pub seed: u64,
    /// RNG stream of each member under `seed`.
    pub seeds: Vec<u64>,
    pub mtry: Option<usize>,
    pub members: Vec<Tree>,
}

/// Subspace size for `k` predictors.
pub fn default_mtry(k: usize) -> usize {
    ((k as f64).sqrt().ceil() as usize).clamp(1, k.max(1))
}

/// Plurality winner; ties go to the smallest class index.
pub fn vote(votes: impl IntoIterator<Item = usize>, n_classes: usize) -> usize {
    let mut counts = vec![0usize; n_classes];
    for v in votes {
        counts[v] += 1;
    }
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

fn bootstrap(data: &Dataset, rng: &mut ChaCha8Rng, attempts: usize) -> Result<Dataset> {
    let n = data.n_rows();
    let j = data.n_classes();
    for _ in 0..attempts {
        let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let sample = data.subset(&rows);
        if sample.class_counts().iter().all(|&c| c > 0) || j == 0 {
            return Ok(sample);
        }
    }
    Err(Error::Bootstrap(attempts))
}

fn fit_members(
    data: &Dataset,
    cfg: &GrowConfig,
    b: usize,
    kind: EnsembleKind,
    mtry: Option<usize>,
) -> Result<Ensemble> {
    if b == 0 {
        return Err(Error::Config("an ensemble needs at least one member".into()));
    }
    if data.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let base = GrowConfig {
        method: Method::S,
        mtry,
        ..cfg.clone()
    };
    base.validate()?;
    let members = (0..b as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(cfg.seed, i);
            let sample = bootstrap(data, &mut rng, BOOTSTRAP_ATTEMPTS)?;
            let member = GrowConfig {
                seed: rng.random(),
                ..base.clone()
            };
            match kind {
                EnsembleKind::BG => prune(&grow(&sample, &member)?, &sample, &member),
                EnsembleKind::GF => crate::tree::grow_with(&sample, &member, Some(ChaCha8Rng::from_rng(&mut rng))),
            }
        })
        .collect::<Result<Vec<Tree>>>()?;
    Ok(Ensemble {
        format_version: FORMAT_VERSION,
        kind,
        seed: cfg.seed,
        seeds: (0..b as u64).collect(),
        mtry,
        members,
    })
}

/// `b` pruned S trees on bootstrap samples.
pub fn fit_bagged(data: &Dataset, cfg: &GrowConfig, b: usize) -> Result<Ensemble> {
    fit_members(data, cfg, b, EnsembleKind::BG, None)
}

/// `b` unpruned main-effect S trees choosing among `default_mtry(K)`
/// random predictors at every node, unless `cfg.mtry` is set.
pub fn fit_forest(data: &Dataset, cfg: &GrowConfig, b: usize) -> Result<Ensemble> {
    let mtry = cfg.mtry.unwrap_or_else(|| default_mtry(data.n_predictors()));
    fit_members(data, cfg, b, EnsembleKind::GF, Some(mtry))
}

impl Ensemble {
    pub fn n_classes(&self) -> usize {
        self.members[0].n_classes()
    }

    pub fn predict(&self, row: &[Cell]) -> usize {
        vote(self.members.iter().map(|t| t.predict(row)), self.n_classes())
    }

    pub fn predict_data(&self, data: &Dataset, r: usize) -> usize {
        vote(self.members.iter().map(|t| t.predict_data(data, r)), self.n_classes())
    }

    pub fn errors(&self, data: &Dataset) -> usize {
        (0..data.n_rows())
            .filter(|&r| self.predict_data(data, r) != data.label(r))
            .count()
    }

    pub fn accuracy(&self, data: &Dataset) -> f64 {
        1.0 - self.errors(data) as f64 / data.n_rows() as f64
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Ensemble> {
        let e: Ensemble = serde_json::from_str(text)?;
        if e.format_version != FORMAT_VERSION {
            return Err(Error::Model(format!("unsupported format_version {}", e.format_version)));
        }
        if e.members.is_empty() {
            return Err(Error::Model("ensemble has no members".into()));
        }
        if e.seeds.len() != e.members.len() {
            return Err(Error::Model("one seed per member expected".into()));
        }
        let j = e.members[0].n_classes();
        for m in &e.members {
            let checked = Tree::from_json(&serde_json::to_string(m)?)?;
            if checked.n_classes() != j {
                return Err(Error::Model("members disagree on the class set".into()));
            }
        }
        Ok(e)
    }
}

impl Classifier for Ensemble {
    fn classify(&self, data: &Dataset, row: usize) -> usize {
        self.predict_data(data, row)
    }
}
