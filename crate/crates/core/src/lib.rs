//! Classification trees with unbiased variable selection, interaction
//! detection and kernel / nearest-neighbor node models.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod ensemble;
pub mod error;
pub mod harness;
pub mod models;
pub mod split;
pub mod stats;
pub mod tree;
#[cfg(test)]
mod testutil;

pub use dataset::{
    assign_class, default_priors, load_dataset, node_stats, Cell, ClassModel, Column, CostMatrix, Dataset, Header,
    LoadOptions, NodeClassStats, PredictorKind, PriorSource, Priors, Role, Schema,
};
pub use error::{Error, Result};
pub use ensemble::{default_mtry, fit_bagged, fit_forest, vote, Ensemble, EnsembleKind};
pub use tree::{fit, grow, prune, ExportFormat, GrowConfig, Method, Tree};
