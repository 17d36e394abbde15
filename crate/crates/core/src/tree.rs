//! Tree growth, cost-complexity pruning, prediction and export.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Cell, ClassModel, CostMatrix, Dataset, Header, PredictorKind, Priors};
use crate::error::{Error, Result};
use crate::models::{fit_node_model, DensityRule, ModelFamily, NodeModel};
use crate::split::{decide, select_variables, SelectionPath, SplitConfig, SplitContext, SplitRule};
use crate::stats::is_nonconstant;

pub const FORMAT_VERSION: u32 = 1;

/// Tree-growing method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    /// Constant node models, linear splits enabled.
    S,
    /// Kernel discriminant node models.
    K,
    /// Nearest-neighbor node models.
    N,
}

impl Method {
    pub fn family(self) -> ModelFamily {
        match self {
            Method::S => ModelFamily::Constant,
            Method::K => ModelFamily::Kernel,
            Method::N => ModelFamily::NearestNeighbor,
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        match s {
            "S" | "s" => Ok(Method::S),
            "K" | "k" => Ok(Method::K),
            "N" | "n" => Ok(Method::N),
            _ => Err(Error::Config(format!("unknown tree method `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowConfig {
    pub method: Method,
    pub m0: usize,
    pub max_depth: usize,
    pub folds: usize,
    pub seed: u64,
    /// Standard-error multiple of the pruning rule (0 picks the minimum CV cost).
    pub se_rule: f64,
    pub density: DensityRule,
    /// User priors; estimated from the class frequencies when `None`.
    pub priors: Option<Priors>,
    pub costs: Option<CostMatrix>,
    /// Random predictor subset size per node. Setting it also turns off
    /// interaction and linear selection.
    pub mtry: Option<usize>,
}

impl Default for GrowConfig {
    fn default() -> Self {
        GrowConfig {
            method: Method::S,
            m0: 5,
            max_depth: 30,
            folds: 10,
            seed: 1,
            se_rule: 0.0,
            density: DensityRule::Raw,
            priors: None,
            costs: None,
            mtry: None,
        }
    }
}

impl GrowConfig {
    pub fn with_method(method: Method) -> GrowConfig {
        GrowConfig {
            method,
            ..GrowConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m0 < 1 {
            return Err(Error::Config("m0 must be at least 1".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config("folds must be at least 2".into()));
        }
        if self.mtry == Some(0) {
            return Err(Error::Config("mtry must be at least 1".into()));
        }
        if !(self.se_rule >= 0.0) {
            return Err(Error::Config("se_rule must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn split_config(&self) -> SplitConfig {
        let main_only = self.mtry.is_some();
        SplitConfig {
            linear: self.method == Method::S && !main_only,
            interactions: !main_only,
            m0: self.m0,
        }
    }

    fn class_model(&self, data: &Dataset) -> ClassModel {
        let costs = self.costs.clone().unwrap_or_else(|| CostMatrix::unit(data.n_classes()));
        ClassModel::new(data.class_counts(), self.priors.as_ref(), costs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSplit {
    pub rule: SplitRule,
    pub path: SelectionPath,
    pub selected: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub depth: usize,
    pub counts: Vec<usize>,
    pub n: usize,
    /// Resubstitution cost of the node model, `sum C(pred|y) pi(y)/N_y`.
    pub risk: f64,
    pub model: NodeModel,
    pub split: Option<NodeSplit>,
    /// `[left, right]`
    pub children: Option<[usize; 2]>,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PruningInfo {
    /// Weakest-link penalties of the subtree sequence, starting at 0.
    pub alphas: Vec<f64>,
    /// Leaf counts of the subtrees.
    pub leaves: Vec<usize>,
    pub cv_costs: Vec<f64>,
    pub cv_se: Vec<f64>,
    pub chosen: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub format_version: u32,
    pub header: Header,
    pub config: GrowConfig,
    pub priors: Priors,
    pub costs: CostMatrix,
    /// Arena; the root is node 0 and children follow their parent.
    pub nodes: Vec<Node>,
    pub pruning: Option<PruningInfo>,
}

/// Nested subtrees indexed by `alphas`: an internal node is a leaf of
/// subtree `k` when `collapse[node] <= k`.
#[derive(Clone, Debug, PartialEq)]
pub struct PruneSequence {
    pub alphas: Vec<f64>,
    pub collapse: Vec<Option<usize>>,
}

impl PruneSequence {
    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Index of the subtree used for penalty `alpha`.
    pub fn index_for(&self, alpha: f64) -> usize {
        self.alphas.iter().rposition(|&a| a <= alpha).unwrap_or(0)
    }
}

fn model_risk(data: &Dataset, rows: &[usize], model: &NodeModel, classes: &ClassModel) -> f64 {
    rows.iter()
        .map(|&r| {
            let y = data.label(r);
            classes.costs.cost(model.predict_data(data, r), y) * classes.weights[y]
        })
        .sum()
}

struct Grower<'a> {
    ctx: SplitContext<'a>,
    cfg: &'a GrowConfig,
    split: SplitConfig,
    rng: Option<ChaCha8Rng>,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn candidates(&mut self, rows: &[usize]) -> Option<Vec<usize>> {
        let data = self.ctx.data;
        let (mtry, rng) = match (self.cfg.mtry, self.rng.as_mut()) {
            (Some(m), Some(rng)) => (m, rng),
            _ => return None,
        };
        let mut vars: Vec<usize> = (0..data.n_predictors())
            .filter(|&v| is_nonconstant(data, rows, v))
            .collect();
        vars.shuffle(rng);
        vars.truncate(mtry);
        vars.sort_unstable();
        Some(vars)
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let data = self.ctx.data;
        let classes = self.ctx.classes;
        let counts = data.counts_of(&rows);
        let present = counts.iter().filter(|&&c| c > 0).count();
        let id = self.nodes.len();
        let fallback = NodeModel::Constant {
            class: classes.assign(&counts),
        };
        self.nodes.push(Node {
            depth,
            n: rows.len(),
            risk: classes.node_risk(&counts),
            counts,
            model: fallback,
            split: None,
            children: None,
        });
        if present <= 1 {
            return id;
        }
        let candidates = self.candidates(&rows);
        let report = select_variables(
            &self.ctx,
            &rows,
            candidates.as_deref().unwrap_or(&(0..data.n_predictors()).collect::<Vec<_>>()),
            self.split.interactions,
            self.split.linear,
        );
        let family = self.cfg.method.family();
        if family != ModelFamily::Constant {
            if let Some(rep) = &report {
                let model = fit_node_model(data, &rows, classes, &rep.selection.vars(), family, self.cfg.density);
                self.nodes[id].risk = model_risk(data, &rows, &model, classes);
                self.nodes[id].model = model;
            }
        }
        if rows.len() < 2 * self.cfg.m0 || depth >= self.cfg.max_depth {
            return id;
        }
        let Some(decision) = report.and_then(|rep| decide(&self.ctx, &rows, &self.split, &rep)) else {
            return id;
        };
        let (left, right): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&r| decision.rule.goes_left_data(data, r));
        if left.is_empty() || right.is_empty() {
            return id;
        }
        drop(rows);
        self.nodes[id].split = Some(NodeSplit {
            rule: decision.rule,
            path: decision.path,
            selected: decision.selected,
        });
        let l = self.grow(left, depth + 1);
        let r = self.grow(right, depth + 1);
        self.nodes[id].children = Some([l, r]);
        id
    }
}

pub(crate) fn grow_with(data: &Dataset, cfg: &GrowConfig, rng: Option<ChaCha8Rng>) -> Result<Tree> {
    cfg.validate()?;
    if data.n_rows() == 0 {
        return Err(Error::EmptyDataset);
    }
    let classes = cfg.class_model(data);
    if classes.costs.n_classes() != data.n_classes() {
        return Err(Error::Costs("cost matrix size does not match the classes".into()));
    }
    let mut grower = Grower {
        ctx: SplitContext {
            data,
            classes: &classes,
            n_train: data.n_rows(),
        },
        cfg,
        split: cfg.split_config(),
        rng,
        nodes: Vec::new(),
    };
    grower.grow((0..data.n_rows()).collect(), 0);
    Ok(Tree {
        format_version: FORMAT_VERSION,
        header: data.header().clone(),
        config: cfg.clone(),
        priors: classes.priors.clone(),
        costs: classes.costs.clone(),
        nodes: grower.nodes,
        pruning: None,
    })
}

/// Grow the maximal tree.
pub fn grow(data: &Dataset, cfg: &GrowConfig) -> Result<Tree> {
    let rng = cfg.mtry.map(|_| ChaCha8Rng::seed_from_u64(cfg.seed));
    grow_with(data, cfg, rng)
}

/// Grow and prune.
pub fn fit(data: &Dataset, cfg: &GrowConfig) -> Result<Tree> {
    let tree = grow(data, cfg)?;
    prune(&tree, data, cfg)
}

const ALPHA_TOL: f64 = 1e-12;

/// Minimal cost-complexity subtree sequence of a grown tree.
pub fn prune_sequence(nodes: &[Node]) -> PruneSequence {
    let n = nodes.len();
    let mut collapse: Vec<Option<usize>> = vec![None; n];
    let mut branch_risk = vec![0.0; n];
    let mut leaves = vec![1usize; n];
    // Smallest subtree minimizing resubstitution cost.
    for t in (0..n).rev() {
        match nodes[t].children {
            None => branch_risk[t] = nodes[t].risk,
            Some([l, r]) => {
                let br = branch_risk[l] + branch_risk[r];
                if nodes[t].risk <= br + ALPHA_TOL {
                    collapse[t] = Some(0);
                    branch_risk[t] = nodes[t].risk;
                    leaves[t] = 1;
                } else {
                    branch_risk[t] = br;
                    leaves[t] = leaves[l] + leaves[r];
                }
            }
        }
    }
    let mut alphas = vec![0.0];
    let is_leaf = |t: usize, collapse: &[Option<usize>]| nodes[t].children.is_none() || collapse[t].is_some();
    while !is_leaf(0, &collapse) {
        // Branch statistics of the current subtree.
        for t in (0..n).rev() {
            if is_leaf(t, &collapse) {
                branch_risk[t] = nodes[t].risk;
                leaves[t] = 1;
            } else {
                let [l, r] = nodes[t].children.unwrap();
                branch_risk[t] = branch_risk[l] + branch_risk[r];
                leaves[t] = leaves[l] + leaves[r];
            }
        }
        let mut reach = vec![false; n];
        reach[0] = true;
        let mut g_min = f64::INFINITY;
        let mut g = vec![f64::INFINITY; n];
        for t in 0..n {
            if !reach[t] || is_leaf(t, &collapse) {
                continue;
            }
            let [l, r] = nodes[t].children.unwrap();
            reach[l] = true;
            reach[r] = true;
            g[t] = (nodes[t].risk - branch_risk[t]) / (leaves[t] - 1) as f64;
            g_min = g_min.min(g[t]);
        }
        let last = *alphas.last().unwrap();
        let k = if g_min <= last + ALPHA_TOL {
            alphas.len() - 1
        } else {
            alphas.push(g_min);
            alphas.len() - 1
        };
        for t in 0..n {
            if g[t] <= g_min + ALPHA_TOL {
                collapse[t] = Some(k);
            }
        }
    }
    PruneSequence { alphas, collapse }
}

fn leaf_in(nodes: &[Node], seq: &PruneSequence, k: usize, cell: impl Fn(usize) -> Cell) -> usize {
    let mut t = 0;
    loop {
        let node = &nodes[t];
        match (node.children, seq.collapse[t]) {
            (Some([l, r]), c) if c.is_none_or(|c| c > k) => {
                let rule = &node.split.as_ref().expect("internal node has a split").rule;
                t = if rule.goes_left_with(&cell) { l } else { r };
            }
            _ => return t,
        }
    }
}

fn count_leaves(nodes: &[Node], seq: &PruneSequence, k: usize) -> usize {
    let mut stack = vec![0];
    let mut leaves = 0;
    while let Some(t) = stack.pop() {
        match (nodes[t].children, seq.collapse[t]) {
            (Some([l, r]), c) if c.is_none_or(|c| c > k) => {
                stack.push(l);
                stack.push(r);
            }
            _ => leaves += 1,
        }
    }
    leaves
}

/// Copy subtree `k` into a fresh arena.
fn extract(nodes: &[Node], seq: &PruneSequence, k: usize) -> Vec<Node> {
    fn go(nodes: &[Node], seq: &PruneSequence, k: usize, t: usize, out: &mut Vec<Node>) -> usize {
        let id = out.len();
        let mut node = nodes[t].clone();
        let keep = matches!((node.children, seq.collapse[t]), (Some(_), c) if c.is_none_or(|c| c > k));
        node.children = None;
        if !keep {
            node.split = None;
        }
        out.push(node);
        if keep {
            let [l, r] = nodes[t].children.unwrap();
            let a = go(nodes, seq, k, l, out);
            let b = go(nodes, seq, k, r, out);
            out[id].children = Some([a, b]);
        }
        id
    }
    let mut out = Vec::new();
    go(nodes, seq, k, 0, &mut out);
    out
}

/// Stratified fold labels: the rows of each class are shuffled and dealt
/// round-robin, continuing the deal across classes.
pub fn stratified_folds(labels: &[usize], n_classes: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fold = vec![0; labels.len()];
    let mut next = 0;
    for j in 0..n_classes {
        let mut rows: Vec<usize> = (0..labels.len()).filter(|&r| labels[r] == j).collect();
        rows.shuffle(&mut rng);
        for r in rows {
            fold[r] = next % folds;
            next += 1;
        }
    }
    fold
}

/// Subtree of a grown tree at sequence index `k`.
pub fn subtree(tree: &Tree, seq: &PruneSequence, k: usize) -> Tree {
    Tree {
        nodes: extract(&tree.nodes, seq, k),
        ..tree.clone()
    }
}

/// Cost-complexity pruning with cross-validation of the whole growing
/// procedure.
pub fn prune(tree: &Tree, data: &Dataset, cfg: &GrowConfig) -> Result<Tree> {
    cfg.validate()?;
    let seq = prune_sequence(&tree.nodes);
    let m = seq.len();
    let candidates: Vec<f64> = (0..m)
        .map(|k| {
            if k + 1 < m {
                (seq.alphas[k] * seq.alphas[k + 1]).sqrt()
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let classes = cfg.class_model(data);
    let fold = stratified_folds(data.labels(), data.n_classes(), cfg.folds, cfg.seed);
    let per_fold: Vec<Vec<Vec<f64>>> = (0..cfg.folds)
        .into_par_iter()
        .map(|v| -> Result<Vec<Vec<f64>>> {
            let train: Vec<usize> = (0..data.n_rows()).filter(|&r| fold[r] != v).collect();
            let test: Vec<usize> = (0..data.n_rows()).filter(|&r| fold[r] == v).collect();
            let sub = data.subset(&train);
            let t = grow(&sub, cfg)?;
            let s = prune_sequence(&t.nodes);
            Ok(candidates
                .iter()
                .map(|&b| {
                    let k = s.index_for(b);
                    test.iter()
                        .map(|&r| {
                            let leaf = leaf_in(&t.nodes, &s, k, |v| data.cell(r, v));
                            let y = data.label(r);
                            classes.costs.cost(t.nodes[leaf].model.predict_data(data, r), y) * classes.weights[y]
                        })
                        .collect()
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let n = data.n_rows() as f64;
    let mut cv_costs = Vec::with_capacity(m);
    let mut cv_se = Vec::with_capacity(m);
    for k in 0..m {
        let losses: Vec<f64> = per_fold.iter().flat_map(|f| f[k].iter().copied()).collect();
        let total: f64 = losses.iter().sum();
        let var = losses.iter().map(|l| (l * n - total).powi(2)).sum::<f64>() / n / n;
        cv_costs.push(total);
        cv_se.push((var / n).sqrt());
    }
    let best = (0..m).fold(0, |b, k| if cv_costs[k] <= cv_costs[b] { k } else { b });
    let bound = cv_costs[best] + cfg.se_rule * cv_se[best];
    let chosen = (0..m).rev().find(|&k| cv_costs[k] <= bound).unwrap_or(best);
    let leaves = (0..m).map(|k| count_leaves(&tree.nodes, &seq, k)).collect();
    let mut out = subtree(tree, &seq, chosen);
    out.pruning = Some(PruningInfo {
        alphas: seq.alphas,
        leaves,
        cv_costs,
        cv_se,
        chosen,
    });
    Ok(out)
}

/// Number format used in exports: 4 significant digits.
pub fn sig4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = 3 - x.abs().log10().floor() as i32;
    if digits > 0 {
        let s = format!("{:.*}", digits as usize, x);
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        let p = 10f64.powi(-digits);
        format!("{}", (x / p).round() * p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Text,
    Dot,
}

impl Tree {
    pub fn n_classes(&self) -> usize {
        self.header.class_labels.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn leaf_with(&self, cell: impl Fn(usize) -> Cell) -> usize {
        let mut t = 0;
        while let Some([l, r]) = self.nodes[t].children {
            let rule = &self.nodes[t].split.as_ref().expect("internal node has a split").rule;
            t = if rule.goes_left_with(&cell) { l } else { r };
        }
        t
    }

    pub fn leaf_of(&self, row: &[Cell]) -> usize {
        self.leaf_with(|v| row[v])
    }

    pub fn predict(&self, row: &[Cell]) -> usize {
        self.nodes[self.leaf_of(row)].model.predict(row)
    }

    pub fn predict_data(&self, data: &Dataset, r: usize) -> usize {
        let leaf = self.leaf_with(|v| data.cell(r, v));
        self.nodes[leaf].model.predict_data(data, r)
    }

    /// Number of misclassified rows.
    pub fn errors(&self, data: &Dataset) -> usize {
        (0..data.n_rows()).filter(|&r| self.predict_data(data, r) != data.label(r)).count()
    }

    /// Misclassification cost weighted by the tree's priors.
    pub fn cost(&self, data: &Dataset) -> f64 {
        let classes = ClassModel::new(data.class_counts(), Some(&self.priors), self.costs.clone());
        (0..data.n_rows())
            .map(|r| {
                let y = data.label(r);
                classes.costs.cost(self.predict_data(data, r), y) * classes.weights[y]
            })
            .sum()
    }

    /// Internal nodes in arena order.
    pub fn splits(&self) -> impl Iterator<Item = (&Node, &NodeSplit)> {
        self.nodes.iter().filter_map(|n| n.split.as_ref().map(|s| (n, s)))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Tree> {
        let tree: Tree = serde_json::from_str(text)?;
        if tree.format_version != FORMAT_VERSION {
            return Err(Error::Model(format!("unsupported format_version {}", tree.format_version)));
        }
        tree.check()?;
        Ok(tree)
    }

    fn check(&self) -> Result<()> {
        let n = self.nodes.len();
        if n == 0 {
            return Err(Error::Model("tree has no nodes".into()));
        }
        let j = self.n_classes();
        for (t, node) in self.nodes.iter().enumerate() {
            if let Some([l, r]) = node.children {
                if l <= t || r <= t || l >= n || r >= n || node.split.is_none() {
                    return Err(Error::Model(format!("node {t} is malformed")));
                }
            }
            if node.model.fallback() >= j {
                return Err(Error::Model(format!("node {t} predicts an unknown class")));
            }
        }
        Ok(())
    }

    fn var_name(&self, v: usize) -> &str {
        &self.header.predictors[v].name
    }

    pub fn describe_rule(&self, rule: &SplitRule) -> String {
        match rule {
            SplitRule::Numeric { var, threshold } => {
                format!("{} <= {} or NA", self.var_name(*var), sig4(*threshold))
            }
            SplitRule::Categorical {
                var,
                levels,
                missing_left,
            } => {
                let names = &self.header.predictors[*var].levels;
                let mut parts: Vec<String> = levels
                    .iter()
                    .filter_map(|&l| names.get(l as usize).cloned())
                    .collect();
                if *missing_left {
                    parts.push("NA".into());
                }
                format!("{} in {{{}}}", self.var_name(*var), parts.join(", "))
            }
            SplitRule::Linear { vars, coef, threshold } => format!(
                "{}*{} + {}*{} <= {} or NA",
                sig4(coef[0]),
                self.var_name(vars[0]),
                sig4(coef[1]),
                self.var_name(vars[1]),
                sig4(*threshold)
            ),
            SplitRule::Missing { var } => format!("{} is NA", self.var_name(*var)),
        }
    }

    fn describe_leaf(&self, node: &Node) -> String {
        let class = &self.header.class_labels[node.model.fallback()];
        match &node.model {
            NodeModel::Constant { .. } => format!("{} {}", node.n, class),
            m => {
                let vars: Vec<&str> = m.vars().iter().map(|&v| self.var_name(v)).collect();
                format!("{} {} [{}: {}]", node.n, class, m.kind_name(), vars.join(", "))
            }
        }
    }

    pub fn export(&self, format: ExportFormat) -> String {
        match format {
            ExportFormat::Text => self.export_text(),
            ExportFormat::Dot => self.export_dot(),
        }
    }

    fn export_text(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![(0usize, 0usize, String::new())];
        while let Some((t, indent, prefix)) = stack.pop() {
            let node = &self.nodes[t];
            let pad = "  ".repeat(indent);
            match (node.children, &node.split) {
                (Some([l, r]), Some(s)) => {
                    let cond = self.describe_rule(&s.rule);
                    out.push_str(&format!("{pad}{prefix}node {t}: n={}\n", node.n));
                    stack.push((r, indent + 1, format!("not ({cond}): ")));
                    stack.push((l, indent + 1, format!("{cond}: ")));
                }
                _ => out.push_str(&format!("{pad}{prefix}leaf {t}: {}\n", self.describe_leaf(node))),
            }
        }
        out
    }

    fn export_dot(&self) -> String {
        let esc = |s: &str| s.replace('\\', "\\\\").replace('"', "\\\"");
        let mut out = String::from("digraph tree {\n  node [shape=box];\n");
        for (t, node) in self.nodes.iter().enumerate() {
            let label = match &node.split {
                Some(s) if node.children.is_some() => format!("{}\\nn={}", esc(&self.describe_rule(&s.rule)), node.n),
                _ => esc(&self.describe_leaf(node)),
            };
            let shape = if node.is_leaf() { ", shape=ellipse" } else { "" };
            out.push_str(&format!("  n{t} [label=\"{label}\"{shape}];\n"));
        }
        for (t, node) in self.nodes.iter().enumerate() {
            if let Some([l, r]) = node.children {
                out.push_str(&format!("  n{t} -> n{l} [label=\"yes\"];\n"));
                out.push_str(&format!("  n{t} -> n{r} [label=\"no\"];\n"));
            }
        }
        out.push_str("}\n");
        out
    }

    /// True when no split in the tree is of the linear kind.
    pub fn has_linear_split(&self) -> bool {
        self.splits().any(|(_, s)| matches!(s.rule, SplitRule::Linear { .. }))
    }

    /// Variables used by splits at depth `<= depth`.
    pub fn split_vars_to_depth(&self, depth: usize) -> Vec<usize> {
        let mut vars: Vec<usize> = self
            .splits()
            .filter(|(n, _)| n.depth <= depth)
            .flat_map(|(_, s)| s.rule.vars())
            .collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    pub fn is_categorical(&self, v: usize) -> bool {
        self.header.predictors[v].kind == PredictorKind::Categorical
    }
}
