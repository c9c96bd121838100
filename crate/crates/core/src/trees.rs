//! Decision trees, random forests and extremely randomized trees.
//!
//! Rows go left iff `x[feature] ≤ threshold`. Exhaustive splits use midpoints
//! between consecutive distinct values; extremely randomized trees draw one
//! threshold per candidate feature uniformly inside the node's value range.

use serde::{Deserialize, Serialize};

use crate::data::{argmax, Labels, Matrix};
use crate::error::{check_dim, Error, Result};
use crate::parallel::map_indexed;
use crate::rng::{rng_split, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Gini,
    Entropy,
    Misclassification,
    Mse,
    Mae,
}

impl Criterion {
    pub fn is_classification(self) -> bool {
        matches!(self, Criterion::Gini | Criterion::Entropy | Criterion::Misclassification)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub criterion: Criterion,
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    pub max_leaf_nodes: Option<usize>,
    pub max_features: Option<usize>,
    pub min_impurity_decrease: f64,
    pub seed: u64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            criterion: Criterion::Gini,
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_leaf_nodes: None,
            max_features: None,
            min_impurity_decrease: 0.0,
            seed: 0,
        }
    }
}

impl TreeConfig {
    fn validate(&self) -> Result<()> {
        if self.min_samples_split < 2 {
            return Err(Error::hyper("min_samples_split must be at least 2"));
        }
        if self.min_samples_leaf < 1 {
            return Err(Error::hyper("min_samples_leaf must be at least 1"));
        }
        if self.max_leaf_nodes == Some(0) {
            return Err(Error::hyper("max_leaf_nodes must be at least 1"));
        }
        if self.max_features == Some(0) {
            return Err(Error::hyper("max_features must be at least 1"));
        }
        if !(self.min_impurity_decrease >= 0.0) {
            return Err(Error::hyper("min_impurity_decrease must be non-negative"));
        }
        Ok(())
    }
}

/// What a tree is fitted against.
#[derive(Debug, Clone, Copy)]
pub enum TreeTarget<'a> {
    Classes(&'a Labels),
    Values(&'a [f64]),
}

impl TreeTarget<'_> {
    fn len(&self) -> usize {
        match self {
            TreeTarget::Classes(l) => l.len(),
            TreeTarget::Values(v) => v.len(),
        }
    }

    fn check(&self, criterion: Criterion) -> Result<()> {
        match (self, criterion.is_classification()) {
            (TreeTarget::Classes(_), true) | (TreeTarget::Values(_), false) => Ok(()),
            (TreeTarget::Classes(_), false) => Err(Error::hyper(format!("{criterion:?} is a regression criterion"))),
            (TreeTarget::Values(_), true) => Err(Error::hyper(format!("{criterion:?} is a classification criterion"))),
        }
    }

    fn is_pure(&self, rows: &[usize]) -> bool {
        match self {
            TreeTarget::Classes(l) => rows.iter().all(|&i| l.values()[i] == l.values()[rows[0]]),
            TreeTarget::Values(v) => rows.iter().all(|&i| v[i] == v[rows[0]]),
        }
    }
}

/// Impurity of a class-count histogram.
pub fn class_impurity(criterion: Criterion, counts: &[usize]) -> Result<f64> {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return Err(Error::EmptyPartition);
    }
    let n = n as f64;
    Ok(match criterion {
        Criterion::Gini => counts.iter().map(|&c| {
            let p = c as f64 / n;
            p * (1.0 - p)
        }).sum(),
        Criterion::Entropy => -counts.iter().filter(|&&c| c > 0).map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        }).sum::<f64>(),
        Criterion::Misclassification => 1.0 - *counts.iter().max().unwrap() as f64 / n,
        _ => return Err(Error::hyper(format!("{criterion:?} is a regression criterion"))),
    })
}

/// Lower median (the lower middle element for even counts).
fn lower_median(sorted: &[f64]) -> f64 {
    sorted[(sorted.len() - 1) / 2]
}

/// Impurity of a set of real targets.
pub fn value_impurity(criterion: Criterion, values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyPartition);
    }
    let n = values.len() as f64;
    Ok(match criterion {
        Criterion::Mse => {
            let mean = values.iter().sum::<f64>() / n;
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
        }
        Criterion::Mae => {
            let mut s = values.to_vec();
            s.sort_by(f64::total_cmp);
            let med = lower_median(&s);
            s.iter().map(|v| (v - med).abs()).sum::<f64>() / n
        }
        _ => return Err(Error::hyper(format!("{criterion:?} is a classification criterion"))),
    })
}

fn node_impurity(target: &TreeTarget, criterion: Criterion, rows: &[usize]) -> Result<f64> {
    match target {
        TreeTarget::Classes(l) => {
            let mut counts = vec![0; l.n_classes()];
            for &i in rows {
                counts[l.values()[i]] += 1;
            }
            class_impurity(criterion, &counts)
        }
        TreeTarget::Values(v) => {
            let vals: Vec<f64> = rows.iter().map(|&i| v[i]).collect();
            value_impurity(criterion, &vals)
        }
    }
}

fn weighted_decrease(parent: f64, n_left: usize, left: f64, n_right: usize, right: f64) -> f64 {
    let n = (n_left + n_right) as f64;
    (parent - (n_left as f64 * left + n_right as f64 * right) / n).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// `parent − (n_L/n)·impurity_L − (n_R/n)·impurity_R`
    pub decrease: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Every midpoint of every candidate feature.
    Best,
    /// One uniform threshold per candidate feature.
    Random,
}

/// Candidate features: all of them, or a uniform subset of `max_features` drawn without replacement.
fn candidate_features(p: usize, max_features: Option<usize>, rng: &mut SeededRng) -> Vec<usize> {
    match max_features {
        Some(m) if m < p => {
            let mut f = rng.sample_without_replacement(p, m);
            f.sort_unstable();
            f
        }
        _ => (0..p).collect(),
    }
}

/// Best admissible split of `rows`, or `None` when nothing satisfies
/// `min_samples_leaf` and `min_impurity_decrease`.
pub fn best_split(x: &Matrix, target: &TreeTarget, rows: &[usize], config: &TreeConfig, mode: SplitMode, rng: &mut SeededRng) -> Result<Option<Split>> {
    target.check(config.criterion)?;
    if rows.is_empty() {
        return Err(Error::EmptyPartition);
    }
    let parent = node_impurity(target, config.criterion, rows)?;
    let features = candidate_features(x.cols(), config.max_features, rng);
    let mut best: Option<Split> = None;
    let mut consider = |s: Split| {
        if best.map_or(true, |b| s.decrease > b.decrease) {
            best = Some(s);
        }
    };
    for &f in &features {
        match mode {
            SplitMode::Best => scan_feature(x, target, rows, config, f, parent, &mut consider),
            SplitMode::Random => {
                let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                    let v = x[(i, f)];
                    (lo.min(v), hi.max(v))
                });
                if lo >= hi {
                    continue;
                }
                let t = rng.open_interval(lo, hi);
                let (left, right): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[(i, f)] <= t);
                if left.len() < config.min_samples_leaf || right.len() < config.min_samples_leaf {
                    continue;
                }
                let il = node_impurity(target, config.criterion, &left)?;
                let ir = node_impurity(target, config.criterion, &right)?;
                consider(Split {
                    feature: f,
                    threshold: t,
                    decrease: weighted_decrease(parent, left.len(), il, right.len(), ir),
                });
            }
        }
    }
    Ok(best.filter(|s| s.decrease >= config.min_impurity_decrease))
}

/// Midpoint threshold that keeps `a` left and `b` right even when they are adjacent doubles.
fn midpoint(a: f64, b: f64) -> f64 {
    let m = a + (b - a) / 2.0;
    if m >= b || m < a {
        a
    } else {
        m
    }
}

fn scan_feature(x: &Matrix, target: &TreeTarget, rows: &[usize], config: &TreeConfig, f: usize, parent: f64, consider: &mut dyn FnMut(Split)) {
    let mut order = rows.to_vec();
    order.sort_by(|&a, &b| x[(a, f)].total_cmp(&x[(b, f)]));
    let n = order.len();
    let msl = config.min_samples_leaf;
    let value = |k: usize| x[(order[k], f)];

    match target {
        TreeTarget::Classes(l) => {
            let q = l.n_classes();
            let mut right = vec![0usize; q];
            for &i in &order {
                right[l.values()[i]] += 1;
            }
            let mut left = vec![0usize; q];
            for k in 0..n - 1 {
                let c = l.values()[order[k]];
                left[c] += 1;
                right[c] -= 1;
                if value(k) == value(k + 1) || k + 1 < msl || n - k - 1 < msl {
                    continue;
                }
                let il = class_impurity(config.criterion, &left).unwrap();
                let ir = class_impurity(config.criterion, &right).unwrap();
                consider(Split {
                    feature: f,
                    threshold: midpoint(value(k), value(k + 1)),
                    decrease: weighted_decrease(parent, k + 1, il, n - k - 1, ir),
                });
            }
        }
        TreeTarget::Values(v) if config.criterion == Criterion::Mse => {
            // Shifted sums limit cancellation in the variance formula.
            let shift = order.iter().map(|&i| v[i]).sum::<f64>() / n as f64;
            let (mut ts, mut tq) = (0.0, 0.0);
            for &i in &order {
                let d = v[i] - shift;
                ts += d;
                tq += d * d;
            }
            let (mut ls, mut lq) = (0.0, 0.0);
            for k in 0..n - 1 {
                let d = v[order[k]] - shift;
                ls += d;
                lq += d * d;
                if value(k) == value(k + 1) || k + 1 < msl || n - k - 1 < msl {
                    continue;
                }
                let nl = (k + 1) as f64;
                let nr = (n - k - 1) as f64;
                let il = (lq / nl - (ls / nl).powi(2)).max(0.0);
                let (rs, rq) = (ts - ls, tq - lq);
                let ir = (rq / nr - (rs / nr).powi(2)).max(0.0);
                consider(Split {
                    feature: f,
                    threshold: midpoint(value(k), value(k + 1)),
                    decrease: weighted_decrease(parent, k + 1, il, n - k - 1, ir),
                });
            }
        }
        TreeTarget::Values(v) => {
            let targets: Vec<f64> = order.iter().map(|&i| v[i]).collect();
            for k in 0..n - 1 {
                if value(k) == value(k + 1) || k + 1 < msl || n - k - 1 < msl {
                    continue;
                }
                let il = value_impurity(config.criterion, &targets[..=k]).unwrap();
                let ir = value_impurity(config.criterion, &targets[k + 1..]).unwrap();
                consider(Split {
                    feature: f,
                    threshold: midpoint(value(k), value(k + 1)),
                    decrease: weighted_decrease(parent, k + 1, il, n - k - 1, ir),
                });
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeafValue {
    Proba(Vec<f64>),
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeNode {
    Internal {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
        n_samples: usize,
        decrease: f64,
    },
    Leaf {
        value: LeafValue,
        n_samples: usize,
        impurity: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    /// Node 0 is the root.
    pub nodes: Vec<TreeNode>,
    pub n_features: usize,
    pub config: TreeConfig,
    /// Class names; empty for regression trees.
    pub labels: Vec<String>,
}

struct Builder<'a> {
    x: &'a Matrix,
    target: TreeTarget<'a>,
    config: TreeConfig,
    mode: SplitMode,
    nodes: Vec<TreeNode>,
}

struct Pending {
    id: usize,
    rows: Vec<usize>,
    depth: usize,
    split: Split,
}

impl Builder<'_> {
    fn leaf(&self, rows: &[usize]) -> TreeNode {
        let impurity = node_impurity(&self.target, self.config.criterion, rows).unwrap();
        let value = match self.target {
            TreeTarget::Classes(l) => {
                let mut counts = vec![0.0; l.n_classes()];
                for &i in rows {
                    counts[l.values()[i]] += 1.0;
                }
                let n = rows.len() as f64;
                LeafValue::Proba(counts.into_iter().map(|c| c / n).collect())
            }
            TreeTarget::Values(v) => {
                let mut vals: Vec<f64> = rows.iter().map(|&i| v[i]).collect();
                if self.config.criterion == Criterion::Mae {
                    vals.sort_by(f64::total_cmp);
                    LeafValue::Value(lower_median(&vals))
                } else {
                    LeafValue::Value(vals.iter().sum::<f64>() / vals.len() as f64)
                }
            }
        };
        TreeNode::Leaf {
            value,
            n_samples: rows.len(),
            impurity,
        }
    }

    fn try_split(&self, rows: &[usize], depth: usize, rng: &mut SeededRng) -> Result<Option<Split>> {
        let c = &self.config;
        if c.max_depth.is_some_and(|d| depth >= d) || rows.len() < c.min_samples_split || self.target.is_pure(rows) {
            return Ok(None);
        }
        best_split(self.x, &self.target, rows, c, self.mode, rng)
    }

    fn add(&mut self, rows: Vec<usize>, depth: usize, rng: &mut SeededRng, frontier: &mut Vec<Pending>) -> Result<usize> {
        let id = self.nodes.len();
        let leaf = self.leaf(&rows);
        self.nodes.push(leaf);
        if let Some(split) = self.try_split(&rows, depth, rng)? {
            frontier.push(Pending { id, rows, depth, split });
        }
        Ok(id)
    }

    fn grow(mut self, rows: Vec<usize>, rng: &mut SeededRng) -> Result<Vec<TreeNode>> {
        let mut frontier = Vec::new();
        self.add(rows, 0, rng, &mut frontier)?;
        let mut leaves = 1;
        while !frontier.is_empty() {
            if self.config.max_leaf_nodes.is_some_and(|m| leaves >= m) {
                break;
            }
            let pick = if self.config.max_leaf_nodes.is_some() {
                // Best-first: largest decrease, oldest node on ties.
                let mut b = 0;
                for (k, p) in frontier.iter().enumerate() {
                    let cur = &frontier[b];
                    if p.split.decrease > cur.split.decrease || (p.split.decrease == cur.split.decrease && p.id < cur.id) {
                        b = k;
                    }
                }
                b
            } else {
                frontier.len() - 1
            };
            let Pending { id, rows, depth, split } = frontier.remove(pick);
            let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.x[(i, split.feature)] <= split.threshold);
            let n_samples = rows.len();
            let mut children = Vec::new();
            let left = self.add(l, depth + 1, rng, &mut children)?;
            let right = self.add(r, depth + 1, rng, &mut children)?;
            // Reverse so depth-first pops the left child first.
            frontier.extend(children.into_iter().rev());
            self.nodes[id] = TreeNode::Internal {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
                n_samples,
                decrease: split.decrease,
            };
            leaves += 1;
        }
        Ok(self.nodes)
    }
}

fn check_inputs(x: &Matrix, target: &TreeTarget, config: &TreeConfig) -> Result<()> {
    config.validate()?;
    x.require_nonempty()?;
    check_dim(x.rows(), target.len())?;
    target.check(config.criterion)
}

fn build(x: &Matrix, target: TreeTarget, config: TreeConfig, mode: SplitMode, rows: Vec<usize>, rng: &mut SeededRng) -> Result<DecisionTree> {
    let labels = match target {
        TreeTarget::Classes(l) => l.names().to_vec(),
        TreeTarget::Values(_) => Vec::new(),
    };
    let builder = Builder {
        x,
        target,
        config,
        mode,
        nodes: Vec::new(),
    };
    Ok(DecisionTree {
        nodes: builder.grow(rows, rng)?,
        n_features: x.cols(),
        config,
        labels,
    })
}

/// Fits a single tree with exhaustive (midpoint) splits.
pub fn fit_tree(x: &Matrix, target: TreeTarget, config: TreeConfig) -> Result<DecisionTree> {
    check_inputs(x, &target, &config)?;
    let mut rng = SeededRng::new(config.seed);
    build(x, target, config, SplitMode::Best, (0..x.rows()).collect(), &mut rng)
}

impl DecisionTree {
    pub fn is_classifier(&self) -> bool {
        !self.labels.is_empty()
    }

    fn leaf(&self, x: &[f64]) -> &LeafValue {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                TreeNode::Internal { feature, threshold, left, right, .. } => {
                    id = if x[*feature] <= *threshold { *left } else { *right };
                }
                TreeNode::Leaf { value, .. } => return value,
            }
        }
    }

    /// Leaf class proportions of each row.
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<Vec<f64>>> {
        check_dim(self.n_features, x.cols())?;
        x.iter_rows()
            .map(|r| match self.leaf(r) {
                LeafValue::Proba(p) => Ok(p.clone()),
                LeafValue::Value(_) => Err(Error::hyper("regression tree has no class probabilities")),
            })
            .collect()
    }

    pub fn predict_class(&self, x: &Matrix) -> Result<Vec<usize>> {
        Ok(self.predict_proba(x)?.iter().map(|p| argmax(p)).collect())
    }

    pub fn predict_values(&self, x: &Matrix) -> Result<Vec<f64>> {
        check_dim(self.n_features, x.cols())?;
        x.iter_rows()
            .map(|r| match self.leaf(r) {
                LeafValue::Value(v) => Ok(*v),
                LeafValue::Proba(_) => Err(Error::hyper("classification tree has no real-valued output")),
            })
            .collect()
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[TreeNode], id: usize) -> usize {
            match &nodes[id] {
                TreeNode::Internal { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
                TreeNode::Leaf { .. } => 0,
            }
        }
        go(&self.nodes, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Voting {
    Hard,
    Soft,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub n_trees: usize,
    pub bootstrap: bool,
    /// `None` means √p for classification and p/3 for regression (at least 1).
    pub max_features: Option<usize>,
    pub voting: Voting,
    /// Per-tree settings; its own `seed` and `max_features` are ignored.
    pub tree: TreeConfig,
    pub seed: u64,
}

impl ForestConfig {
    pub fn random_forest() -> Self {
        ForestConfig {
            n_trees: 100,
            bootstrap: true,
            max_features: None,
            voting: Voting::Soft,
            tree: TreeConfig::default(),
            seed: 0,
        }
    }

    pub fn extra_trees() -> Self {
        ForestConfig {
            bootstrap: false,
            ..ForestConfig::random_forest()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<DecisionTree>,
    pub config: ForestConfig,
    pub mode: SplitMode,
}

fn default_max_features(p: usize, classification: bool) -> usize {
    let m = if classification { (p as f64).sqrt().floor() as usize } else { p / 3 };
    m.max(1)
}

fn fit_ensemble(x: &Matrix, target: TreeTarget, config: ForestConfig, mode: SplitMode) -> Result<Forest> {
    if config.n_trees == 0 {
        return Err(Error::hyper("n_trees must be at least 1"));
    }
    let max_features = config.max_features.unwrap_or_else(|| default_max_features(x.cols(), config.tree.criterion.is_classification()));
    let tree_config = TreeConfig {
        max_features: Some(max_features),
        ..config.tree
    };
    check_inputs(x, &target, &tree_config)?;
    let seeds = rng_split(config.seed, config.n_trees);
    let n = x.rows();
    let trees = map_indexed(config.n_trees, |t| {
        let mut rng = SeededRng::new(seeds[t]);
        let rows = if config.bootstrap { bootstrap_rows(n, &mut rng) } else { (0..n).collect() };
        let cfg = TreeConfig { seed: seeds[t], ..tree_config };
        build(x, target, cfg, mode, rows, &mut rng).map_err(|e| e.in_task(format!("tree {t}")))
    });
    Ok(Forest {
        trees: trees.into_iter().collect::<Result<_>>()?,
        config,
        mode,
    })
}

/// `n` row indices drawn uniformly with replacement.
pub fn bootstrap_rows(n: usize, rng: &mut SeededRng) -> Vec<usize> {
    (0..n).map(|_| rng.below(n)).collect()
}

pub fn fit_forest(x: &Matrix, target: TreeTarget, config: ForestConfig) -> Result<Forest> {
    fit_ensemble(x, target, config, SplitMode::Best)
}

pub fn fit_extra_trees(x: &Matrix, target: TreeTarget, config: ForestConfig) -> Result<Forest> {
    fit_ensemble(x, target, config, SplitMode::Random)
}

impl Forest {
    pub fn is_classifier(&self) -> bool {
        self.trees[0].is_classifier()
    }

    /// Mean of the trees' leaf probability vectors.
    pub fn predict_proba(&self, x: &Matrix) -> Result<Vec<Vec<f64>>> {
        let per_tree = self.trees.iter().map(|t| t.predict_proba(x)).collect::<Result<Vec<_>>>()?;
        let k = self.trees.len() as f64;
        Ok((0..x.rows())
            .map(|i| {
                let q = per_tree[0][i].len();
                (0..q).map(|c| per_tree.iter().map(|p| p[i][c]).sum::<f64>() / k).collect()
            })
            .collect())
    }

    pub fn predict_class(&self, x: &Matrix) -> Result<Vec<usize>> {
        self.predict_class_with(x, self.config.voting)
    }

    pub fn predict_class_with(&self, x: &Matrix, voting: Voting) -> Result<Vec<usize>> {
        match voting {
            Voting::Soft => Ok(self.predict_proba(x)?.iter().map(|p| argmax(p)).collect()),
            Voting::Hard => {
                let q = self.trees[0].labels.len();
                let per_tree = self.trees.iter().map(|t| t.predict_class(x)).collect::<Result<Vec<_>>>()?;
                Ok((0..x.rows())
                    .map(|i| {
                        let mut votes = vec![0.0; q];
                        for p in &per_tree {
                            votes[p[i]] += 1.0;
                        }
                        argmax(&votes)
                    })
                    .collect())
            }
        }
    }

    pub fn predict_values(&self, x: &Matrix) -> Result<Vec<f64>> {
        let per_tree = self.trees.iter().map(|t| t.predict_values(x)).collect::<Result<Vec<_>>>()?;
        let k = self.trees.len() as f64;
        Ok((0..x.rows()).map(|i| per_tree.iter().map(|p| p[i]).sum::<f64>() / k).collect())
    }
}
