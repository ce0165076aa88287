use std::fs;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{grow, Gini, GrowParams, SecondOrder, Tree};
use super::FeatureTable;
use crate::seed;
use crate::{Error, Result};

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    RandomForest,
    GradientBoosting,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rf" | "random_forest" => Ok(ModelKind::RandomForest),
            "gb" | "gradient_boosting" | "xgb" => Ok(ModelKind::GradientBoosting),
            other => Err(Error::InvalidArgument(format!("unknown model kind {other}"))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModelKind::RandomForest => "random_forest",
            ModelKind::GradientBoosting => "gradient_boosting",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForestParams {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or hit `min_leaf`.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// `None` means ⌈√d⌉.
    pub features_per_split: Option<usize>,
    pub seed: u64,
}

impl Default for RandomForestParams {
    fn default() -> Self {
        Self {
            n_trees: 300,
            max_depth: None,
            min_leaf: 1,
            features_per_split: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoostingParams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub lambda_l2: f64,
    pub gamma: f64,
    /// Minimum hessian sum per child.
    pub min_child_weight: f64,
    pub seed: u64,
}

impl Default for GradientBoostingParams {
    fn default() -> Self {
        Self {
            n_rounds: 200,
            learning_rate: 0.1,
            max_depth: 6,
            lambda_l2: 1.0,
            gamma: 0.0,
            min_child_weight: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    RandomForest(RandomForestParams),
    GradientBoosting(GradientBoostingParams),
}

impl ModelParams {
    pub fn defaults(kind: ModelKind, seed: u64) -> Self {
        match kind {
            ModelKind::RandomForest => ModelParams::RandomForest(RandomForestParams {
                seed,
                ..Default::default()
            }),
            ModelKind::GradientBoosting => ModelParams::GradientBoosting(GradientBoostingParams {
                seed,
                ..Default::default()
            }),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::RandomForest(_) => ModelKind::RandomForest,
            ModelParams::GradientBoosting(_) => ModelKind::GradientBoosting,
        }
    }
}

/// A fitted forest or boosted ensemble.
///
/// Forest trees store class-probability leaves and predictions average them.
/// Boosted models store `n_rounds × n_classes` single-output trees (round
/// major); class scores are summed and passed through a softmax.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedEnsemble {
    pub version: u32,
    pub params: ModelParams,
    pub feature_names: Vec<String>,
    pub class_names: Vec<String>,
    pub trees: Vec<Tree>,
    /// Total split gain per feature, normalized to sum to 1 (all zero when no
    /// split was made).
    pub importances: Vec<f64>,
    /// Boosting only: mean training log-loss after each round.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub train_loss: Vec<f64>,
}

fn check_trainable(train: &FeatureTable) -> Result<()> {
    if train.n_rows() == 0 || train.n_features() == 0 {
        return Err(Error::DegenerateFit("empty training table".into()));
    }
    if train.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::DegenerateFit("training data holds a single class".into()));
    }
    if train.has_missing() {
        return Err(Error::InvalidArgument("training table has missing values; impute first".into()));
    }
    Ok(())
}

fn normalized(gains: Vec<f64>) -> Vec<f64> {
    let total: f64 = gains.iter().sum();
    if total > 0.0 {
        gains.into_iter().map(|g| g / total).collect()
    } else {
        vec![0.0; gains.len()]
    }
}

pub fn train_random_forest(train: &FeatureTable, params: &RandomForestParams) -> Result<TrainedEnsemble> {
    check_trainable(train)?;
    if params.n_trees == 0 || params.min_leaf == 0 || params.features_per_split == Some(0) || params.max_depth == Some(0) {
        return Err(Error::InvalidArgument("forest parameters must be positive".into()));
    }
    let n = train.n_rows();
    let d = train.n_features();
    let mtry = params
        .features_per_split
        .unwrap_or_else(|| (d as f64).sqrt().ceil() as usize)
        .min(d);
    let cols = train.columns();
    let labels = train.labels();
    let grow_params = GrowParams {
        max_depth: params.max_depth,
        features_per_split: mtry,
    };

    let fitted: Vec<(Tree, Vec<f64>)> = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng(params.seed, &[seed::str_key("rf-tree"), t as u64]);
            let mut weights = vec![0.0; n];
            for _ in 0..n {
                weights[rng.random_range(0..n)] += 1.0;
            }
            let rows: Vec<usize> = (0..n).filter(|&i| weights[i] > 0.0).collect();
            let crit = Gini {
                labels,
                weights: &weights,
                n_classes: train.n_classes(),
                min_leaf: params.min_leaf as f64,
            };
            let mut gains = vec![0.0; d];
            let tree = grow(&crit, &cols, &rows, &grow_params, &mut rng, &mut gains);
            (tree, gains)
        })
        .collect();

    let mut gains = vec![0.0; d];
    let mut trees = Vec::with_capacity(fitted.len());
    for (tree, g) in fitted {
        for (a, b) in gains.iter_mut().zip(g) {
            *a += b;
        }
        trees.push(tree);
    }
    Ok(TrainedEnsemble {
        version: MODEL_VERSION,
        params: ModelParams::RandomForest(params.clone()),
        feature_names: train.names().to_vec(),
        class_names: train.class_names().to_vec(),
        trees,
        importances: normalized(gains),
        train_loss: Vec::new(),
    })
}

fn softmax_into(scores: &[f64], out: &mut [f64]) {
    let m = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut z = 0.0;
    for (o, s) in out.iter_mut().zip(scores) {
        *o = (s - m).exp();
        z += *o;
    }
    for o in out.iter_mut() {
        *o /= z;
    }
}

pub fn train_gradient_boosting(train: &FeatureTable, params: &GradientBoostingParams) -> Result<TrainedEnsemble> {
    check_trainable(train)?;
    if params.n_rounds == 0 || params.max_depth == 0 || !(params.learning_rate > 0.0) || !(params.lambda_l2 >= 0.0) || !(params.gamma >= 0.0) {
        return Err(Error::InvalidArgument("boosting parameters must be positive".into()));
    }
    let n = train.n_rows();
    let d = train.n_features();
    let k = train.n_classes();
    let cols = train.columns();
    let labels = train.labels();
    let rows: Vec<usize> = (0..n).collect();
    let grow_params = GrowParams {
        max_depth: Some(params.max_depth),
        features_per_split: d,
    };

    let mut scores = vec![vec![0.0; k]; n];
    let mut probs = vec![vec![0.0; k]; n];
    let mut trees = Vec::with_capacity(params.n_rounds * k);
    let mut gains = vec![0.0; d];
    let mut train_loss = Vec::with_capacity(params.n_rounds);

    for round in 0..params.n_rounds {
        for i in 0..n {
            softmax_into(&scores[i], &mut probs[i]);
        }
        let fitted: Vec<Result<(Tree, Vec<f64>)>> = (0..k)
            .into_par_iter()
            .map(|c| {
                let grad: Vec<f64> = (0..n)
                    .map(|i| probs[i][c] - if labels[i] == c { 1.0 } else { 0.0 })
                    .collect();
                let hess: Vec<f64> = (0..n).map(|i| (probs[i][c] * (1.0 - probs[i][c])).max(1e-16)).collect();
                if grad.iter().chain(&hess).any(|v| !v.is_finite()) {
                    return Err(Error::Numeric { round });
                }
                let crit = SecondOrder {
                    grad: &grad,
                    hess: &hess,
                    lambda: params.lambda_l2,
                    gamma: params.gamma,
                    min_child_weight: params.min_child_weight,
                    learning_rate: params.learning_rate,
                };
                // exhaustive search never draws from the rng
                let mut rng = seed::rng(params.seed, &[round as u64, c as u64]);
                let mut g = vec![0.0; d];
                let tree = grow(&crit, &cols, &rows, &grow_params, &mut rng, &mut g);
                Ok((tree, g))
            })
            .collect();
        for (c, res) in fitted.into_iter().enumerate() {
            let (tree, g) = res?;
            for i in 0..n {
                scores[i][c] += tree.leaf(train.row(i))[0];
            }
            for (a, b) in gains.iter_mut().zip(g) {
                *a += b;
            }
            trees.push(tree);
        }
        let mut loss = 0.0;
        for i in 0..n {
            softmax_into(&scores[i], &mut probs[i]);
            loss -= probs[i][labels[i]].max(1e-300).ln();
        }
        let loss = loss / n as f64;
        if !loss.is_finite() {
            return Err(Error::Numeric { round });
        }
        train_loss.push(loss);
    }

    Ok(TrainedEnsemble {
        version: MODEL_VERSION,
        params: ModelParams::GradientBoosting(params.clone()),
        feature_names: train.names().to_vec(),
        class_names: train.class_names().to_vec(),
        trees,
        importances: normalized(gains),
        train_loss,
    })
}

pub fn train(train_table: &FeatureTable, params: &ModelParams) -> Result<TrainedEnsemble> {
    match params {
        ModelParams::RandomForest(p) => train_random_forest(train_table, p),
        ModelParams::GradientBoosting(p) => train_gradient_boosting(train_table, p),
    }
}

impl TrainedEnsemble {
    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Class probabilities for one row in training column order.
    pub fn predict_proba_row(&self, x: &[f64]) -> Vec<f64> {
        let k = self.n_classes();
        match &self.params {
            ModelParams::RandomForest(_) => {
                let mut p = vec![0.0; k];
                for t in &self.trees {
                    for (a, b) in p.iter_mut().zip(t.leaf(x)) {
                        *a += b;
                    }
                }
                let m = self.trees.len() as f64;
                p.iter_mut().for_each(|v| *v /= m);
                p
            }
            ModelParams::GradientBoosting(_) => {
                let mut s = vec![0.0; k];
                for (i, t) in self.trees.iter().enumerate() {
                    s[i % k] += t.leaf(x)[0];
                }
                let mut p = vec![0.0; k];
                softmax_into(&s, &mut p);
                p
            }
        }
    }

    /// Probabilities for every row; columns are aligned by name.
    pub fn predict_proba(&self, table: &FeatureTable) -> Result<Vec<Vec<f64>>> {
        let t = table.align_to(&self.feature_names)?;
        Ok((0..t.n_rows()).map(|i| self.predict_proba_row(t.row(i))).collect())
    }

    /// Arg-max class per row (ties to the lower index).
    pub fn predict(&self, table: &FeatureTable) -> Result<Vec<usize>> {
        Ok(self.predict_proba(table)?.iter().map(|p| argmax(p)).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text).map_err(|e| Error::Serde(e.to_string()))?;
        if m.version != MODEL_VERSION {
            return Err(Error::Format(format!("unsupported model version {}", m.version)));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}

pub(crate) fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

/// Features ranked by normalized total gain; ties broken by name.
pub fn feature_importance(model: &TrainedEnsemble) -> Vec<(String, f64)> {
    let mut v: Vec<(String, f64)> = model
        .feature_names
        .iter()
        .cloned()
        .zip(model.importances.iter().copied())
        .collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    v
}
