//! Tree ensembles, oversampling, metrics, cross-validation and ANOVA.

mod cv;
mod forest;
mod gbt;
mod metrics;
mod smote;
mod stats;
mod tree;

use std::fmt;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub use cv::{group_kfold, stratified_kfold, Fold};
pub use forest::{balanced_weights, ForestConfig, ForestModel, MaxFeatures};
pub use gbt::{GbtConfig, GbtModel, MultiGbtRegressor, Objective};
pub use metrics::{evaluate, Averages, ClassMetrics, MetricsReport};
pub use smote::{smote_matrix, smote_oversample, SMOTE_DEFAULT_K};
pub use stats::{anova_oneway, holm_adjust, pairwise_welch, welch_t_test, AnovaResult, PairwiseComparison};
pub use tree::{Node, Tree};

use crate::data::{Condition, FeatureTable, Subcondition, TrialMeta};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Which label a classifier predicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Five / Nine / Thirteen digit load.
    Multiclass,
    /// JustListen / Memorize, pooled over loads.
    Binary,
}

impl Task {
    pub const ALL: [Task; 2] = [Task::Multiclass, Task::Binary];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Multiclass => "multiclass",
            Task::Binary => "binary",
        }
    }

    pub fn class_names(self) -> Vec<String> {
        match self {
            Task::Multiclass => Subcondition::ALL.iter().map(|s| s.as_str().to_string()).collect(),
            Task::Binary => Condition::ALL.iter().map(|c| c.as_str().to_string()).collect(),
        }
    }

    pub fn n_classes(self) -> usize {
        match self {
            Task::Multiclass => 3,
            Task::Binary => 2,
        }
    }

    pub fn encode(self, m: &TrialMeta) -> usize {
        match self {
            Task::Multiclass => m.subcondition as usize,
            Task::Binary => m.condition as usize,
        }
    }

    pub fn encode_table(self, t: &FeatureTable) -> Vec<usize> {
        t.labels.iter().map(|m| self.encode(m)).collect()
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "multiclass" => Ok(Task::Multiclass),
            "binary" => Ok(Task::Binary),
            _ => Err(Error::InvalidConfig(format!("task: unknown value {s:?} (multiclass|binary)"))),
        }
    }
}

/// Validates a feature matrix and returns its width.
pub(crate) fn check_matrix(x: &[Vec<f64>]) -> Result<usize> {
    let p = match x.first() {
        Some(r) => r.len(),
        None => return Err(Error::InvalidConfig("empty training set".into())),
    };
    if p == 0 {
        return Err(Error::InvalidConfig("no features".into()));
    }
    for r in x {
        if r.len() != p {
            return Err(Error::LengthMismatch(p, r.len()));
        }
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NanFeatures);
        }
    }
    Ok(p)
}

pub(crate) fn check_labels(y: &[usize], n: usize, n_classes: usize) -> Result<()> {
    if y.len() != n {
        return Err(Error::LengthMismatch(n, y.len()));
    }
    if let Some(&c) = y.iter().find(|&&c| c >= n_classes) {
        return Err(Error::UnknownLabel(c));
    }
    let mut seen = vec![false; n_classes];
    for &c in y {
        seen[c] = true;
    }
    if seen.iter().filter(|&&s| s).count() < 2 {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Either ensemble, behind one prediction interface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classifier {
    Forest(ForestModel),
    Gbt(GbtModel),
}

impl Classifier {
    pub fn predict(&self, x: &[Vec<f64>]) -> Result<Vec<usize>> {
        match self {
            Classifier::Forest(m) => m.predict(x),
            Classifier::Gbt(m) => m.predict(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Forest,
    Gbt,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 2] = [ClassifierKind::Forest, ClassifierKind::Gbt];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Forest => "forest",
            ClassifierKind::Gbt => "gbt",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "forest" | "rf" => Ok(ClassifierKind::Forest),
            "gbt" | "xgboost" => Ok(ClassifierKind::Gbt),
            _ => Err(Error::InvalidConfig(format!("classifier: unknown value {s:?} (forest|gbt)"))),
        }
    }
}

/// Hyperparameters for both ensembles; the task fixes the class count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub kind: ClassifierKind,
    pub forest: ForestConfig,
    pub gbt: GbtConfig,
}

impl ClassifierConfig {
    pub fn new(kind: ClassifierKind) -> Self {
        ClassifierConfig { kind, forest: ForestConfig::default(), gbt: GbtConfig::default() }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.forest.seed = seed;
        self.gbt.seed = seed;
        self
    }

    pub fn with_trees(mut self, n: usize) -> Self {
        self.forest.n_trees = n;
        self.gbt.n_trees = n;
        self
    }

    pub fn fit(&self, x: &[Vec<f64>], y: &[usize], n_classes: usize) -> Result<Classifier> {
        match self.kind {
            ClassifierKind::Forest => Ok(Classifier::Forest(ForestModel::fit(x, y, n_classes, &self.forest)?)),
            ClassifierKind::Gbt => {
                let cfg = GbtConfig {
                    n_classes,
                    objective: if n_classes == 2 { Objective::LogisticBinary } else { Objective::SoftmaxMulticlass },
                    ..self.gbt
                };
                Ok(Classifier::Gbt(GbtModel::fit_classifier(x, y, &cfg)?))
            }
        }
    }
}

/// Each class present at least twice.
fn check_class_sizes(y: &[usize], n_classes: usize) -> Result<()> {
    let mut counts = vec![0usize; n_classes];
    for &c in y {
        counts[c] += 1;
    }
    if let Some((c, n)) = counts.iter().enumerate().find(|(_, &n)| n == 1) {
        return Err(Error::MinorityTooSmall(format!("class {c} has {n} row")));
    }
    Ok(())
}

pub fn train_forest(table: &FeatureTable, task: Task, cfg: &ForestConfig) -> Result<ForestModel> {
    table.check()?;
    let y = task.encode_table(table);
    check_labels(&y, table.n_rows(), task.n_classes())?;
    check_class_sizes(&y, task.n_classes())?;
    ForestModel::fit(&table.rows, &y, task.n_classes(), cfg)
}

pub fn train_gbt(table: &FeatureTable, task: Task, cfg: &GbtConfig) -> Result<GbtModel> {
    table.check()?;
    let y = task.encode_table(table);
    check_labels(&y, table.n_rows(), task.n_classes())?;
    check_class_sizes(&y, task.n_classes())?;
    let cfg = GbtConfig { n_classes: task.n_classes(), ..*cfg };
    GbtModel::fit_classifier(&table.rows, &y, &cfg)
}

#[derive(Deserialize)]
struct VersionPeek {
    format_version: Option<u32>,
}

/// Serialises a model as pretty JSON.
pub fn model_to_json<M: Serialize>(m: &M) -> Result<String> {
    Ok(serde_json::to_string_pretty(m)?)
}

/// Parses a model, checking `format_version` first.
pub fn model_from_json<M: DeserializeOwned>(s: &str) -> Result<M> {
    let peek: VersionPeek = serde_json::from_str(s)?;
    match peek.format_version {
        Some(MODEL_FORMAT_VERSION) => Ok(serde_json::from_str(s)?),
        Some(v) => Err(Error::VersionMismatch { expected: MODEL_FORMAT_VERSION, found: v }),
        None => Err(Error::ModelFormat("missing format_version".into())),
    }
}
