use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::FeatureTable;
use crate::error::{Error, Result};
use crate::ml::{evaluate, group_kfold, smote_matrix, stratified_kfold, ClassifierConfig, Fold, MetricsReport, Task};

/// How rows are split into folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Stratified by class, trials of one subject may straddle folds.
    Trial,
    /// No subject appears in both train and test.
    Subject,
}

impl std::str::FromStr for SplitMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trial" => Ok(SplitMode::Trial),
            "subject" => Ok(SplitMode::Subject),
            _ => Err(Error::InvalidConfig(format!("split: unknown value {s:?} (trial|subject)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvSpec {
    pub folds: usize,
    pub split: SplitMode,
    /// Neighbour count for SMOTE inside training folds; 0 disables it.
    pub smote_k: usize,
}

impl Default for CvSpec {
    fn default() -> Self {
        CvSpec { folds: 5, split: SplitMode::Trial, smote_k: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub sd_accuracy: f64,
    /// Out-of-fold predictions pooled over all folds.
    pub report: MetricsReport,
    /// Synthetic rows added per training fold.
    pub smote_rows: Vec<usize>,
}

/// Oversamples a training set, shrinking `k` to fit the smallest class.
/// Returns the rows to append; nothing when a class is too small.
pub(crate) fn smote_train(
    x: &[Vec<f64>],
    y: &[usize],
    n_classes: usize,
    k: usize,
    seed: u64,
) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    if k == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut counts = vec![0usize; n_classes];
    for &c in y {
        counts[c] += 1;
    }
    let min = counts.iter().copied().filter(|&c| c > 0).min().unwrap_or(0);
    if min < 2 {
        log::warn!("smote skipped: smallest training class has {min} row(s)");
        return Ok((Vec::new(), Vec::new()));
    }
    let k = k.min(min - 1);
    let (rows, labels, _) = smote_matrix(x, y, n_classes, k, seed)?;
    Ok((rows, labels))
}

pub(crate) fn make_folds(table: &FeatureTable, y: &[usize], task: Task, spec: &CvSpec, seed: u64) -> Result<Vec<Fold>> {
    match spec.split {
        SplitMode::Trial => stratified_kfold(y, task.n_classes(), spec.folds, seed),
        SplitMode::Subject => {
            let g: Vec<String> = table.labels.iter().map(|l| l.subject_id.clone()).collect();
            group_kfold(&g, spec.folds)
        }
    }
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let sd = if v.len() > 1 {
        (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)).sqrt()
    } else {
        0.0
    };
    (m, sd)
}

/// k-fold evaluation of one classifier. `fold_seed` fixes the split,
/// `model_seed` the learner and the oversampler. Oversampling only ever
/// sees training rows.
pub fn cross_validate(
    table: &FeatureTable,
    task: Task,
    clf: &ClassifierConfig,
    spec: &CvSpec,
    fold_seed: u64,
    model_seed: u64,
) -> Result<CvResult> {
    table.check()?;
    let y = task.encode_table(table);
    let folds = make_folds(table, &y, task, spec, fold_seed)?;
    let clf = clf.with_seed(model_seed);
    let per_fold = folds
        .par_iter()
        .enumerate()
        .map(|(fi, f)| {
            let mut xtr: Vec<Vec<f64>> = f.train.iter().map(|&i| table.rows[i].clone()).collect();
            let mut ytr: Vec<usize> = f.train.iter().map(|&i| y[i]).collect();
            let (sx, sy) = smote_train(&xtr, &ytr, task.n_classes(), spec.smote_k, model_seed.wrapping_add(fi as u64))?;
            let added = sx.len();
            xtr.extend(sx);
            ytr.extend(sy);
            let model = clf.fit(&xtr, &ytr, task.n_classes())?;
            let xte: Vec<Vec<f64>> = f.test.iter().map(|&i| table.rows[i].clone()).collect();
            let pred = model.predict(&xte)?;
            Ok((pred, added))
        })
        .collect::<Result<Vec<_>>>()?;
    let names = task.class_names();
    let mut all_true = Vec::with_capacity(y.len());
    let mut all_pred = Vec::with_capacity(y.len());
    let mut fold_accuracies = Vec::with_capacity(folds.len());
    let mut smote_rows = Vec::with_capacity(folds.len());
    for (f, (pred, added)) in folds.iter().zip(per_fold) {
        let truth: Vec<usize> = f.test.iter().map(|&i| y[i]).collect();
        fold_accuracies.push(evaluate(&truth, &pred, &names)?.accuracy);
        all_true.extend(truth);
        all_pred.extend(pred);
        smote_rows.push(added);
    }
    let (mean_accuracy, sd_accuracy) = mean_sd(&fold_accuracies);
    Ok(CvResult {
        fold_accuracies,
        mean_accuracy,
        sd_accuracy,
        report: evaluate(&all_true, &all_pred, &names)?,
        smote_rows,
    })
}
