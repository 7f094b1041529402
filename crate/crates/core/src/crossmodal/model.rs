use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::eval::{make_folds, smote_train, CvResult, CvSpec};
use crate::data::{FeatureTable, TrialKey};
use crate::error::{Error, Result};
use crate::features::HRV_NAMES;
use crate::ml::{
    evaluate, Classifier, ClassifierConfig, GbtConfig, MetricsReport, MultiGbtRegressor, Task, MODEL_FORMAT_VERSION,
};

pub const MIN_PAIRS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossModalConfig {
    pub task: Task,
    pub regressor: GbtConfig,
    pub classifier: ClassifierConfig,
    /// SMOTE neighbours for the EEG classifier's training rows; 0 disables.
    pub smote_k: usize,
    pub seed: u64,
}

impl CrossModalConfig {
    pub fn new(task: Task, classifier: ClassifierConfig) -> Self {
        CrossModalConfig { task, regressor: GbtConfig::regression(), classifier, smote_k: 5, seed: 42 }
    }
}

/// HRV → EEG-feature regressor plus a classifier trained on real EEG rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossModalModel {
    pub format_version: u32,
    pub task: Task,
    pub hrv_names: Vec<String>,
    pub eeg_names: Vec<String>,
    pub regressor: MultiGbtRegressor,
    pub eeg_classifier: Classifier,
}

/// Row pairs `(hrv_row, eeg_row)` in key order; every key must appear on
/// both sides exactly once.
pub fn align(hrv: &FeatureTable, eeg: &FeatureTable) -> Result<Vec<(usize, usize)>> {
    let hi = hrv.key_index()?;
    let ei = eeg.key_index()?;
    let hk: BTreeSet<&TrialKey> = hi.keys().collect();
    let ek: BTreeSet<&TrialKey> = ei.keys().collect();
    let unmatched: Vec<String> = hk.symmetric_difference(&ek).map(|k| k.to_string()).collect();
    if !unmatched.is_empty() {
        return Err(Error::AlignmentFailure(unmatched));
    }
    Ok(hk.iter().map(|k| (hi[*k], ei[*k])).collect())
}

fn check_names(expected: &[String], got: &[String]) -> Result<()> {
    if expected != got {
        return Err(Error::NameMismatch { expected: expected.to_vec(), got: got.to_vec() });
    }
    Ok(())
}

pub fn train_crossmodal(hrv: &FeatureTable, eeg: &FeatureTable, cfg: &CrossModalConfig) -> Result<CrossModalModel> {
    hrv.check()?;
    eeg.check()?;
    let hrv_names: Vec<String> = HRV_NAMES.iter().map(|s| s.to_string()).collect();
    check_names(&hrv_names, &hrv.feature_names)?;
    let pairs = align(hrv, eeg)?;
    if pairs.len() < MIN_PAIRS {
        return Err(Error::TooFewPairs { needed: MIN_PAIRS, got: pairs.len() });
    }
    let x: Vec<Vec<f64>> = pairs.iter().map(|&(h, _)| hrv.rows[h].clone()).collect();
    let targets: Vec<Vec<f64>> = pairs.iter().map(|&(_, e)| eeg.rows[e].clone()).collect();
    let regressor = MultiGbtRegressor::fit(&x, &targets, &GbtConfig { seed: cfg.seed, ..cfg.regressor })?;

    let n_classes = cfg.task.n_classes();
    let mut ex = targets;
    let mut ey: Vec<usize> = pairs.iter().map(|&(_, e)| cfg.task.encode(&eeg.labels[e])).collect();
    let (sx, sy) = smote_train(&ex, &ey, n_classes, cfg.smote_k, cfg.seed)?;
    ex.extend(sx);
    ey.extend(sy);
    let eeg_classifier = cfg.classifier.with_seed(cfg.seed).fit(&ex, &ey, n_classes)?;
    Ok(CrossModalModel {
        format_version: MODEL_FORMAT_VERSION,
        task: cfg.task,
        hrv_names,
        eeg_names: eeg.feature_names.clone(),
        regressor,
        eeg_classifier,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossModalPrediction {
    pub labels: Vec<usize>,
    pub regressed: Vec<Vec<f64>>,
    pub report: MetricsReport,
}

impl CrossModalModel {
    /// Regressed EEG features for raw HRV rows given with their names.
    pub fn regress(&self, names: &[String], rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        check_names(&self.hrv_names, names)?;
        self.regressor.predict(rows)
    }

    pub fn predict_rows(&self, names: &[String], rows: &[Vec<f64>]) -> Result<Vec<usize>> {
        let r = self.regress(names, rows)?;
        self.eeg_classifier.predict(&r)
    }
}

/// Classifies HRV rows through the regressed EEG space and scores them
/// against the table's labels.
pub fn predict_crossmodal(model: &CrossModalModel, hrv: &FeatureTable) -> Result<CrossModalPrediction> {
    hrv.check()?;
    let regressed = model.regress(&hrv.feature_names, &hrv.rows)?;
    let labels = model.eeg_classifier.predict(&regressed)?;
    let truth = model.task.encode_table(hrv);
    let report = evaluate(&truth, &labels, &model.task.class_names())?;
    Ok(CrossModalPrediction { labels, regressed, report })
}

/// k-fold estimate of the cross-modal pipeline: each fold trains on the
/// other folds' aligned pairs and classifies its own HRV rows.
pub fn cross_validate_crossmodal(
    hrv: &FeatureTable,
    eeg: &FeatureTable,
    cfg: &CrossModalConfig,
    spec: &CvSpec,
    fold_seed: u64,
) -> Result<CvResult> {
    let pairs = align(hrv, eeg)?;
    let (hi, ei): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
    let h = hrv.subset(&hi);
    let e = eeg.subset(&ei);
    let y = cfg.task.encode_table(&h);
    let folds = make_folds(&h, &y, cfg.task, spec, fold_seed)?;
    let cfg = CrossModalConfig { smote_k: spec.smote_k, ..*cfg };
    let names = cfg.task.class_names();
    let (mut all_t, mut all_p, mut accs) = (Vec::new(), Vec::new(), Vec::new());
    for f in &folds {
        let model = train_crossmodal(&h.subset(&f.train), &e.subset(&f.train), &cfg)?;
        let p = predict_crossmodal(&model, &h.subset(&f.test))?;
        accs.push(p.report.accuracy);
        all_t.extend(f.test.iter().map(|&i| y[i]));
        all_p.extend(p.labels);
    }
    let m = accs.iter().sum::<f64>() / accs.len() as f64;
    let sd = (accs.iter().map(|a| (a - m) * (a - m)).sum::<f64>() / (accs.len() as f64 - 1.0).max(1.0)).sqrt();
    Ok(CvResult {
        fold_accuracies: accs,
        mean_accuracy: m,
        sd_accuracy: sd,
        report: evaluate(&all_t, &all_p, &names)?,
        smote_rows: Vec::new(),
    })
}
