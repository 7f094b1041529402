use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eval::{cross_validate, CvResult, CvSpec};
use crate::data::{Condition, FeatureTable, Subcondition};
use crate::error::{Error, Result};
use crate::ml::{
    anova_oneway, pairwise_welch, AnovaResult, ClassifierConfig, ClassifierKind, PairwiseComparison, Task,
};

/// One named feature set; its rows are the concatenation of `tables`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSetSpec {
    pub name: String,
    pub tables: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub feature_sets: Vec<FeatureSetSpec>,
    pub tasks: Vec<Task>,
    pub classifiers: Vec<ClassifierKind>,
    pub cv: CvSpec,
    /// Trees per ensemble for every classifier.
    pub n_trees: usize,
    pub seed: u64,
    /// Null control: permute labels before splitting.
    pub permute_labels: bool,
}

impl ExperimentGrid {
    pub fn new(feature_sets: Vec<FeatureSetSpec>) -> Self {
        ExperimentGrid {
            feature_sets,
            tasks: Task::ALL.to_vec(),
            classifiers: ClassifierKind::ALL.to_vec(),
            cv: CvSpec::default(),
            n_trees: 500,
            seed: 42,
            permute_labels: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.feature_sets.is_empty() || self.tasks.is_empty() || self.classifiers.is_empty() {
            return Err(Error::InvalidConfig("grid needs at least one feature set, task and classifier".into()));
        }
        if self.n_trees == 0 {
            return Err(Error::InvalidConfig("n_trees must be >= 1".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for fs in &self.feature_sets {
            if fs.tables.is_empty() {
                return Err(Error::InvalidConfig(format!("feature set {:?} lists no tables", fs.name)));
            }
            if !seen.insert(fs.name.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate feature set {:?}", fs.name)));
            }
        }
        Ok(())
    }

    fn missing_tables(&self) -> Vec<PathBuf> {
        self.feature_sets.iter().flat_map(|f| f.tables.iter()).filter(|p| !p.is_file()).cloned().collect()
    }
}

/// Sub-seed for unit `index` of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r.next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub feature_set: String,
    pub task: Task,
    pub classifier: ClassifierKind,
    pub n_rows: usize,
    pub fold_seed: u64,
    pub model_seed: u64,
    pub cv: CvResult,
}

impl CellResult {
    pub fn dir_name(&self) -> String {
        format!("{}__{}__{}", sanitize(&self.feature_set), self.task, self.classifier)
    }
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaEntry {
    /// What was held fixed, e.g. `{"task": "multiclass", "feature_set": "HRV"}`.
    pub fixed: BTreeMap<String, String>,
    pub groups: Vec<String>,
    pub result: Option<AnovaResult>,
    pub pairwise: Vec<PairwiseComparison>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryCell {
    pub mean_accuracy: f64,
    pub sd_accuracy: f64,
    pub pooled_accuracy: f64,
    pub macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub feature_set: String,
    pub n_rows: usize,
    /// Keyed by `<task>/<classifier>`.
    pub cells: BTreeMap<String, SummaryCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSummary {
    pub seed: u64,
    pub folds: usize,
    pub split: super::eval::SplitMode,
    pub permute_labels: bool,
    pub rows: Vec<SummaryRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    pub cells: Vec<CellResult>,
    pub summary: GridSummary,
    pub anova: Vec<AnovaEntry>,
}

fn load_set(fs: &FeatureSetSpec) -> Result<FeatureTable> {
    let mut it = fs.tables.iter();
    let first = it.next().ok_or_else(|| Error::InvalidConfig(format!("feature set {:?} lists no tables", fs.name)))?;
    let mut t = FeatureTable::read_csv_file(first)?;
    for p in it {
        t.extend(&FeatureTable::read_csv_file(p)?)?;
    }
    Ok(t)
}

fn permute(t: &FeatureTable, seed: u64) -> FeatureTable {
    let mut labels: Vec<(Condition, Subcondition)> = t.labels.iter().map(|l| (l.condition, l.subcondition)).collect();
    labels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = t.clone();
    for (l, (c, s)) in out.labels.iter_mut().zip(labels) {
        l.condition = c;
        l.subcondition = s;
    }
    out
}

/// Runs every (feature set, task, classifier) cell.
pub fn run_experiment_grid(grid: &ExperimentGrid) -> Result<GridReport> {
    grid.validate()?;
    let missing = grid.missing_tables();
    if !missing.is_empty() {
        return Err(Error::MissingTables(missing));
    }
    let tables: Vec<FeatureTable> = grid
        .feature_sets
        .iter()
        .enumerate()
        .map(|(i, fs)| {
            let t = load_set(fs)?;
            Ok(if grid.permute_labels { permute(&t, derive_seed(grid.seed, 1_000_000 + i as u64)) } else { t })
        })
        .collect::<Result<_>>()?;
    run_grid_tables(grid, &tables)
}

/// Same as [`run_experiment_grid`] with the tables already in memory, one
/// per feature set.
pub fn run_grid_tables(grid: &ExperimentGrid, tables: &[FeatureTable]) -> Result<GridReport> {
    grid.validate()?;
    if tables.len() != grid.feature_sets.len() {
        return Err(Error::LengthMismatch(grid.feature_sets.len(), tables.len()));
    }
    let mut jobs = Vec::new();
    for (si, _) in grid.feature_sets.iter().enumerate() {
        for (ti, &task) in grid.tasks.iter().enumerate() {
            for &kind in &grid.classifiers {
                let cell = jobs.len() as u64;
                // classifiers of one (set, task) share their folds
                let fold_seed = derive_seed(grid.seed, (1 << 40) | (si * grid.tasks.len() + ti) as u64);
                jobs.push((si, task, kind, fold_seed, derive_seed(grid.seed, cell)));
            }
        }
    }
    let cells = jobs
        .par_iter()
        .map(|&(si, task, kind, fold_seed, model_seed)| {
            let clf = ClassifierConfig::new(kind).with_trees(grid.n_trees);
            let cv = cross_validate(&tables[si], task, &clf, &grid.cv, fold_seed, model_seed)?;
            log::info!("cell {} / {task} / {kind}: mean accuracy {:.4}", grid.feature_sets[si].name, cv.mean_accuracy);
            Ok(CellResult {
                feature_set: grid.feature_sets[si].name.clone(),
                task,
                classifier: kind,
                n_rows: tables[si].n_rows(),
                fold_seed,
                model_seed,
                cv,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(grid, &cells);
    let anova = anova_entries(grid, &cells);
    Ok(GridReport { cells, summary, anova })
}

fn summarize(grid: &ExperimentGrid, cells: &[CellResult]) -> GridSummary {
    let rows = grid
        .feature_sets
        .iter()
        .map(|fs| {
            let mine: Vec<&CellResult> = cells.iter().filter(|c| c.feature_set == fs.name).collect();
            SummaryRow {
                feature_set: fs.name.clone(),
                n_rows: mine.first().map_or(0, |c| c.n_rows),
                cells: mine
                    .iter()
                    .map(|c| {
                        (
                            format!("{}/{}", c.task, c.classifier),
                            SummaryCell {
                                mean_accuracy: c.cv.mean_accuracy,
                                sd_accuracy: c.cv.sd_accuracy,
                                pooled_accuracy: c.cv.report.accuracy,
                                macro_f1: c.cv.report.macro_avg.f1,
                            },
                        )
                    })
                    .collect(),
            }
        })
        .collect();
    GridSummary {
        seed: grid.seed,
        folds: grid.cv.folds,
        split: grid.cv.split,
        permute_labels: grid.permute_labels,
        rows,
    }
}

fn anova_of(fixed: BTreeMap<String, String>, named: Vec<(String, Vec<f64>)>) -> AnovaEntry {
    let groups: Vec<String> = named.iter().map(|(n, _)| n.clone()).collect();
    let data: Vec<Vec<f64>> = named.into_iter().map(|(_, v)| v).collect();
    let res = anova_oneway(&data).and_then(|a| Ok((a, pairwise_welch(&data, &groups)?)));
    match res {
        Ok((a, pw)) => AnovaEntry { fixed, groups, result: Some(a), pairwise: pw, error: None },
        Err(e) => AnovaEntry { fixed, groups, result: None, pairwise: Vec::new(), error: Some(e.to_string()) },
    }
}

/// Fold-accuracy ANOVA across classifiers for each (task, feature set), and
/// across feature sets for each (task, classifier).
fn anova_entries(grid: &ExperimentGrid, cells: &[CellResult]) -> Vec<AnovaEntry> {
    let find = |fs: &str, t: Task, k: ClassifierKind| {
        cells
            .iter()
            .find(|c| c.feature_set == fs && c.task == t && c.classifier == k)
            .map(|c| c.cv.fold_accuracies.clone())
    };
    let mut out = Vec::new();
    for &task in &grid.tasks {
        if grid.classifiers.len() >= 2 {
            for fs in &grid.feature_sets {
                let named = grid
                    .classifiers
                    .iter()
                    .filter_map(|&k| find(&fs.name, task, k).map(|v| (k.to_string(), v)))
                    .collect();
                let fixed = BTreeMap::from([
                    ("task".to_string(), task.to_string()),
                    ("feature_set".to_string(), fs.name.clone()),
                ]);
                out.push(anova_of(fixed, named));
            }
        }
        if grid.feature_sets.len() >= 2 {
            for &k in &grid.classifiers {
                let named = grid
                    .feature_sets
                    .iter()
                    .filter_map(|fs| find(&fs.name, task, k).map(|v| (fs.name.clone(), v)))
                    .collect();
                let fixed =
                    BTreeMap::from([("task".to_string(), task.to_string()), ("classifier".to_string(), k.to_string())]);
                out.push(anova_of(fixed, named));
            }
        }
    }
    out
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(v)? + "\n";
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

impl GridReport {
    /// `summary.json`, `anova.json`, and `cells/<cell>/{metrics.json,
    /// confusion.csv, folds.json}`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_json(&dir.join("summary.json"), &self.summary)?;
        write_json(&dir.join("anova.json"), &self.anova)?;
        for c in &self.cells {
            let d = dir.join("cells").join(c.dir_name());
            c.cv.report.write_dir(&d)?;
            #[derive(Serialize)]
            struct Folds<'a> {
                feature_set: &'a str,
                task: Task,
                classifier: ClassifierKind,
                fold_seed: u64,
                model_seed: u64,
                fold_accuracies: &'a [f64],
                mean_accuracy: f64,
                sd_accuracy: f64,
                smote_rows: &'a [usize],
            }
            write_json(
                &d.join("folds.json"),
                &Folds {
                    feature_set: &c.feature_set,
                    task: c.task,
                    classifier: c.classifier,
                    fold_seed: c.fold_seed,
                    model_seed: c.model_seed,
                    fold_accuracies: &c.cv.fold_accuracies,
                    mean_accuracy: c.cv.mean_accuracy,
                    sd_accuracy: c.cv.sd_accuracy,
                    smote_rows: &c.cv.smote_rows,
                },
            )?;
        }
        Ok(())
    }
}
