use std::path::{Path, PathBuf};

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use super::config::{PipelineConfig, PreprocessConfig};
use crate::crossmodal::{
    cross_validate, cross_validate_crossmodal, derive_seed, run_experiment_grid, train_crossmodal, CrossModalConfig,
    CvSpec, ExperimentGrid,
};
use crate::data::{read_tensor, write_tensor, FeatureTable, SignalTensor, TrialMeta};
use crate::error::{Error, Result};
use crate::features::{assemble_features_with, cell_rr, AssembleOptions, FeatureMode};
use crate::ml::{model_to_json, ClassifierConfig, GbtConfig, MetricsReport};
use crate::preprocess::{
    apply_filter, baseline_correct, map_channels, reject_artifacts, zscore_tensor, EpochSpec, FilterSpec,
};
use crate::psvsdg::{generate_synthetic_batch_with, read_specs_file, write_specs_file, BatchOptions, SynthTrialSpec};

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let s = serde_json::to_string_pretty(v)? + "\n";
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

fn create_dir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).map_err(|e| Error::io(p, e))
}

/// Filter, baseline-correct, reject and optionally z-score epoched trials.
/// Returns the kept tensor and metadata plus the rejected cell indices.
pub fn preprocess_tensor(
    t: &SignalTensor<f64>,
    meta: &[TrialMeta],
    cfg: &PreprocessConfig,
) -> Result<(SignalTensor<f64>, Vec<TrialMeta>, Vec<usize>)> {
    let rate = t.sampling_rate();
    let mut cur = t.clone();
    if cfg.filter {
        let spec =
            FilterSpec { order: cfg.filter_order, ..FilterSpec::bandpass(cfg.filter_low_hz, cfg.filter_high_hz) };
        spec.validate(rate)?;
        cur = map_channels(&cur, |_, x| apply_filter(x, rate, &spec))?;
    }
    if cfg.baseline {
        let t_max = cfg.t_min + cur.n_times() as f64 / rate;
        let spec = EpochSpec::new(cfg.t_min, t_max, (cfg.baseline_start, cfg.baseline_end))?;
        cur = baseline_correct(&cur, &spec)?;
    }
    let mut kept_meta = meta.to_vec();
    let mut rejected = Vec::new();
    if cfg.reject_artifacts {
        let (k, r) = reject_artifacts(&cur, cfg.artifact_limit)?;
        kept_meta = (0..meta.len()).filter(|i| r.binary_search(i).is_err()).map(|i| meta[i].clone()).collect();
        cur = k;
        rejected = r;
    }
    if cfg.zscore && cur.n_cells() > 0 {
        cur = zscore_tensor(&cur)?;
    }
    Ok((cur, kept_meta, rejected))
}

pub fn run_preprocess(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let (t, meta) = read_tensor(input)?;
    let (t, meta, rejected) = preprocess_tensor(&t.cast::<f64>(), &meta, &cfg.preprocess)?;
    if !rejected.is_empty() {
        warn!("{} epoch(s) rejected as artifacts", rejected.len());
    }
    write_tensor(&t, &meta, out)?;
    Ok(vec![out.to_path_buf()])
}

pub fn extract_table(cfg: &PipelineConfig, input: &Path, mode: FeatureMode) -> Result<FeatureTable> {
    let (t, meta) = read_tensor(input)?;
    let opts = AssembleOptions { per_channel_catch22: cfg.extract.per_channel_catch22 };
    let (table, dropped) = assemble_features_with(&t.cast::<f64>(), &meta, mode, opts)?;
    if !dropped.is_empty() {
        warn!("{} trial(s) dropped during feature extraction", dropped.len());
    }
    Ok(table)
}

pub fn run_extract(cfg: &PipelineConfig, input: &Path, mode: FeatureMode, out: &Path) -> Result<Vec<PathBuf>> {
    let table = extract_table(cfg, input, mode)?;
    table.write_csv_file(out)?;
    Ok(vec![out.to_path_buf()])
}

/// One spec per real trial and repetition. Targets come from the trial's
/// RR series; seeds derive from the run seed and the output row.
pub fn derive_specs(cfg: &PipelineConfig, t: &SignalTensor<f64>, meta: &[TrialMeta]) -> Result<Vec<SynthTrialSpec>> {
    let s = &cfg.synth;
    let per = s.per_trial;
    let rows: Vec<Result<Vec<SynthTrialSpec>>> = (0..t.n_cells())
        .into_par_iter()
        .map(|c| {
            let rr = cell_rr(t, c)?;
            (0..per)
                .map(|k| {
                    let row = (c * per + k) as u64;
                    let mut m = meta[c].clone();
                    m.trial_index = m.trial_index * per as i64 + k as i64;
                    SynthTrialSpec::from_rr(&rr, &m, s.window_beats, s.duration_s, derive_seed(cfg.seed, row))
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for (c, r) in rows.into_iter().enumerate() {
        match r {
            Ok(v) => out.extend(v),
            Err(e) => warn!("no spec for trial {}: {e}", meta[c].key()),
        }
    }
    Ok(out)
}

pub fn run_derive_specs(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let (t, meta) = read_tensor(input)?;
    let specs = derive_specs(cfg, &t.cast::<f64>(), &meta)?;
    write_specs_file(&specs, out)?;
    Ok(vec![out.to_path_buf()])
}

pub fn run_synth(cfg: &PipelineConfig, spec: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let specs = read_specs_file(spec)?;
    let mut opts = BatchOptions { noise_sd: cfg.synth.noise_sd, ..Default::default() };
    opts.calibration.max_evaluations = cfg.synth.max_evaluations;
    let batch = generate_synthetic_batch_with(&specs, &opts)?;
    info!("synthesized {} trial(s), skipped {}", batch.meta.len(), batch.skipped.len());
    if batch.meta.is_empty() {
        return Err(Error::TargetsUnreachable { best_sd1: f64::NAN, best_sd2: f64::NAN, c_s: f64::NAN, c_v: f64::NAN });
    }
    write_tensor(&batch.tensor, &batch.meta, out)?;
    let sp = out.join("skipped.csv");
    let mut w = csv::Writer::from_path(&sp)?;
    w.write_record(["key", "reason"])?;
    for s in &batch.skipped {
        w.write_record([s.key.to_string(), s.reason.clone()])?;
    }
    w.flush().map_err(|e| Error::io(&sp, e))?;
    Ok(vec![out.to_path_buf()])
}

fn classifier_cfg(cfg: &PipelineConfig) -> ClassifierConfig {
    ClassifierConfig::new(cfg.train.classifier).with_trees(cfg.train.n_trees).with_seed(cfg.seed)
}

fn cv_spec(cfg: &PipelineConfig) -> CvSpec {
    CvSpec { folds: cfg.train.folds, split: cfg.train.split, smote_k: cfg.train.smote_k }
}

fn write_cv(out: &Path, cv: &crate::crossmodal::CvResult) -> Result<()> {
    cv.report.write_dir(out)?;
    #[derive(Serialize)]
    struct Folds<'a> {
        fold_accuracies: &'a [f64],
        mean_accuracy: f64,
        sd_accuracy: f64,
    }
    write_json(
        &out.join("folds.json"),
        &Folds { fold_accuracies: &cv.fold_accuracies, mean_accuracy: cv.mean_accuracy, sd_accuracy: cv.sd_accuracy },
    )
}

/// Cross-validated metrics plus a model fit on every row.
pub fn run_train(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let table = FeatureTable::read_csv_file(input)?;
    let task = cfg.train.task;
    let clf = classifier_cfg(cfg);
    let cv = cross_validate(&table, task, &clf, &cv_spec(cfg), derive_seed(cfg.seed, 0), derive_seed(cfg.seed, 1))?;
    create_dir(out)?;
    write_cv(out, &cv)?;
    let y = task.encode_table(&table);
    let model = clf.fit(&table.rows, &y, task.n_classes())?;
    let mp = out.join("model.json");
    std::fs::write(&mp, model_to_json(&model)? + "\n").map_err(|e| Error::io(&mp, e))?;
    Ok(vec![out.to_path_buf()])
}

pub fn crossmodal_config(cfg: &PipelineConfig) -> CrossModalConfig {
    let mut c = CrossModalConfig::new(cfg.train.task, classifier_cfg(cfg));
    c.regressor = GbtConfig { n_trees: cfg.crossmodal.regressor_trees, ..GbtConfig::regression() };
    c.smote_k = cfg.train.smote_k;
    c.seed = cfg.seed;
    c
}

pub fn run_crossmodal(cfg: &PipelineConfig, hrv: &Path, eeg: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let h = FeatureTable::read_csv_file(hrv)?;
    let e = FeatureTable::read_csv_file(eeg)?;
    let cm = crossmodal_config(cfg);
    let cv = cross_validate_crossmodal(&h, &e, &cm, &cv_spec(cfg), derive_seed(cfg.seed, 0))?;
    create_dir(out)?;
    write_cv(out, &cv)?;
    let model = train_crossmodal(&h, &e, &cm)?;
    let mp = out.join("model.json");
    std::fs::write(&mp, model_to_json(&model)? + "\n").map_err(|e| Error::io(&mp, e))?;
    Ok(vec![out.to_path_buf()])
}

pub fn grid_from_config(cfg: &PipelineConfig) -> Result<ExperimentGrid> {
    if cfg.grid.feature_sets.is_empty() {
        return Err(Error::InvalidConfig("grid.feature_sets: at least one feature set required".into()));
    }
    let mut g = ExperimentGrid::new(cfg.grid.feature_sets.clone());
    g.tasks = cfg.grid.tasks.clone();
    g.classifiers = cfg.grid.classifiers.clone();
    g.cv = cv_spec(cfg);
    g.n_trees = cfg.train.n_trees;
    g.seed = cfg.seed;
    g.permute_labels = cfg.grid.permute_labels;
    Ok(g)
}

pub fn run_grid(cfg: &PipelineConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let g = grid_from_config(cfg)?;
    let report = run_experiment_grid(&g)?;
    report.write_dir(out)?;
    Ok(vec![out.to_path_buf()])
}

fn find_metrics(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let mut entries: Vec<PathBuf> =
        std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?.filter_map(|e| e.ok().map(|e| e.path())).collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            find_metrics(root, &p, out)?;
        } else if p.file_name().is_some_and(|n| n == "metrics.json") {
            out.push(p.strip_prefix(root).unwrap_or(&p).to_path_buf());
        }
    }
    Ok(())
}

/// Renders `report.md` and one confusion-matrix SVG per `metrics.json`
/// found under `input`.
pub fn run_report(input: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    if !input.is_dir() {
        return Err(Error::MissingTables(vec![input.to_path_buf()]));
    }
    let mut found = Vec::new();
    find_metrics(input, input, &mut found)?;
    create_dir(out)?;
    let mut md = String::from("# Evaluation report\n\n");
    let sp = input.join("summary.json");
    if sp.is_file() {
        let text = std::fs::read_to_string(&sp).map_err(|e| Error::io(&sp, e))?;
        let s: crate::crossmodal::GridSummary = serde_json::from_str(&text)?;
        md += &super::report::summary_table(&s);
        md.push('\n');
    }
    md += "## Per-cell results\n\n| cell | accuracy | macro F1 | confusion |\n|---|---|---|---|\n";
    for rel in &found {
        let p = input.join(rel);
        let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        let r: MetricsReport = serde_json::from_str(&text)?;
        let cell = rel.parent().map(|d| d.to_string_lossy().replace(['/', '\\'], "__")).unwrap_or_default();
        let cell = if cell.is_empty() { "root".to_string() } else { cell };
        let svg = format!("confusion_{cell}.svg");
        let sp = out.join(&svg);
        std::fs::write(&sp, super::report::confusion_svg(&r, &cell)).map_err(|e| Error::io(&sp, e))?;
        md += &format!("| {cell} | {:.4} | {:.4} | [svg]({svg}) |\n", r.accuracy, r.macro_avg.f1);
    }
    let rp = out.join("report.md");
    std::fs::write(&rp, md).map_err(|e| Error::io(&rp, e))?;
    Ok(vec![out.to_path_buf()])
}
