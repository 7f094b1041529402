use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::crossmodal::{FeatureSetSpec, SplitMode};
use crate::error::{Error, Result};
use crate::features::{FeatureMode, DEFAULT_WINDOW_BEATS};
use crate::ml::{ClassifierKind, Task};
use crate::preprocess::DEFAULT_ARTIFACT_LIMIT_UV;

/// Whole-run configuration. Every section is optional; missing keys take
/// the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    /// Worker threads; 0 lets the runtime choose.
    pub jobs: usize,
    pub preprocess: PreprocessConfig,
    pub extract: ExtractConfig,
    pub synth: SynthConfig,
    pub train: TrainConfig,
    pub crossmodal: CrossModalSection,
    pub grid: GridSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 42,
            jobs: 0,
            preprocess: PreprocessConfig::default(),
            extract: ExtractConfig::default(),
            synth: SynthConfig::default(),
            train: TrainConfig::default(),
            crossmodal: CrossModalSection::default(),
            grid: GridSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub filter: bool,
    pub filter_low_hz: f64,
    pub filter_high_hz: f64,
    pub filter_order: usize,
    pub baseline: bool,
    /// Epoch start relative to the event, seconds.
    pub t_min: f64,
    pub baseline_start: f64,
    pub baseline_end: f64,
    pub reject_artifacts: bool,
    pub artifact_limit: f64,
    pub zscore: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            filter: true,
            filter_low_hz: 1.0,
            filter_high_hz: 40.0,
            filter_order: 4,
            baseline: true,
            t_min: -3.0,
            baseline_start: -3.0,
            baseline_end: 0.0,
            reject_artifacts: true,
            artifact_limit: DEFAULT_ARTIFACT_LIMIT_UV,
            zscore: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractConfig {
    pub mode: FeatureMode,
    pub per_channel_catch22: bool,
}

impl Default for ExtractConfig {
    fn default() -> Self {
        ExtractConfig { mode: FeatureMode::Hrv, per_channel_catch22: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub noise_sd: f64,
    pub max_evaluations: usize,
    /// Beats per Poincaré window when deriving specs from real RR.
    pub window_beats: usize,
    /// Synthetic trials derived from each real trial.
    pub per_trial: usize,
    pub duration_s: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            noise_sd: 0.0,
            max_evaluations: 40,
            window_beats: DEFAULT_WINDOW_BEATS,
            per_trial: 1,
            duration_s: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub task: Task,
    pub classifier: ClassifierKind,
    pub n_trees: usize,
    pub folds: usize,
    pub split: SplitMode,
    pub smote_k: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            task: Task::Multiclass,
            classifier: ClassifierKind::Gbt,
            n_trees: 500,
            folds: 5,
            split: SplitMode::Trial,
            smote_k: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrossModalSection {
    pub hrv: Option<PathBuf>,
    pub eeg: Option<PathBuf>,
    /// Trees in the HRV → EEG regressor, per output.
    pub regressor_trees: usize,
}

impl Default for CrossModalSection {
    fn default() -> Self {
        CrossModalSection { hrv: None, eeg: None, regressor_trees: 500 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub feature_sets: Vec<FeatureSetSpec>,
    pub tasks: Vec<Task>,
    pub classifiers: Vec<ClassifierKind>,
    pub permute_labels: bool,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            feature_sets: Vec::new(),
            tasks: Task::ALL.to_vec(),
            classifiers: ClassifierKind::ALL.to_vec(),
            permute_labels: false,
        }
    }
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::InvalidConfig(format!("{field}: {msg}"))
}

impl PipelineConfig {
    /// Reads a TOML file; relative table paths resolve against its folder.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            Error::InvalidConfig(m) => Error::InvalidConfig(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for fs in &mut cfg.grid.feature_sets {
            fs.tables.iter_mut().for_each(fix);
        }
        cfg.crossmodal.hrv.iter_mut().for_each(fix);
        cfg.crossmodal.eeg.iter_mut().for_each(fix);
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string().trim_end().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.preprocess;
        if p.filter {
            if !(p.filter_low_hz >= 0.0) {
                return Err(invalid("preprocess.filter_low_hz", "must be >= 0"));
            }
            if !(p.filter_high_hz > p.filter_low_hz) {
                return Err(invalid("preprocess.filter_high_hz", "must exceed filter_low_hz"));
            }
            if p.filter_order == 0 {
                return Err(invalid("preprocess.filter_order", "must be >= 1"));
            }
        }
        if p.baseline
            && !(p.t_min < 0.0
                && p.baseline_start >= p.t_min
                && p.baseline_start < p.baseline_end
                && p.baseline_end <= 0.0)
        {
            return Err(invalid("preprocess.baseline_start", "need t_min <= baseline_start < baseline_end <= 0"));
        }
        if p.reject_artifacts && !(p.artifact_limit > 0.0) {
            return Err(invalid("preprocess.artifact_limit", "limit > 0 required"));
        }
        let s = &self.synth;
        if !(s.noise_sd >= 0.0) {
            return Err(invalid("synth.noise_sd", "must be >= 0"));
        }
        if s.max_evaluations == 0 {
            return Err(invalid("synth.max_evaluations", "must be >= 1"));
        }
        if s.window_beats < 3 {
            return Err(invalid("synth.window_beats", "must be >= 3"));
        }
        if s.per_trial == 0 {
            return Err(invalid("synth.per_trial", "must be >= 1"));
        }
        if !(s.duration_s > 0.0) {
            return Err(invalid("synth.duration_s", "must be > 0"));
        }
        let t = &self.train;
        if t.n_trees == 0 {
            return Err(invalid("train.n_trees", "must be >= 1"));
        }
        if t.folds < 2 {
            return Err(invalid("train.folds", "must be >= 2"));
        }
        if self.crossmodal.regressor_trees == 0 {
            return Err(invalid("crossmodal.regressor_trees", "must be >= 1"));
        }
        for (i, fs) in self.grid.feature_sets.iter().enumerate() {
            if fs.name.is_empty() {
                return Err(invalid(&format!("grid.feature_sets[{i}].name"), "must not be empty"));
            }
            if fs.tables.is_empty() {
                return Err(invalid(&format!("grid.feature_sets[{i}].tables"), "must list at least one table"));
            }
        }
        if self.grid.tasks.is_empty() {
            return Err(invalid("grid.tasks", "must not be empty"));
        }
        if self.grid.classifiers.is_empty() {
            return Err(invalid("grid.classifiers", "must not be empty"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_from_empty() {
        let c = PipelineConfig::from_toml("").unwrap();
        assert_eq!(c, PipelineConfig::default());
        assert_eq!(c.train.n_trees, 500);
    }

    #[test]
    fn unknown_field_named() {
        let e = PipelineConfig::from_toml("[train]\nn_tres = 5\n").unwrap_err().to_string();
        assert!(e.contains("n_tres"), "{e}");
    }

    #[test]
    fn bad_value_named() {
        let e = PipelineConfig::from_toml("[train]\nfolds = 1\n").unwrap_err().to_string();
        assert!(e.contains("train.folds"), "{e}");
        let e = PipelineConfig::from_toml("[train]\ntask = \"ternary\"\n").unwrap_err().to_string();
        assert!(e.contains("task"), "{e}");
    }

    #[test]
    fn grid_section_parses() {
        let c = PipelineConfig::from_toml(
            "seed = 7\n[grid]\ntasks = [\"multiclass\"]\nclassifiers = [\"forest\"]\n[[grid.feature_sets]]\nname = \"HRV\"\ntables = [\"hrv.csv\"]\n",
        )
        .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.grid.feature_sets[0].tables, vec![PathBuf::from("hrv.csv")]);
    }

    #[test]
    fn missing_file_names_path() {
        let e = PipelineConfig::load("/nonexistent/missing.toml").unwrap_err().to_string();
        assert!(e.contains("missing.toml"));
    }
}
