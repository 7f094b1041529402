//! Config-driven stages behind the command-line tool, with run manifests.

mod config;
mod manifest;
mod report;
mod stages;

pub use config::{
    CrossModalSection, ExtractConfig, GridSection, PipelineConfig, PreprocessConfig, SynthConfig, TrainConfig,
};
pub use manifest::{digest_path, FileDigest, RunManifest, RunRecorder, RUN_MANIFEST_FILE};
pub use report::{confusion_svg, summary_table};
pub use stages::{
    crossmodal_config, derive_specs, extract_table, grid_from_config, preprocess_tensor, run_crossmodal,
    run_derive_specs, run_extract, run_grid, run_preprocess, run_report, run_synth, run_train,
};
