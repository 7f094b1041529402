//! HRV → EEG-feature regression, classification in EEG space, and the
//! feature-set × task × classifier evaluation grid.

mod eval;
mod grid;
mod model;

pub use eval::{cross_validate, CvResult, CvSpec, SplitMode};
pub use grid::{
    derive_seed, run_experiment_grid, run_grid_tables, AnovaEntry, CellResult, ExperimentGrid, FeatureSetSpec,
    GridReport, GridSummary, SummaryCell, SummaryRow,
};
pub use model::{
    align, cross_validate_crossmodal, predict_crossmodal, train_crossmodal, CrossModalConfig, CrossModalModel,
    CrossModalPrediction, MIN_PAIRS,
};
