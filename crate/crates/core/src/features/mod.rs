//! Per-trial feature extraction.

mod assemble;
mod catch22;
mod hrv;
mod spectral;

pub use assemble::{assemble_features, assemble_features_with, cell_rr, AssembleOptions, DroppedTrial, FeatureMode};
pub use catch22::{compute_catch22, Catch22Vector, CATCH22_MIN_LEN, CATCH22_NAMES};
pub use hrv::{compute_hrv, compute_windowed_poincare, HrvFeatures, WindowedPoincare, HRV_NAMES};
pub use spectral::{compute_band_power, welch_psd, BandPowerVector, BANDS, BAND_NAMES};

/// Default Poincaré window in beats.
pub const DEFAULT_WINDOW_BEATS: usize = 30;
