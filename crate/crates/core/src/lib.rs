//! Brain-heart feature pipeline.
//!
//! ECG and EEG conditioning, HRV / Poincaré / catch22 / band-power features,
//! IPFM-based synthetic HRV generation (sympathetic and vagal sinusoidal
//! modulation), in-house tree ensembles, and a cross-modal HRV → EEG-feature
//! evaluation harness.
//!
//! Signal math is generic over [`Scalar`] (`f32` or `f64`); the aliases at the
//! bottom of this file name the concrete types most callers want.

pub mod crossmodal;
pub mod data;
pub mod error;
pub mod features;
pub mod ml;
pub mod pipeline;
pub mod preprocess;
pub mod psvsdg;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use data::{
    read_tensor, select_trials, write_tensor, Axis, Condition, FeatureTable, SignalTensor, Subcondition, TrialKey,
    TrialMeta, Unit,
};
pub use features::{
    assemble_features, compute_band_power, compute_catch22, compute_hrv, compute_windowed_poincare, BandPowerVector,
    Catch22Vector, FeatureMode, HrvFeatures, WindowedPoincare,
};
pub use preprocess::{
    apply_filter, baseline_correct, detect_r_peaks, epoch_signal, extract_rr, reject_artifacts, zscore_normalize,
    EpochSpec, FilterKind, FilterSpec, RrSeries,
};
pub use psvsdg::{
    calibrate_amplitudes, generate_synthetic_batch, ipfm_generate, BeatTrain, PsvSdgParams, SynthTrialSpec,
};

/// Single-precision tensor, the on-disk sample type.
pub type Tensor32 = SignalTensor<f32>;
/// Double-precision tensor used for in-memory processing.
pub type Tensor64 = SignalTensor<f64>;
pub type Rr64 = RrSeries<f64>;
pub type Rr32 = RrSeries<f32>;
pub type Hrv64 = HrvFeatures<f64>;
pub type Hrv32 = HrvFeatures<f32>;
pub type Params64 = PsvSdgParams<f64>;
pub type Beats64 = BeatTrain<f64>;
pub type Filter64 = FilterSpec<f64>;
pub type Epochs64 = EpochSpec<f64>;
