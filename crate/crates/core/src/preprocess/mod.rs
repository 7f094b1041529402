//! ECG and EEG conditioning.

mod epoch;
mod filter;
mod rpeaks;
mod rr;

pub(crate) use epoch::map_channels;
pub use epoch::{
    average_reference, baseline_correct, epoch_signal, epoch_single, reject_artifacts, zscore_normalize, zscore_tensor,
    EpochSpec, Event,
};
pub use filter::{apply_filter, butterworth_sos, sosfiltfilt, FilterKind, FilterSpec, Section};
pub use rpeaks::{detect_r_peaks, RPeaks};
pub use rr::{extract_rr, RrSeries, RR_MAX_MS, RR_MIN_MS};

/// Default peak-to-peak artifact limit, microvolts.
pub const DEFAULT_ARTIFACT_LIMIT_UV: f64 = 100.0;
