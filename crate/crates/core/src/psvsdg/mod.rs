//! Synthetic beat trains from an integral pulse frequency modulation model
//! with sinusoidal sympathetic (0.1 Hz) and vagal (0.25 Hz) rate modulation.

mod batch;
mod calibrate;
mod ipfm;

pub use batch::{
    generate_synthetic_batch, generate_synthetic_batch_with, read_specs, read_specs_file, synthesize_rr,
    write_specs_file, BatchOptions, SkippedSpec, SynthTrialSpec, SyntheticBatch,
};
pub use calibrate::{
    calibrate_amplitudes, calibrate_with, max_modulation, measure_sd, Calibration, CalibrationOptions,
};
pub use ipfm::{ipfm_generate, BeatTrain, PsvSdgParams, DEFAULT_DT, F_SYMPATHETIC, F_VAGAL, MAX_DT};
