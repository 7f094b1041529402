use std::io::Read;
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::calibrate::{calibrate_with, CalibrationOptions};
use super::ipfm::{ipfm_generate, PsvSdgParams};
use crate::data::{Condition, SignalTensor, Subcondition, TrialKey, TrialMeta, Unit};
use crate::error::{Error, Result};
use crate::features::{compute_hrv, compute_windowed_poincare};
use crate::preprocess::RrSeries;
use crate::scalar::Scalar;

/// One synthetic trial to produce. Column order matches the batch CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthTrialSpec {
    pub subject_id: String,
    pub condition: Condition,
    pub subcondition: Subcondition,
    pub trial_index: i64,
    pub mu_hr: f64,
    pub target_sd1_ms: f64,
    pub target_sd2_ms: f64,
    pub duration_s: f64,
    pub seed: u64,
}

impl SynthTrialSpec {
    pub fn meta(&self) -> TrialMeta {
        TrialMeta::new(self.subject_id.clone(), self.condition, self.subcondition, self.trial_index)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_sd1_ms > 0.0 && self.target_sd2_ms > 0.0) {
            return Err(Error::NonPositiveTargets);
        }
        if !(self.mu_hr > 0.0) || !(self.duration_s > 0.0) {
            return Err(Error::InvalidParams(format!(
                "mu_hr {} and duration_s {} must be > 0",
                self.mu_hr, self.duration_s
            )));
        }
        Ok(())
    }

    /// Spec whose targets are the median windowed (sd1, sd2) of a real RR
    /// series and whose rate is its mean heart rate.
    pub fn from_rr<T: Scalar>(
        rr: &RrSeries<T>,
        meta: &TrialMeta,
        window_beats: usize,
        duration_s: f64,
        seed: u64,
    ) -> Result<Self> {
        let w = compute_windowed_poincare(rr, window_beats)?;
        let (sd1, sd2) = w.median_pair().ok_or(Error::TooFewIntervals { needed: window_beats, got: rr.len() })?;
        let mean_nn = compute_hrv(rr)?.mean_nn.as_f64();
        Ok(SynthTrialSpec {
            subject_id: meta.subject_id.clone(),
            condition: meta.condition,
            subcondition: meta.subcondition,
            trial_index: meta.trial_index,
            mu_hr: 1000.0 / mean_nn,
            target_sd1_ms: sd1.as_f64(),
            target_sd2_ms: sd2.as_f64(),
            duration_s,
            seed,
        })
    }
}

pub fn read_specs<R: Read>(r: R) -> Result<Vec<SynthTrialSpec>> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize().map(|rec| rec.map_err(Error::from)).collect()
}

pub fn read_specs_file(path: impl AsRef<Path>) -> Result<Vec<SynthTrialSpec>> {
    let path = path.as_ref();
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_specs(f)
}

pub fn write_specs_file(specs: &[SynthTrialSpec], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    for s in specs {
        w.serialize(s)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Shared generator settings for a batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchOptions {
    pub noise_sd: f64,
    pub calibration: CalibrationOptions,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions { noise_sd: 0.0, calibration: CalibrationOptions::default() }
    }
}

/// A spec that produced no trial.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedSpec {
    pub key: TrialKey,
    pub reason: String,
}

#[derive(Debug, Clone)]
pub struct SyntheticBatch {
    /// `[trial, time]` with time = beat index, unit ms.
    pub tensor: SignalTensor<f64>,
    pub meta: Vec<TrialMeta>,
    pub skipped: Vec<SkippedSpec>,
}

/// RR intervals (ms) for one spec: calibrate, then generate with the spec's seed.
pub fn synthesize_rr(spec: &SynthTrialSpec, opts: &BatchOptions) -> Result<Vec<f64>> {
    spec.validate()?;
    let cal = calibrate_with(spec.target_sd1_ms, spec.target_sd2_ms, spec.mu_hr, spec.duration_s, &opts.calibration)?;
    let params = PsvSdgParams::new(spec.mu_hr, cal.c_s, cal.c_v, spec.duration_s).with_noise(opts.noise_sd);
    let train = ipfm_generate(&params, spec.seed)?;
    let rr = train.intervals_ms();
    if rr.len() < 3 {
        return Err(Error::TooFewIntervals { needed: 3, got: rr.len() });
    }
    Ok(rr)
}

pub fn generate_synthetic_batch(specs: &[SynthTrialSpec]) -> Result<SyntheticBatch> {
    generate_synthetic_batch_with(specs, &BatchOptions::default())
}

/// Specs run in parallel; failures are logged and skipped. Output order
/// follows input order.
pub fn generate_synthetic_batch_with(specs: &[SynthTrialSpec], opts: &BatchOptions) -> Result<SyntheticBatch> {
    let results: Vec<Result<Vec<f64>>> = specs.par_iter().map(|s| synthesize_rr(s, opts)).collect();
    let mut trials = Vec::new();
    let mut meta = Vec::new();
    let mut skipped = Vec::new();
    for (spec, r) in specs.iter().zip(results) {
        match r {
            Ok(rr) => {
                trials.push(vec![rr]);
                meta.push(spec.meta());
            }
            Err(e) => {
                warn!("skipping synthetic trial {}: {e}", spec.meta().key());
                skipped.push(SkippedSpec { key: spec.meta().key(), reason: e.to_string() });
            }
        }
    }
    let tensor = if trials.is_empty() {
        SignalTensor::empty(None, 0, 1.0, Unit::Millisecond)?
    } else {
        SignalTensor::from_trials(&trials, 1.0, Unit::Millisecond, false)?
    };
    Ok(SyntheticBatch { tensor, meta, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(i: i64, sd1: f64, sd2: f64) -> SynthTrialSpec {
        SynthTrialSpec {
            subject_id: "s01".into(),
            condition: Condition::Memorize,
            subcondition: Subcondition::Nine,
            trial_index: i,
            mu_hr: 1.1,
            target_sd1_ms: sd1,
            target_sd2_ms: sd2,
            duration_s: 60.0,
            seed: 100 + i as u64,
        }
    }

    #[test]
    fn unreachable_spec_skipped() {
        let mut specs: Vec<_> = (0..4).map(|i| spec(i, 20.0 + i as f64, 45.0)).collect();
        specs.push(spec(4, 500.0, 600.0));
        let b = generate_synthetic_batch(&specs).unwrap();
        assert_eq!(b.meta.len(), 4);
        assert_eq!(b.skipped.len(), 1);
        assert_eq!(b.skipped[0].key.trial_index, 4);
        assert_eq!(b.tensor.unit(), Unit::Millisecond);
        assert_eq!(b.tensor.n_cells(), 4);
    }

    #[test]
    fn deterministic() {
        let specs: Vec<_> = (0..3).map(|i| spec(i, 15.0, 40.0)).collect();
        let opts = BatchOptions { noise_sd: 0.01, ..Default::default() };
        let a = generate_synthetic_batch_with(&specs, &opts).unwrap();
        let b = generate_synthetic_batch_with(&specs, &opts).unwrap();
        let bits = |t: &SignalTensor<f64>| t.samples().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.tensor), bits(&b.tensor));
    }

    #[test]
    fn spec_csv_round_trip() {
        let specs = vec![spec(0, 10.0, 30.0), spec(1, 12.5, 33.25)];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("specs.csv");
        write_specs_file(&specs, &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.starts_with(
            "subject_id,condition,subcondition,trial_index,mu_hr,target_sd1_ms,target_sd2_ms,duration_s,seed"
        ));
        assert_eq!(read_specs_file(&p).unwrap(), specs);
    }

    #[test]
    fn spec_from_rr_uses_median_window() {
        let ibi: Vec<f64> = (0..80).map(|i| 850.0 + 30.0 * (i as f64 * 0.9).sin()).collect();
        let rr = RrSeries::from_intervals(ibi).unwrap();
        let m = TrialMeta::new("s02", Condition::JustListen, Subcondition::Five, 3);
        let s = SynthTrialSpec::from_rr(&rr, &m, 30, 120.0, 9).unwrap();
        let w = compute_windowed_poincare(&rr, 30).unwrap();
        let (a, b) = w.median_pair().unwrap();
        assert_eq!((s.target_sd1_ms, s.target_sd2_ms), (a, b));
        assert!((s.mu_hr - 1000.0 / compute_hrv(&rr).unwrap().mean_nn).abs() < 1e-12);
    }
}
