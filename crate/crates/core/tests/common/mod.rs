//! Fixture builders shared by the integration test targets.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bhi_core::data::{Axis, Condition, SignalTensor, Subcondition, TrialMeta, Unit};
use bhi_core::psvsdg::SynthTrialSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const EEG_RATE: f64 = 250.0;
pub const EEG_CHANNELS: usize = 4;
/// Epoch from -3 s to +2 s around the event.
pub const EEG_SAMPLES: usize = 1250;

/// Per-class (sd1, sd2) centres in ms for synthetic HRV trials.
pub const CLASS_TARGETS: [(f64, f64); 3] = [(15.0, 30.0), (25.0, 50.0), (40.0, 80.0)];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Balanced multiclass metadata: `n_per_class` trials per load, spread over
/// ten subjects, alternating condition.
pub fn balanced_meta(n_per_class: usize) -> Vec<TrialMeta> {
    let mut out = Vec::with_capacity(3 * n_per_class);
    for i in 0..3 * n_per_class {
        let sub = Subcondition::ALL[i % 3];
        let cond = Condition::ALL[(i / 3) % 2];
        out.push(TrialMeta::new(format!("s{:02}", i % 10), cond, sub, i as i64));
    }
    out
}

/// One synthetic-HRV spec per metadata row with targets jittered ±`jitter`
/// around the class centre of its load.
pub fn class_specs(meta: &[TrialMeta], jitter: f64, duration_s: f64, seed: u64) -> Vec<SynthTrialSpec> {
    let mut r = rng(seed);
    meta.iter()
        .enumerate()
        .map(|(i, m)| {
            let (sd1, sd2) = CLASS_TARGETS[m.subcondition as usize];
            SynthTrialSpec {
                subject_id: m.subject_id.clone(),
                condition: m.condition,
                subcondition: m.subcondition,
                trial_index: m.trial_index,
                mu_hr: r.random_range(1.0..1.3),
                target_sd1_ms: sd1 * r.random_range(1.0 - jitter..1.0 + jitter),
                target_sd2_ms: sd2 * r.random_range(1.0 - jitter..1.0 + jitter),
                duration_s,
                seed: seed.wrapping_mul(1_000_003).wrapping_add(i as u64),
            }
        })
        .collect()
}

/// Epoched EEG-like trials `[trial, channel, time]` in µV: background noise
/// plus an alpha rhythm whose amplitude grows with the load.
pub fn eeg_tensor(meta: &[TrialMeta], seed: u64) -> SignalTensor<f64> {
    let mut r = rng(seed);
    let noise = Normal::new(0.0, 3.0).unwrap();
    let mut samples = Vec::with_capacity(meta.len() * EEG_CHANNELS * EEG_SAMPLES);
    for m in meta {
        let amp = 4.0 + 4.0 * m.subcondition as usize as f64;
        for ch in 0..EEG_CHANNELS {
            let phase: f64 = r.random_range(0.0..std::f64::consts::TAU);
            for k in 0..EEG_SAMPLES {
                let t = k as f64 / EEG_RATE;
                let v = amp * (std::f64::consts::TAU * 10.0 * t + phase + ch as f64).sin() + noise.sample(&mut r);
                samples.push(v);
            }
        }
    }
    let dims = vec![(Axis::Trial, meta.len()), (Axis::Channel, EEG_CHANNELS), (Axis::Time, EEG_SAMPLES)];
    SignalTensor::new(dims, samples, EEG_RATE, vec![EEG_SAMPLES; meta.len()], Unit::Microvolt).unwrap()
}

pub fn bhi() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bhi"));
    c.env_remove("RUST_LOG");
    c
}

pub fn run(args: &[&str]) -> Output {
    bhi().args(args).output().expect("spawn bhi")
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn is_manifest(name: &str) -> bool {
    name == "run_manifest.json" || name.ends_with(".run.json") || name == ".bhix.lock"
}

fn collect(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
    for e in std::fs::read_dir(dir).unwrap() {
        let path = e.unwrap().path();
        if path.is_dir() {
            collect(root, &path, out);
        } else if !is_manifest(path.file_name().unwrap().to_str().unwrap()) {
            out.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
        }
    }
}

/// Contents of a file or directory tree keyed by relative path, run
/// manifests excluded.
pub fn primary_outputs(path: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    if path.is_dir() {
        collect(path, path, &mut out);
    } else {
        out.insert(PathBuf::new(), std::fs::read(path).unwrap());
    }
    out
}
