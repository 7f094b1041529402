use std::fmt;
use std::str::FromStr;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::catch22::{compute_catch22, CATCH22_NAMES};
use super::hrv::{compute_hrv, HRV_NAMES};
use super::spectral::{compute_band_power, BAND_NAMES};
use crate::data::{FeatureTable, SignalTensor, TrialKey, TrialMeta, Unit};
use crate::error::{Error, Result};
use crate::preprocess::{detect_r_peaks, extract_rr, RrSeries};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    Hrv,
    Catch22,
    BandPower,
    EegCombined,
}

impl FeatureMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureMode::Hrv => "hrv",
            FeatureMode::Catch22 => "catch22",
            FeatureMode::BandPower => "bandpower",
            FeatureMode::EegCombined => "eeg_combined",
        }
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "hrv" => Ok(FeatureMode::Hrv),
            "catch22" => Ok(FeatureMode::Catch22),
            "bandpower" | "band_power" => Ok(FeatureMode::BandPower),
            "eeg_combined" | "eeg" => Ok(FeatureMode::EegCombined),
            other => Err(format!("unknown feature mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssembleOptions {
    /// In catch22 mode, emit one block of 22 columns per channel instead of
    /// the channel average.
    pub per_channel_catch22: bool,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        AssembleOptions { per_channel_catch22: false }
    }
}

/// A trial left out of the table, with the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct DroppedTrial {
    pub key: TrialKey,
    pub reason: String,
}

pub fn assemble_features<T: Scalar>(
    tensor: &SignalTensor<T>,
    meta: &[TrialMeta],
    mode: FeatureMode,
) -> Result<(FeatureTable, Vec<DroppedTrial>)> {
    assemble_features_with(tensor, meta, mode, AssembleOptions::default())
}

/// One row per cell. Cells whose features fail or contain NaN are dropped
/// and logged.
pub fn assemble_features_with<T: Scalar>(
    tensor: &SignalTensor<T>,
    meta: &[TrialMeta],
    mode: FeatureMode,
    opts: AssembleOptions,
) -> Result<(FeatureTable, Vec<DroppedTrial>)> {
    if tensor.is_empty() || tensor.n_times() == 0 {
        return Err(Error::EmptyTensor);
    }
    if meta.len() != tensor.n_cells() {
        return Err(Error::MetaIncomplete(format!("{} cells, {} meta entries", tensor.n_cells(), meta.len())));
    }
    let n_ch = tensor.n_channels();
    let names = column_names(mode, n_ch, opts);
    let rows: Vec<Result<Vec<f64>>> =
        (0..tensor.n_cells()).into_par_iter().map(|cell| cell_features(tensor, cell, mode, opts)).collect();
    let mut table = FeatureTable::empty(names);
    let mut dropped = Vec::new();
    for (row, m) in rows.into_iter().zip(meta) {
        let reason = match row {
            Ok(r) if r.iter().all(|v| v.is_finite()) => {
                table.push(r, m.clone(), false);
                continue;
            }
            Ok(_) => "non-finite feature".to_string(),
            Err(e) => e.to_string(),
        };
        warn!("dropping trial {}: {reason}", m.key());
        dropped.push(DroppedTrial { key: m.key(), reason });
    }
    Ok((table, dropped))
}

fn column_names(mode: FeatureMode, n_ch: usize, opts: AssembleOptions) -> Vec<String> {
    let plain = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let per_channel =
        |names: &[&str]| (0..n_ch).flat_map(|c| names.iter().map(move |n| format!("ch{c}_{n}"))).collect::<Vec<_>>();
    let band = || {
        (0..n_ch)
            .flat_map(|c| {
                let abs = BAND_NAMES.iter().map(move |b| format!("ch{c}_{b}_abs"));
                let rel = BAND_NAMES.iter().map(move |b| format!("ch{c}_{b}_rel"));
                abs.chain(rel)
            })
            .collect::<Vec<_>>()
    };
    match mode {
        FeatureMode::Hrv => plain(&HRV_NAMES),
        FeatureMode::Catch22 if opts.per_channel_catch22 && n_ch > 1 => per_channel(&CATCH22_NAMES),
        FeatureMode::Catch22 => plain(&CATCH22_NAMES),
        FeatureMode::BandPower => band(),
        FeatureMode::EegCombined => {
            let mut v = band();
            v.extend(per_channel(&CATCH22_NAMES));
            v
        }
    }
}

/// RR series of a cell: the stored intervals for millisecond tensors,
/// otherwise detected from the first channel as ECG.
pub fn cell_rr<T: Scalar>(tensor: &SignalTensor<T>, cell: usize) -> Result<RrSeries<T>> {
    let x = tensor.channel(cell, 0);
    if tensor.unit() == Unit::Millisecond {
        RrSeries::from_intervals(x.to_vec())
    } else {
        let peaks = detect_r_peaks(x, tensor.sampling_rate())?;
        extract_rr(&peaks.peaks, tensor.sampling_rate())
    }
}

fn catch22_rows<T: Scalar>(tensor: &SignalTensor<T>, cell: usize) -> Result<Vec<[f64; 22]>> {
    tensor.cell_channels(cell).into_iter().map(|x| compute_catch22(x).map(|v| v.values)).collect()
}

fn cell_features<T: Scalar>(
    tensor: &SignalTensor<T>,
    cell: usize,
    mode: FeatureMode,
    opts: AssembleOptions,
) -> Result<Vec<f64>> {
    match mode {
        FeatureMode::Hrv => {
            let h = compute_hrv(&cell_rr(tensor, cell)?)?;
            Ok(h.to_array().iter().map(|v| v.as_f64()).collect())
        }
        FeatureMode::Catch22 => {
            let per = catch22_rows(tensor, cell)?;
            if opts.per_channel_catch22 && per.len() > 1 {
                Ok(per.concat())
            } else {
                let n = per.len() as f64;
                Ok((0..22).map(|i| per.iter().map(|r| r[i]).sum::<f64>() / n).collect())
            }
        }
        FeatureMode::BandPower => band_row(tensor, cell),
        FeatureMode::EegCombined => {
            let mut row = band_row(tensor, cell)?;
            row.extend(catch22_rows(tensor, cell)?.concat());
            Ok(row)
        }
    }
}

fn band_row<T: Scalar>(tensor: &SignalTensor<T>, cell: usize) -> Result<Vec<f64>> {
    let bp = compute_band_power(&tensor.cell_channels(cell), tensor.sampling_rate())?;
    Ok(bp
        .absolute
        .iter()
        .zip(&bp.relative)
        .flat_map(|(a, r)| a.iter().chain(r.iter()).map(|v| v.as_f64()).collect::<Vec<_>>())
        .collect())
}
