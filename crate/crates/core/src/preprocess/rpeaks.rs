use super::filter::{butterworth_sos, sosfiltfilt, FilterKind, FilterSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Detected R-peaks and the heart-rate plausibility of each beat-to-beat gap.
#[derive(Debug, Clone, PartialEq)]
pub struct RPeaks {
    /// Sample indices, strictly increasing.
    pub peaks: Vec<usize>,
    /// Per gap: instantaneous rate outside 30–200 bpm.
    pub hr_flagged: Vec<bool>,
}

const REFRACTORY_S: f64 = 0.2;
const T_WAVE_S: f64 = 0.36;
const MWI_S: f64 = 0.15;
const REFINE_S: f64 = 0.1;

/// Pan–Tompkins style QRS detector.
///
/// Zero-phase 5–15 Hz bandpass, five-point derivative, squaring and a
/// centred 150 ms moving-window integral feed an adaptive dual threshold
/// with a 200 ms refractory period and RR-based searchback. Each accepted
/// integrator peak is moved to the bandpassed maximum within ±100 ms.
pub fn detect_r_peaks<T: Scalar>(ecg: &[T], rate: f64) -> Result<RPeaks> {
    if rate < 100.0 {
        return Err(Error::RateTooLow(format!("R-peak detection needs ≥ 100 Hz, got {rate}")));
    }
    let n = ecg.len();
    if (n as f64) < 2.0 * rate {
        return Err(Error::SignalTooShort(format!("{n} samples at {rate} Hz is under 2 s")));
    }
    if ecg.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let x: Vec<f64> = ecg.iter().map(|v| v.as_f64()).collect();
    let m = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    if !(var > 0.0) {
        return Err(Error::FlatSignal);
    }

    let spec = FilterSpec { kind: FilterKind::Bandpass, low_hz: 5.0, high_hz: 15.0, order: 2, zero_phase: true };
    let bp = sosfiltfilt(&butterworth_sos(&spec, rate)?, &x);

    let mut deriv = vec![0.0; n];
    for i in 2..n.saturating_sub(2) {
        deriv[i] = (2.0 * bp[i + 2] + bp[i + 1] - bp[i - 1] - 2.0 * bp[i - 2]) * rate / 8.0;
    }
    let sq: Vec<f64> = deriv.iter().map(|d| d * d).collect();
    let mwi = centred_mean(&sq, ((MWI_S * rate).round() as usize).max(1));

    let refractory = (REFRACTORY_S * rate).round() as usize;
    let candidates = merge_within(&local_maxima(&mwi), &mwi, refractory);

    let init_end = ((2.0 * rate) as usize).min(n);
    let init_max = mwi[..init_end].iter().cloned().fold(0.0, f64::max);
    let init_mean = mwi[..init_end].iter().sum::<f64>() / init_end as f64;
    let mut spki = 0.5 * init_max;
    let mut npki = 0.5 * init_mean;
    let mut thr1 = npki + 0.25 * (spki - npki);

    let slope_at = |i: usize| -> f64 {
        let h = (0.075 * rate) as usize;
        let lo = i.saturating_sub(h);
        let hi = (i + h + 1).min(n);
        deriv[lo..hi].iter().fold(0.0, |a, v| a.max(v.abs()))
    };

    let mut detected: Vec<usize> = Vec::new();
    let mut last_slope = 0.0;
    let mut noise_since: Vec<usize> = Vec::new();
    let rr_mean = |d: &[usize]| -> Option<f64> {
        if d.len() < 2 {
            return None;
        }
        let k = d.len().min(9);
        let tail = &d[d.len() - k..];
        Some((tail[k - 1] - tail[0]) as f64 / (k - 1) as f64)
    };

    for &c in &candidates {
        if let (Some(&last), Some(rr)) = (detected.last(), rr_mean(&detected)) {
            if (c - last) as f64 > 1.66 * rr {
                let thr2 = 0.5 * thr1;
                let best = noise_since
                    .iter()
                    .copied()
                    .filter(|&p| p > last + refractory && p + refractory < c && mwi[p] > thr2)
                    .max_by(|&a, &b| mwi[a].partial_cmp(&mwi[b]).unwrap().then(b.cmp(&a)));
                if let Some(p) = best {
                    spki = 0.25 * mwi[p] + 0.75 * spki;
                    thr1 = npki + 0.25 * (spki - npki);
                    last_slope = slope_at(p);
                    detected.push(p);
                    noise_since.clear();
                }
            }
        }
        let v = mwi[c];
        let mut is_qrs = v > thr1;
        if is_qrs {
            if let Some(&last) = detected.last() {
                if c <= last + refractory {
                    is_qrs = false;
                } else if ((c - last) as f64) < T_WAVE_S * rate && slope_at(c) < 0.5 * last_slope {
                    is_qrs = false;
                }
            }
        }
        if is_qrs {
            spki = 0.125 * v + 0.875 * spki;
            last_slope = slope_at(c);
            detected.push(c);
            noise_since.clear();
        } else {
            npki = 0.125 * v + 0.875 * npki;
            noise_since.push(c);
        }
        thr1 = npki + 0.25 * (spki - npki);
    }

    let h = (REFINE_S * rate).round() as usize;
    let mut peaks: Vec<usize> = Vec::with_capacity(detected.len());
    for &d in &detected {
        let lo = d.saturating_sub(h);
        let hi = (d + h + 1).min(n);
        let mut best = lo;
        for i in lo..hi {
            if bp[i] > bp[best] {
                best = i;
            }
        }
        if peaks.last().is_none_or(|&p| best > p) {
            peaks.push(best);
        }
    }
    let hr_flagged = peaks
        .windows(2)
        .map(|w| {
            let bpm = 60.0 * rate / (w[1] - w[0]) as f64;
            !(30.0..=200.0).contains(&bpm)
        })
        .collect();
    Ok(RPeaks { peaks, hr_flagged })
}

fn centred_mean(x: &[f64], w: usize) -> Vec<f64> {
    let n = x.len();
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + x[i];
    }
    let half = w / 2;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + w - half).min(n);
            (prefix[hi] - prefix[lo]) / w as f64
        })
        .collect()
}

fn local_maxima(x: &[f64]) -> Vec<usize> {
    (1..x.len().saturating_sub(1)).filter(|&i| x[i] > x[i - 1] && x[i] >= x[i + 1] && x[i] > 0.0).collect()
}

/// Collapses maxima closer than `gap` samples to the largest one.
fn merge_within(idx: &[usize], x: &[f64], gap: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(idx.len());
    for &i in idx {
        match out.last_mut() {
            Some(last) if i - *last < gap => {
                if x[i] > x[*last] {
                    *last = i;
                }
            }
            _ => out.push(i),
        }
    }
    out
}
