use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const BAND_NAMES: [&str; 5] = ["delta", "theta", "alpha", "beta", "gamma"];
/// Half-open `[lo, hi)` band edges, Hz.
pub const BANDS: [(f64, f64); 5] = [(1.0, 4.0), (4.0, 8.0), (8.0, 13.0), (13.0, 30.0), (30.0, 40.0)];
const SEGMENT_S: f64 = 2.0;
const MIN_RATE_HZ: f64 = 80.0;

/// Absolute and relative band power per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct BandPowerVector<T: Scalar> {
    /// `absolute[ch][band]`, signal unit² (power spectral density integrated over Hz).
    pub absolute: Vec<[T; 5]>,
    /// `absolute / total(1–40 Hz)`.
    pub relative: Vec<[T; 5]>,
}

/// One-sided Welch density estimate: periodic Hann window, constant
/// detrend, `nperseg` samples per segment, 50% overlap.
pub fn welch_psd<T: Scalar>(x: &[T], rate: f64, nperseg: usize) -> Result<(Vec<f64>, Vec<T>)> {
    if nperseg < 2 || x.len() < nperseg {
        return Err(Error::EpochTooShort(format!("{} samples, one segment needs {nperseg}", x.len())));
    }
    let step = nperseg - nperseg / 2;
    let two_pi = T::TAU();
    let n_t = T::from_usize_lossy(nperseg);
    let win: Vec<T> =
        (0..nperseg).map(|i| T::lit(0.5) - T::lit(0.5) * (two_pi * T::from_usize_lossy(i) / n_t).cos()).collect();
    let wss = win.iter().fold(T::zero(), |a, &w| a + w * w);
    let scale = T::one() / (T::lit(rate) * wss);
    let fft = FftPlanner::<T>::new().plan_fft_forward(nperseg);
    let n_bins = nperseg / 2 + 1;
    let mut acc = vec![T::zero(); n_bins];
    let mut n_seg = 0usize;
    let mut buf = vec![Complex::new(T::zero(), T::zero()); nperseg];
    let mut start = 0;
    while start + nperseg <= x.len() {
        let seg = &x[start..start + nperseg];
        let m = seg.iter().fold(T::zero(), |a, &v| a + v) / n_t;
        for (b, (&v, &w)) in buf.iter_mut().zip(seg.iter().zip(&win)) {
            *b = Complex::new((v - m) * w, T::zero());
        }
        fft.process(&mut buf);
        for (a, c) in acc.iter_mut().zip(&buf[..n_bins]) {
            *a = *a + c.norm_sqr() * scale;
        }
        n_seg += 1;
        start += step;
    }
    let k = T::from_usize_lossy(n_seg);
    let last = n_bins - 1;
    let psd: Vec<T> = acc
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let one_sided = i != 0 && !(nperseg % 2 == 0 && i == last);
            let v = v / k;
            if one_sided {
                v * T::lit(2.0)
            } else {
                v
            }
        })
        .collect();
    let freqs = (0..n_bins).map(|i| i as f64 * rate / nperseg as f64).collect();
    Ok((freqs, psd))
}

/// Band power of each channel (each slice is one channel's valid samples).
pub fn compute_band_power<T: Scalar>(channels: &[&[T]], rate: f64) -> Result<BandPowerVector<T>> {
    if rate <= MIN_RATE_HZ {
        return Err(Error::RateTooLow(format!(
            "band power up to 40 Hz needs a rate above {MIN_RATE_HZ} Hz, got {rate}"
        )));
    }
    if channels.is_empty() {
        return Err(Error::EmptyTensor);
    }
    let nperseg = (SEGMENT_S * rate).round() as usize;
    let mut absolute = Vec::with_capacity(channels.len());
    let mut relative = Vec::with_capacity(channels.len());
    for x in channels {
        if x.len() < nperseg {
            return Err(Error::EpochTooShort(format!(
                "{} samples < {SEGMENT_S} s segment ({nperseg} samples)",
                x.len()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let (freqs, psd) = welch_psd(x, rate, nperseg)?;
        let df = T::lit(rate / nperseg as f64);
        let mut abs = [T::zero(); 5];
        for (b, &(lo, hi)) in BANDS.iter().enumerate() {
            abs[b] =
                freqs.iter().zip(&psd).filter(|(&f, _)| f >= lo && f < hi).fold(T::zero(), |a, (_, &p)| a + p) * df;
        }
        let total = abs.iter().fold(T::zero(), |a, &v| a + v);
        let rel = abs.map(|v| v / total);
        absolute.push(abs);
        relative.push(rel);
    }
    Ok(BandPowerVector { absolute, relative })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tone(f: f64, rate: f64, secs: f64) -> Vec<f64> {
        (0..(rate * secs) as usize).map(|i| (2.0 * PI * f * i as f64 / rate).sin()).collect()
    }

    #[test]
    fn alpha_tone() {
        let x = tone(10.0, 250.0, 10.0);
        let bp = compute_band_power(&[&x], 250.0).unwrap();
        assert!(bp.relative[0][2] >= 0.95, "{:?}", bp.relative);
    }

    #[test]
    fn theta_tone() {
        let x = tone(6.0, 250.0, 10.0);
        let bp = compute_band_power(&[&x], 250.0).unwrap();
        assert!(bp.relative[0][1] >= 0.95, "{:?}", bp.relative);
    }

    #[test]
    fn short_epoch() {
        let x = tone(10.0, 250.0, 1.0);
        let err = compute_band_power(&[&x], 250.0).unwrap_err();
        assert!(err.to_string().contains("epoch too short"));
    }

    #[test]
    fn low_rate() {
        let x = tone(10.0, 64.0, 10.0);
        assert!(matches!(compute_band_power(&[&x], 64.0), Err(Error::RateTooLow(_))));
    }

    // Parseval: a unit sine has variance ½, so the integrated density of a
    // tone well inside a band is close to ½.
    #[test]
    fn tone_power_parseval() {
        let x = tone(20.0, 250.0, 20.0);
        let bp = compute_band_power(&[&x], 250.0).unwrap();
        assert!((bp.absolute[0][3] - 0.5).abs() < 1e-3, "{}", bp.absolute[0][3]);
    }

    #[test]
    fn relative_sums_to_one() {
        let x: Vec<f64> = (0..2500).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        let bp = compute_band_power(&[&x], 250.0).unwrap();
        let s: f64 = bp.relative[0].iter().sum();
        assert!((s - 1.0).abs() < 1e-9);
    }
}
