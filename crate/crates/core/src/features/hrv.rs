use crate::error::{Error, Result};
use crate::preprocess::RrSeries;
use crate::scalar::{mean, sample_sd, Scalar};

/// Column names of the HRV feature set, in table order.
pub const HRV_NAMES: [&str; 5] = ["meanNN", "SDNN", "RMSSD", "SD1", "SD2"];

/// Time-domain and Poincaré descriptors of one RR series, milliseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HrvFeatures<T: Scalar> {
    pub mean_nn: T,
    pub sdnn: T,
    pub rmssd: T,
    pub sd1: T,
    pub sd2: T,
    /// The SD2 radicand was negative and has been clamped to 0.
    pub sd2_clamped: bool,
}

impl<T: Scalar> HrvFeatures<T> {
    /// `½·sd(IBI′)²`, the squared short-term dispersion.
    pub fn sd1_squared(&self) -> T {
        self.sd1 * self.sd1
    }

    /// `2·sd(IBI)² − ½·sd(IBI′)²`, clamped at 0.
    pub fn sd2_squared(&self) -> T {
        self.sd2 * self.sd2
    }

    /// Values in [`HRV_NAMES`] order.
    pub fn to_array(&self) -> [T; 5] {
        [self.mean_nn, self.sdnn, self.rmssd, self.sd1, self.sd2]
    }
}

/// HRV features over the plausible intervals of `rr`.
///
/// Successive differences are taken only between neighbouring intervals that
/// are both plausible. Standard deviations use the n − 1 divisor.
pub fn compute_hrv<T: Scalar>(rr: &RrSeries<T>) -> Result<HrvFeatures<T>> {
    let ibi: Vec<T> = rr.intervals.iter().zip(&rr.plausible).filter(|(_, &ok)| ok).map(|(&v, _)| v).collect();
    let dibi: Vec<T> = (0..rr.intervals.len().saturating_sub(1))
        .filter(|&k| rr.plausible[k] && rr.plausible[k + 1])
        .map(|k| rr.intervals[k + 1] - rr.intervals[k])
        .collect();
    if ibi.len() < 3 || dibi.len() < 2 {
        return Err(Error::TooFewIntervals { needed: 3, got: ibi.len().min(dibi.len() + 1) });
    }
    hrv_from_parts(&ibi, &dibi)
}

fn hrv_from_parts<T: Scalar>(ibi: &[T], dibi: &[T]) -> Result<HrvFeatures<T>> {
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let mean_nn = mean(ibi);
    let sdnn = sample_sd(ibi);
    let sd_d = sample_sd(dibi);
    let ms = dibi.iter().fold(T::zero(), |a, &d| a + d * d) / T::from_usize_lossy(dibi.len());
    let sd1_sq = half * sd_d * sd_d;
    let rad = two * sdnn * sdnn - sd1_sq;
    let sd2_clamped = rad < T::zero();
    if sd2_clamped {
        log::warn!("SD2 radicand {rad} < 0 clamped to 0");
    }
    Ok(HrvFeatures { mean_nn, sdnn, rmssd: ms.sqrt(), sd1: sd1_sq.sqrt(), sd2: rad.max(T::zero()).sqrt(), sd2_clamped })
}

/// Sliding-window Poincaré descriptors.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedPoincare<T: Scalar> {
    /// Intervals per window.
    pub window_beats: usize,
    /// Index of the centre interval of each window.
    pub centers: Vec<usize>,
    pub sd1_t: Vec<T>,
    pub sd2_t: Vec<T>,
}

impl<T: Scalar> WindowedPoincare<T> {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Medians of `sd1_t` and `sd2_t`, ignoring NaN windows.
    pub fn median_pair(&self) -> Option<(T, T)> {
        Some((median(&self.sd1_t)?, median(&self.sd2_t)?))
    }
}

fn median<T: Scalar>(x: &[T]) -> Option<T> {
    let mut v: Vec<T> = x.iter().copied().filter(|v| !v.is_nan()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0) })
}

/// SD1/SD2 over every window of `window_beats` consecutive intervals, stride 1.
///
/// Window `k` equals [`compute_hrv`] on intervals `k..k + window_beats`; a
/// window without enough plausible intervals yields NaN.
pub fn compute_windowed_poincare<T: Scalar>(rr: &RrSeries<T>, window_beats: usize) -> Result<WindowedPoincare<T>> {
    if window_beats < 3 {
        return Err(Error::InvalidParams(format!("window_beats must be ≥ 3, got {window_beats}")));
    }
    if rr.len() < window_beats {
        return Err(Error::ShorterThanWindow { len: rr.len(), window: window_beats });
    }
    let n_win = rr.len() - window_beats + 1;
    let mut out = WindowedPoincare {
        window_beats,
        centers: Vec::with_capacity(n_win),
        sd1_t: Vec::with_capacity(n_win),
        sd2_t: Vec::with_capacity(n_win),
    };
    for k in 0..n_win {
        let (s1, s2) = match compute_hrv(&rr.window(k, window_beats)) {
            Ok(h) => (h.sd1, h.sd2),
            Err(_) => (T::nan(), T::nan()),
        };
        out.centers.push(k + window_beats / 2);
        out.sd1_t.push(s1);
        out.sd2_t.push(s2);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rr(v: &[f64]) -> RrSeries<f64> {
        RrSeries::from_intervals(v.to_vec()).unwrap()
    }

    #[test]
    fn constant_series() {
        let h = compute_hrv(&rr(&[800.0; 4])).unwrap();
        assert_eq!(h.to_array(), [800.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(!h.sd2_clamped);
    }

    // Expected values from a direct numpy evaluation of the formulas (ddof=1).
    // This series has 2·sd(IBI)² < ½·sd(IBI′)², so the SD2 radicand is
    // negative: the clamp engages and the sd1² + sd2² = 2·sdnn² identity
    // cannot hold.
    #[test]
    fn alternating_series_clamps() {
        let h = compute_hrv(&rr(&[800.0, 810.0, 790.0, 805.0, 795.0])).unwrap();
        assert_eq!(h.mean_nn, 800.0);
        assert!((h.sdnn - 7.905694150420948).abs() < 1e-12);
        assert!((h.rmssd - 14.361406616345072).abs() < 1e-12);
        assert!((h.sd1 - 11.681538140730156).abs() < 1e-12);
        assert_eq!(h.sd2, 0.0);
        assert!(h.sd2_clamped);
        assert!(h.sd1_squared() + h.sd2_squared() > 2.0 * h.sdnn * h.sdnn);
    }

    #[test]
    fn identity_on_smooth_series() {
        let v: Vec<f64> = (0..50).map(|k| 850.0 + 40.0 * (k as f64 * 0.4).sin()).collect();
        let h = compute_hrv(&rr(&v)).unwrap();
        let lhs = h.sd1_squared() + h.sd2_squared();
        let rhs = 2.0 * h.sdnn * h.sdnn;
        assert!(((lhs - rhs) / rhs).abs() < 1e-12);
    }

    #[test]
    fn too_few() {
        let err = compute_hrv(&rr(&[800.0, 800.0])).unwrap_err();
        assert!(err.to_string().contains("too few intervals"));
    }

    #[test]
    fn flagged_intervals_skipped() {
        let mut series = rr(&[800.0, 820.0, 250.0, 810.0, 790.0, 800.0]);
        assert!(!series.plausible[2]);
        let h = compute_hrv(&series).unwrap();
        let clean = [800.0, 820.0, 810.0, 790.0, 800.0];
        assert!((h.mean_nn - clean.iter().sum::<f64>() / 5.0).abs() < 1e-12);
        // diffs: 820−800, 790−810, 800−790
        let d = [20.0f64, -20.0, 10.0];
        let rms = (d.iter().map(|x| x * x).sum::<f64>() / 3.0).sqrt();
        assert!((h.rmssd - rms).abs() < 1e-12);
        series.plausible = vec![false; 6];
        assert!(compute_hrv(&series).is_err());
    }

    #[test]
    fn windowed_constant() {
        let w = compute_windowed_poincare(&rr(&[800.0; 39]), 30).unwrap();
        assert_eq!(w.len(), 10);
        assert!(w.sd1_t.iter().chain(&w.sd2_t).all(|&v| v == 0.0));
    }

    #[test]
    fn windowed_too_short() {
        assert!(matches!(
            compute_windowed_poincare(&rr(&[800.0; 29]), 30),
            Err(Error::ShorterThanWindow { len: 29, window: 30 })
        ));
    }

    #[test]
    fn windowed_matches_per_window() {
        let v: Vec<f64> =
            (0..60).map(|k| 900.0 + 35.0 * (k as f64 * 0.7).sin() + 12.0 * (k as f64 * 2.3).cos()).collect();
        let series = rr(&v);
        let w = compute_windowed_poincare(&series, 30).unwrap();
        for k in 0..w.len() {
            let h = compute_hrv(&rr(&v[k..k + 30])).unwrap();
            assert_eq!(w.sd1_t[k], h.sd1);
            assert_eq!(w.sd2_t[k], h.sd2);
        }
        assert_eq!(w.centers[0], 15);
    }

    #[test]
    fn median_pair_odd_even() {
        let w = WindowedPoincare {
            window_beats: 3,
            centers: vec![1, 2, 3, 4],
            sd1_t: vec![1.0f64, 4.0, 2.0, f64::NAN],
            sd2_t: vec![1.0, 2.0, 3.0, 4.0],
        };
        assert_eq!(w.median_pair(), Some((2.0, 2.5)));
    }
}
