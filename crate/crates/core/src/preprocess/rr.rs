use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Physiological bounds on a single RR interval, milliseconds.
pub const RR_MIN_MS: f64 = 300.0;
pub const RR_MAX_MS: f64 = 2000.0;

/// Beat times with their inter-beat intervals.
///
/// Implausible intervals are kept and flagged; HRV statistics skip them.
#[derive(Debug, Clone, PartialEq)]
pub struct RrSeries<T: Scalar> {
    /// Seconds, strictly increasing.
    pub beat_times: Vec<T>,
    /// Milliseconds.
    pub intervals: Vec<T>,
    /// Successive differences of `intervals`, milliseconds.
    pub diff_intervals: Vec<T>,
    /// Per interval: inside `[RR_MIN_MS, RR_MAX_MS]`.
    pub plausible: Vec<bool>,
}

impl<T: Scalar> RrSeries<T> {
    /// Builds the series from beat times in seconds.
    pub fn from_beat_times(beat_times: Vec<T>) -> Result<Self> {
        if beat_times.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite);
        }
        if beat_times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParams("beat times must be strictly increasing".into()));
        }
        let k = T::lit(1000.0);
        let intervals = beat_times.windows(2).map(|w| (w[1] - w[0]) * k).collect();
        Ok(Self::assemble(beat_times, intervals))
    }

    /// Builds the series from intervals in milliseconds; the first beat sits at 0 s.
    pub fn from_intervals(intervals: Vec<T>) -> Result<Self> {
        if intervals.iter().any(|v| !v.is_finite() || *v <= T::zero()) {
            return Err(Error::InvalidParams("intervals must be finite and > 0".into()));
        }
        let k = T::lit(1000.0);
        let mut beat_times = Vec::with_capacity(intervals.len() + 1);
        let mut t = T::zero();
        beat_times.push(t);
        for &iv in &intervals {
            t = t + iv / k;
            beat_times.push(t);
        }
        Ok(Self::assemble(beat_times, intervals))
    }

    fn assemble(beat_times: Vec<T>, intervals: Vec<T>) -> Self {
        let diff_intervals = intervals.windows(2).map(|w: &[T]| w[1] - w[0]).collect();
        let (lo, hi) = (T::lit(RR_MIN_MS), T::lit(RR_MAX_MS));
        let plausible = intervals.iter().map(|&v| v >= lo && v <= hi).collect();
        Self { beat_times, intervals, diff_intervals, plausible }
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Intervals `[start, start + n)` as their own series.
    pub fn window(&self, start: usize, n: usize) -> Self {
        Self {
            beat_times: self.beat_times[start..start + n + 1].to_vec(),
            intervals: self.intervals[start..start + n].to_vec(),
            diff_intervals: self.diff_intervals[start..start + n - 1].to_vec(),
            plausible: self.plausible[start..start + n].to_vec(),
        }
    }
}

/// Converts R-peak sample indices into an [`RrSeries`].
pub fn extract_rr<T: Scalar>(peaks: &[usize], rate: f64) -> Result<RrSeries<T>> {
    if peaks.len() < 3 {
        return Err(Error::TooFewPeaks(peaks.len()));
    }
    if !(rate > 0.0) {
        return Err(Error::InvalidParams(format!("rate must be > 0, got {rate}")));
    }
    let times = peaks.iter().map(|&p| T::lit(p as f64 / rate)).collect();
    let mut rr = RrSeries::from_beat_times(times)?;
    // Exact interval values from integer sample gaps rather than from rounded times.
    rr.intervals = peaks.windows(2).map(|w| T::lit((w[1] - w[0]) as f64 * 1000.0 / rate)).collect();
    Ok(RrSeries::assemble(rr.beat_times, rr.intervals))
}
