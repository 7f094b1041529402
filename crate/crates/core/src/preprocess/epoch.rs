use crate::data::{take_cells, SignalTensor, Unit};
use crate::error::{Error, Result};
use crate::scalar::{mean, sample_sd, Scalar};

/// Epoch window relative to each event onset, seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochSpec<T: Scalar> {
    /// Pre-stimulus start, negative.
    pub t_min: T,
    /// Default end; an [`Event`] may override it.
    pub t_max: T,
    /// `(start, end)` inside the pre-stimulus interval.
    pub baseline: (T, T),
}

impl<T: Scalar> EpochSpec<T> {
    pub fn new(t_min: T, t_max: T, baseline: (T, T)) -> Result<Self> {
        let s = Self { t_min, t_max, baseline };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let z = T::zero();
        if !(self.t_min < z && self.t_max > z) {
            return Err(Error::InvalidParams(format!(
                "epoch needs t_min < 0 < t_max, got ({}, {})",
                self.t_min, self.t_max
            )));
        }
        if !(self.baseline.0 < self.baseline.1 && self.baseline.1 <= z) {
            return Err(Error::InvalidParams(format!(
                "baseline window ({}, {}) must be non-empty and end at or before 0",
                self.baseline.0, self.baseline.1
            )));
        }
        Ok(())
    }
}

/// One event; `t_max` overrides the spec for ragged trial ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event<T: Scalar> {
    pub onset: T,
    pub t_max: Option<T>,
}

impl<T: Scalar> Event<T> {
    pub fn at(onset: T) -> Self {
        Self { onset, t_max: None }
    }
}

/// Cuts one epoch per event from a continuous multichannel recording.
///
/// Returns a `[trial, channel, time]` tensor (time spans `t_min` to the
/// largest `t_max`) and the indices of the events that produced epochs.
/// Events whose window leaves the recording are dropped with a warning.
pub fn epoch_signal<T: Scalar>(
    channels: &[&[T]],
    events: &[Event<T>],
    spec: &EpochSpec<T>,
    rate: f64,
    unit: Unit,
) -> Result<(SignalTensor<T>, Vec<usize>)> {
    let (trials, kept) = cut(channels, events, spec, rate)?;
    if trials.is_empty() {
        let n = ((spec.t_max - spec.t_min).as_f64() * rate).round() as usize;
        return Ok((SignalTensor::empty(Some(channels.len()), n, rate, unit)?, kept));
    }
    Ok((SignalTensor::from_trials(&trials, rate, unit, true)?, kept))
}

/// Single-channel form of [`epoch_signal`] producing a `[trial, time]` tensor.
pub fn epoch_single<T: Scalar>(
    signal: &[T],
    events: &[Event<T>],
    spec: &EpochSpec<T>,
    rate: f64,
    unit: Unit,
) -> Result<(SignalTensor<T>, Vec<usize>)> {
    let (trials, kept) = cut(&[signal], events, spec, rate)?;
    if trials.is_empty() {
        let n = ((spec.t_max - spec.t_min).as_f64() * rate).round() as usize;
        return Ok((SignalTensor::empty(None, n, rate, unit)?, kept));
    }
    Ok((SignalTensor::from_trials(&trials, rate, unit, false)?, kept))
}

#[allow(clippy::type_complexity)]
fn cut<T: Scalar>(
    channels: &[&[T]],
    events: &[Event<T>],
    spec: &EpochSpec<T>,
    rate: f64,
) -> Result<(Vec<Vec<Vec<T>>>, Vec<usize>)> {
    spec.validate()?;
    if channels.is_empty() {
        return Err(Error::EmptyTensor);
    }
    let len = channels[0].len();
    if channels.iter().any(|c| c.len() != len) {
        return Err(Error::InvalidTensor("channels differ in length".into()));
    }
    if events.windows(2).any(|w| !(w[1].onset > w[0].onset)) {
        return Err(Error::EventsNotIncreasing);
    }
    let mut trials = Vec::new();
    let mut kept = Vec::new();
    for (i, ev) in events.iter().enumerate() {
        let t_max = ev.t_max.unwrap_or(spec.t_max);
        if !(t_max > T::zero()) {
            return Err(Error::InvalidParams(format!("event {i}: t_max must be > 0")));
        }
        let start = ((ev.onset + spec.t_min).as_f64() * rate).round();
        let n = ((t_max - spec.t_min).as_f64() * rate).round();
        if start < 0.0 || start + n > len as f64 {
            log::warn!("epoch {i} at onset {} s leaves the recording ({} samples); dropped", ev.onset, len);
            continue;
        }
        let (s, n) = (start as usize, n as usize);
        trials.push(channels.iter().map(|c| c[s..s + n].to_vec()).collect());
        kept.push(i);
    }
    Ok((trials, kept))
}

/// Sample range `[i0, i1)` of the baseline window in an epoch starting at `t_min`.
fn baseline_range<T: Scalar>(spec: &EpochSpec<T>, rate: f64) -> Result<(usize, usize)> {
    let (b0, b1) = (spec.baseline.0.as_f64(), spec.baseline.1.as_f64());
    let t_min = spec.t_min.as_f64();
    if b0 < t_min - 1e-9 || b1 > spec.t_max.as_f64() || !(b0 < b1) {
        return Err(Error::BaselineOutsideEpoch(format!("({b0}, {b1}) with epoch starting at {t_min}")));
    }
    let i0 = ((b0 - t_min) * rate).round() as usize;
    let i1 = ((b1 - t_min) * rate).round() as usize;
    if i1 <= i0 {
        return Err(Error::BaselineOutsideEpoch(format!("({b0}, {b1}) covers no samples at {rate} Hz")));
    }
    Ok((i0, i1))
}

/// Subtracts the baseline-window mean from every epoch and channel.
pub fn baseline_correct<T: Scalar>(epochs: &SignalTensor<T>, spec: &EpochSpec<T>) -> Result<SignalTensor<T>> {
    let (i0, i1) = baseline_range(spec, epochs.sampling_rate())?;
    map_channels(epochs, |c, x| {
        if i1 > x.len() {
            return Err(Error::BaselineOutsideEpoch(format!(
                "window ends at sample {i1}, trial {c} holds {}",
                x.len()
            )));
        }
        let m = mean(&x[i0..i1]);
        Ok(x.iter().map(|&v| v - m).collect())
    })
}

/// Drops every epoch whose peak-to-peak range exceeds `limit` on any channel.
///
/// Returns the surviving epochs (flattened to `[trial, (channel), time]`) and
/// the rejected cell indices.
pub fn reject_artifacts<T: Scalar>(epochs: &SignalTensor<T>, limit: T) -> Result<(SignalTensor<T>, Vec<usize>)> {
    if !(limit > T::zero()) || !limit.is_finite() {
        return Err(Error::InvalidLimit(limit.as_f64()));
    }
    let mut keep = Vec::new();
    let mut rejected = Vec::new();
    for c in 0..epochs.n_cells() {
        let bad = epochs.cell_channels(c).iter().any(|x| {
            let (lo, hi) = x.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
            !x.is_empty() && hi - lo > limit
        });
        if bad {
            rejected.push(c);
        } else {
            keep.push(c);
        }
    }
    Ok((take_cells(epochs, &keep)?, rejected))
}

/// Z-scores the first `valid_length` samples with the sample standard
/// deviation; later positions come back as NaN padding.
pub fn zscore_normalize<T: Scalar>(samples: &[T], valid_length: usize) -> Result<Vec<T>> {
    if valid_length < 2 || valid_length > samples.len() {
        return Err(Error::SignalTooShort(format!(
            "z-scoring needs 2 ≤ valid_length ≤ {}, got {valid_length}",
            samples.len()
        )));
    }
    let x = &samples[..valid_length];
    let m = mean(x);
    let sd = sample_sd(x);
    if !(sd > T::zero()) {
        return Err(Error::ZeroVariance);
    }
    let mut out: Vec<T> = x.iter().map(|&v| (v - m) / sd).collect();
    out.resize(samples.len(), T::nan());
    Ok(out)
}

/// Applies [`zscore_normalize`] to every channel of every epoch.
pub fn zscore_tensor<T: Scalar>(epochs: &SignalTensor<T>) -> Result<SignalTensor<T>> {
    map_channels(epochs, |_, x| {
        let mut v = zscore_normalize(x, x.len())?;
        v.truncate(x.len());
        Ok(v)
    })
}

/// Subtracts the cross-channel mean at every sample.
pub fn average_reference<T: Scalar>(channels: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let Some(first) = channels.first() else {
        return Err(Error::EmptyTensor);
    };
    let n = first.len();
    if channels.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidTensor("channels differ in length".into()));
    }
    let k = T::from_usize_lossy(channels.len());
    let avg: Vec<T> = (0..n).map(|i| channels.iter().fold(T::zero(), |a, c| a + c[i]) / k).collect();
    Ok(channels.iter().map(|c| c.iter().zip(&avg).map(|(&v, &a)| v - a).collect()).collect())
}

/// Rebuilds a tensor by transforming each valid channel run.
pub(crate) fn map_channels<T: Scalar, F>(t: &SignalTensor<T>, f: F) -> Result<SignalTensor<T>>
where
    F: Fn(usize, &[T]) -> Result<Vec<T>>,
{
    let n_t = t.n_times();
    let mut samples = Vec::with_capacity(t.samples().len());
    for c in 0..t.n_cells() {
        for x in t.cell_channels(c) {
            let y = f(c, x)?;
            debug_assert_eq!(y.len(), x.len());
            samples.extend_from_slice(&y);
            samples.extend(std::iter::repeat(T::nan()).take(n_t - y.len()));
        }
    }
    SignalTensor::new(t.dims().to_vec(), samples, t.sampling_rate(), t.valid_length().to_vec(), t.unit())
}
