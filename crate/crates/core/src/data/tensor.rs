use std::fmt;

use num_traits::NumCast;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Subject,
    Condition,
    Subcondition,
    Trial,
    Channel,
    Time,
}

impl Axis {
    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Subject => "subject",
            Axis::Condition => "condition",
            Axis::Subcondition => "subcondition",
            Axis::Trial => "trial",
            Axis::Channel => "channel",
            Axis::Time => "time",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    Microvolt,
    Millivolt,
    Dimensionless,
    /// RR-interval series, time axis is beat index.
    Millisecond,
}

/// Trial-organized sample array.
///
/// The time axis is last and the channel axis, when present, sits right
/// before it. Every other axis indexes trials; their row-major product is the
/// "cell" index used for `valid_length` and for the metadata list. Samples at
/// or beyond a cell's valid length hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalTensor<T: Scalar> {
    dims: Vec<(Axis, usize)>,
    samples: Vec<T>,
    sampling_rate: f64,
    valid_length: Vec<usize>,
    unit: Unit,
}

impl<T: Scalar> SignalTensor<T> {
    /// Validates layout and overwrites every padded position with NaN.
    pub fn new(
        dims: Vec<(Axis, usize)>,
        mut samples: Vec<T>,
        sampling_rate: f64,
        valid_length: Vec<usize>,
        unit: Unit,
    ) -> Result<Self> {
        check_dims(&dims)?;
        if !(sampling_rate > 0.0) || !sampling_rate.is_finite() {
            return Err(Error::InvalidTensor(format!("sampling_rate must be > 0, got {sampling_rate}")));
        }
        let total: usize = dims.iter().map(|d| d.1).product();
        if samples.len() != total {
            return Err(Error::InvalidTensor(format!("{} samples for dims of {} elements", samples.len(), total)));
        }
        let n_time = dims.last().map(|d| d.1).unwrap_or(0);
        let n_ch = channel_extent(&dims);
        let n_cells = if n_time * n_ch == 0 { 0 } else { total / (n_time * n_ch) };
        if valid_length.len() != n_cells {
            return Err(Error::InvalidTensor(format!(
                "{} valid_length entries for {} trial cells",
                valid_length.len(),
                n_cells
            )));
        }
        for (c, &vl) in valid_length.iter().enumerate() {
            if vl > n_time {
                return Err(Error::InvalidTensor(format!(
                    "valid_length {vl} of cell {c} exceeds time extent {n_time}"
                )));
            }
            for ch in 0..n_ch {
                let base = (c * n_ch + ch) * n_time;
                for s in &mut samples[base + vl..base + n_time] {
                    *s = T::nan();
                }
            }
        }
        Ok(Self { dims, samples, sampling_rate, valid_length, unit })
    }

    /// Builds a `[trial, (channel), time]` tensor from ragged per-trial data,
    /// padding each trial to the longest one.
    ///
    /// `trials[c][ch]` is the sample run of channel `ch` in trial `c`; all
    /// channels of a trial must share one length. When `with_channel_axis` is
    /// false every trial must carry exactly one channel.
    pub fn from_trials(
        trials: &[Vec<Vec<T>>],
        sampling_rate: f64,
        unit: Unit,
        with_channel_axis: bool,
    ) -> Result<Self> {
        let n_ch = trials.first().map(|t| t.len()).unwrap_or(1);
        let n_time = trials.iter().flat_map(|t| t.iter().map(|c| c.len())).max().unwrap_or(0).max(1);
        if !with_channel_axis && n_ch != 1 {
            return Err(Error::InvalidTensor("multiple channels given without a channel axis".into()));
        }
        let mut samples = Vec::with_capacity(trials.len() * n_ch * n_time);
        let mut valid = Vec::with_capacity(trials.len());
        for (i, t) in trials.iter().enumerate() {
            if t.len() != n_ch || n_ch == 0 {
                return Err(Error::InvalidTensor(format!("trial {i} has {} channels, expected {n_ch}", t.len())));
            }
            let len = t[0].len();
            if t.iter().any(|c| c.len() != len) {
                return Err(Error::InvalidTensor(format!("trial {i} has channels of unequal length")));
            }
            for c in t {
                samples.extend_from_slice(c);
                samples.extend(std::iter::repeat(T::nan()).take(n_time - len));
            }
            valid.push(len);
        }
        let mut dims = vec![(Axis::Trial, trials.len())];
        if with_channel_axis {
            dims.push((Axis::Channel, n_ch));
        }
        dims.push((Axis::Time, n_time));
        Self::new(dims, samples, sampling_rate, valid, unit)
    }

    /// Tensor with zero trials; `n_channels` of `None` omits the channel axis.
    pub fn empty(n_channels: Option<usize>, n_time: usize, sampling_rate: f64, unit: Unit) -> Result<Self> {
        let mut dims = vec![(Axis::Trial, 0)];
        if let Some(c) = n_channels {
            dims.push((Axis::Channel, c));
        }
        dims.push((Axis::Time, n_time.max(1)));
        Self::new(dims, Vec::new(), sampling_rate, Vec::new(), unit)
    }

    pub fn dims(&self) -> &[(Axis, usize)] {
        &self.dims
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn sampling_rate(&self) -> f64 {
        self.sampling_rate
    }

    pub fn valid_length(&self) -> &[usize] {
        &self.valid_length
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn has_channel_axis(&self) -> bool {
        self.dims.iter().any(|d| d.0 == Axis::Channel)
    }

    pub fn n_channels(&self) -> usize {
        channel_extent(&self.dims)
    }

    pub fn n_times(&self) -> usize {
        self.dims.last().map(|d| d.1).unwrap_or(0)
    }

    pub fn n_cells(&self) -> usize {
        self.valid_length.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_cells() == 0
    }

    /// Extents of the trial axes (everything except channel and time).
    pub fn trial_dims(&self) -> Vec<(Axis, usize)> {
        self.dims.iter().copied().filter(|d| d.0 != Axis::Channel && d.0 != Axis::Time).collect()
    }

    /// Valid samples of one channel in one cell.
    pub fn channel(&self, cell: usize, ch: usize) -> &[T] {
        let t = self.n_times();
        let base = (cell * self.n_channels() + ch) * t;
        &self.samples[base..base + self.valid_length[cell]]
    }

    /// Valid samples of every channel in one cell.
    pub fn cell_channels(&self, cell: usize) -> Vec<&[T]> {
        (0..self.n_channels()).map(|ch| self.channel(cell, ch)).collect()
    }

    /// Copies valid data out as `cell → channel → samples`.
    pub fn to_trials(&self) -> Vec<Vec<Vec<T>>> {
        (0..self.n_cells()).map(|c| self.cell_channels(c).into_iter().map(|s| s.to_vec()).collect()).collect()
    }

    /// Element-wise precision change; padding stays NaN.
    pub fn cast<U: Scalar>(&self) -> SignalTensor<U> {
        SignalTensor {
            dims: self.dims.clone(),
            samples: self.samples.iter().map(|&v| <U as NumCast>::from(v).unwrap_or_else(U::nan)).collect(),
            sampling_rate: self.sampling_rate,
            valid_length: self.valid_length.clone(),
            unit: self.unit,
        }
    }
}

fn channel_extent(dims: &[(Axis, usize)]) -> usize {
    dims.iter().find(|d| d.0 == Axis::Channel).map(|d| d.1).unwrap_or(1)
}

pub(crate) fn check_dims(dims: &[(Axis, usize)]) -> Result<()> {
    let Some(&(last, n_time)) = dims.last() else {
        return Err(Error::InvalidTensor("no axes".into()));
    };
    if last != Axis::Time {
        return Err(Error::InvalidTensor("time must be the last axis".into()));
    }
    if n_time == 0 {
        return Err(Error::InvalidTensor("time extent must be ≥ 1".into()));
    }
    for (i, (a, _)) in dims.iter().enumerate() {
        if dims[..i].iter().any(|(b, _)| b == a) {
            return Err(Error::InvalidTensor(format!("axis {a} repeated")));
        }
        if *a == Axis::Channel && i + 2 != dims.len() {
            return Err(Error::InvalidTensor("channel axis must directly precede time".into()));
        }
    }
    if let Some(&(_, 0)) = dims.iter().find(|d| d.0 == Axis::Channel) {
        return Err(Error::InvalidTensor("channel extent must be ≥ 1".into()));
    }
    Ok(())
}
