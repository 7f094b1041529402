use super::meta::TrialMeta;
use super::tensor::{Axis, SignalTensor};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Keeps the trial cells whose metadata satisfies `pred`.
///
/// The trial axes of the input are flattened into one `trial` axis so any
/// subset can be represented; channel and time axes keep their order and
/// extents. An empty selection yields a zero-trial tensor.
pub fn select_trials<T: Scalar, F>(
    tensor: &SignalTensor<T>,
    meta: &[TrialMeta],
    pred: F,
) -> Result<(SignalTensor<T>, Vec<TrialMeta>)>
where
    F: Fn(&TrialMeta) -> bool,
{
    if meta.len() != tensor.n_cells() {
        return Err(Error::MetaIncomplete(format!(
            "{} metadata records for {} trial cells",
            meta.len(),
            tensor.n_cells()
        )));
    }
    let keep: Vec<usize> = (0..meta.len()).filter(|&i| pred(&meta[i])).collect();
    let t = take_cells(tensor, &keep)?;
    Ok((t, keep.iter().map(|&i| meta[i].clone()).collect()))
}

/// Gathers the listed cells, in the given order, into a flat trial tensor.
pub(crate) fn take_cells<T: Scalar>(tensor: &SignalTensor<T>, cells: &[usize]) -> Result<SignalTensor<T>> {
    let n_ch = tensor.n_channels();
    let n_t = tensor.n_times();
    let stride = n_ch * n_t;
    let mut samples = Vec::with_capacity(cells.len() * stride);
    let mut valid = Vec::with_capacity(cells.len());
    for &c in cells {
        samples.extend_from_slice(&tensor.samples()[c * stride..(c + 1) * stride]);
        valid.push(tensor.valid_length()[c]);
    }
    let mut dims = vec![(Axis::Trial, cells.len())];
    if tensor.has_channel_axis() {
        dims.push((Axis::Channel, n_ch));
    }
    dims.push((Axis::Time, n_t));
    SignalTensor::new(dims, samples, tensor.sampling_rate(), valid, tensor.unit())
}
