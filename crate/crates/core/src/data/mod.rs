//! Trial-organized tensors, their on-disk form, and label bookkeeping.

mod bhix;
mod meta;
mod select;
mod table;
mod tensor;

pub use bhix::{read_tensor, write_tensor, BLOB_FILE, FORMAT_VERSION, MAGIC, MANIFEST_FILE};
pub use meta::{validate_meta, Condition, Subcondition, TrialKey, TrialMeta};
pub use select::select_trials;
pub(crate) use select::take_cells;
pub use table::{FeatureTable, KEY_COLUMNS};
pub use tensor::{Axis, SignalTensor, Unit};
