use std::fs::{self, File, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::meta::{validate_meta, TrialMeta};
use super::tensor::{check_dims, Axis, SignalTensor, Unit};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 8] = b"BHIX0001";
pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";
pub const BLOB_FILE: &str = "data.bhix";
const LOCK_FILE: &str = ".bhix.lock";

#[derive(Debug, Serialize, Deserialize)]
struct AxisEntry {
    name: Axis,
    extent: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    axes: Vec<AxisEntry>,
    sampling_rate: f64,
    unit: Unit,
    valid_length: Vec<usize>,
    trials: Vec<TrialMeta>,
}

struct DirLock(PathBuf);

impl DirLock {
    fn acquire(dir: &Path) -> Result<Self> {
        let p = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&p) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(DirLock(p))
            }
            Err(e) if e.kind() == ErrorKind::AlreadyExists => Err(Error::Locked(dir.to_path_buf())),
            Err(e) => Err(Error::io(p, e)),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.0);
    }
}

/// Writes `tensor` and its per-cell metadata as a BHIX v1 directory.
///
/// Samples are stored as little-endian `f32`; `meta[i]` describes cell `i`.
pub fn write_tensor<T: Scalar>(tensor: &SignalTensor<T>, meta: &[TrialMeta], path: impl AsRef<Path>) -> Result<()> {
    let dir = path.as_ref();
    if meta.len() != tensor.n_cells() {
        return Err(Error::MetaIncomplete(format!(
            "{} metadata records for {} trial cells",
            meta.len(),
            tensor.n_cells()
        )));
    }
    validate_meta(meta)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let _lock = DirLock::acquire(dir)?;

    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        axes: tensor.dims().iter().map(|&(name, extent)| AxisEntry { name, extent }).collect(),
        sampling_rate: tensor.sampling_rate(),
        unit: tensor.unit(),
        valid_length: tensor.valid_length().to_vec(),
        trials: meta.to_vec(),
    };
    let mp = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&mp, text).map_err(|e| Error::io(&mp, e))?;

    let mut blob = Vec::with_capacity(MAGIC.len() + 4 * tensor.samples().len());
    blob.extend_from_slice(MAGIC);
    for &v in tensor.samples() {
        let x = v.to_f32().unwrap_or(f32::NAN);
        // One NaN bit pattern keeps blobs byte-comparable.
        let x = if x.is_nan() { f32::NAN } else { x };
        blob.extend_from_slice(&x.to_le_bytes());
    }
    let bp = dir.join(BLOB_FILE);
    let mut f = File::create(&bp).map_err(|e| Error::io(&bp, e))?;
    f.write_all(&blob).map_err(|e| Error::io(&bp, e))?;
    f.sync_all().map_err(|e| Error::io(&bp, e))?;
    Ok(())
}

/// Reads a BHIX v1 directory written by [`write_tensor`].
pub fn read_tensor(path: impl AsRef<Path>) -> Result<(SignalTensor<f32>, Vec<TrialMeta>)> {
    let dir = path.as_ref();
    let mp = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&mp).map_err(|e| Error::io(&mp, e))?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::VersionMismatch { expected: FORMAT_VERSION, found: manifest.format_version });
    }
    let dims: Vec<(Axis, usize)> = manifest.axes.iter().map(|a| (a.name, a.extent)).collect();
    check_dims(&dims)?;

    let bp = dir.join(BLOB_FILE);
    let blob = fs::read(&bp).map_err(|e| Error::io(&bp, e))?;
    if blob.len() < MAGIC.len() {
        return Err(Error::TruncatedBlob(format!("{} bytes, header needs 8", blob.len())));
    }
    if &blob[..MAGIC.len()] != MAGIC {
        return Err(Error::BadMagic(bp));
    }
    let body = &blob[MAGIC.len()..];
    if body.len() % 4 != 0 {
        return Err(Error::TruncatedBlob(format!("{} payload bytes is not a whole number of f32 values", body.len())));
    }
    let expected: usize = dims.iter().map(|d| d.1).product();
    let found = body.len() / 4;
    if found != expected {
        return Err(Error::DimDisagreement { expected, found });
    }
    let samples: Vec<f32> = body.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
    let tensor = SignalTensor::new(dims, samples, manifest.sampling_rate, manifest.valid_length, manifest.unit)?;
    if manifest.trials.len() != tensor.n_cells() {
        return Err(Error::MetaIncomplete(format!(
            "{} metadata records for {} trial cells",
            manifest.trials.len(),
            tensor.n_cells()
        )));
    }
    validate_meta(&manifest.trials)?;
    Ok((tensor, manifest.trials))
}
