use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const RUN_MANIFEST_FILE: &str = "run_manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Provenance record written next to every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub started_unix_s: f64,
    /// Wall-clock seconds per stage.
    pub timings: BTreeMap<String, f64>,
}

/// SHA-256 of a file, or of a directory's files (sorted relative paths and
/// contents; lock files and run manifests excluded).
pub fn digest_path(path: &Path) -> Result<String> {
    let mut h = Sha256::new();
    if path.is_dir() {
        let mut files = Vec::new();
        collect(path, path, &mut files)?;
        files.sort();
        for rel in files {
            let p = path.join(&rel);
            h.update(rel.to_string_lossy().as_bytes());
            h.update([0u8]);
            h.update(std::fs::read(&p).map_err(|e| Error::io(&p, e))?);
        }
    } else {
        h.update(std::fs::read(path).map_err(|e| Error::io(path, e))?);
    }
    Ok(hex::encode(h.finalize()))
}

fn collect(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let p = entry.path();
        let name = entry.file_name();
        if name == RUN_MANIFEST_FILE || name == ".bhix.lock" {
            continue;
        }
        if p.is_dir() {
            collect(root, &p, out)?;
        } else if let Ok(rel) = p.strip_prefix(root) {
            out.push(rel.to_path_buf());
        }
    }
    Ok(())
}

/// Collects timings and file digests for one command.
pub struct RunRecorder {
    command: String,
    seed: u64,
    config: serde_json::Value,
    started: SystemTime,
    clock: Instant,
    timings: BTreeMap<String, f64>,
    inputs: Vec<PathBuf>,
}

impl RunRecorder {
    pub fn new<C: Serialize>(command: &str, seed: u64, config: &C) -> Result<Self> {
        Ok(RunRecorder {
            command: command.to_string(),
            seed,
            config: serde_json::to_value(config)?,
            started: SystemTime::now(),
            clock: Instant::now(),
            timings: BTreeMap::new(),
            inputs: Vec::new(),
        })
    }

    pub fn input(&mut self, p: impl Into<PathBuf>) {
        self.inputs.push(p.into());
    }

    /// Runs `f` and records its duration under `stage`.
    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t0 = Instant::now();
        let r = f();
        *self.timings.entry(stage.to_string()).or_insert(0.0) += t0.elapsed().as_secs_f64();
        r
    }

    /// Writes the manifest into `out` when it is a directory, else beside
    /// it as `<out>.run.json`.
    pub fn finish(mut self, outputs: &[PathBuf], out: &Path) -> Result<RunManifest> {
        self.timings.insert("total".into(), self.clock.elapsed().as_secs_f64());
        let config_text = serde_json::to_string(&self.config)?;
        let digest = |ps: &[PathBuf]| -> Result<Vec<FileDigest>> {
            ps.iter().map(|p| Ok(FileDigest { path: p.clone(), sha256: digest_path(p)? })).collect()
        };
        let m = RunManifest {
            tool: "bhi".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command,
            seed: self.seed,
            config_sha256: hex::encode(Sha256::digest(config_text.as_bytes())),
            config: self.config,
            inputs: digest(&self.inputs)?,
            outputs: digest(outputs)?,
            started_unix_s: self.started.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0),
            timings: self.timings,
        };
        let target = if out.is_dir() {
            out.join(RUN_MANIFEST_FILE)
        } else {
            let mut s = out.as_os_str().to_owned();
            s.push(".run.json");
            PathBuf::from(s)
        };
        let text = serde_json::to_string_pretty(&m)? + "\n";
        std::fs::write(&target, text).map_err(|e| Error::io(&target, e))?;
        Ok(m)
    }
}
