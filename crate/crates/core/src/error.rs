use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // --- storage / interchange
    #[error("meta incomplete: {0}")]
    MetaIncomplete(String),
    #[error("bad magic in {0}")]
    BadMagic(PathBuf),
    #[error("format version mismatch: expected {expected}, found {found}")]
    VersionMismatch { expected: u32, found: u32 },
    #[error("truncated blob: {0}")]
    TruncatedBlob(String),
    #[error("dim disagreement: manifest expects {expected} samples, blob holds {found}")]
    DimDisagreement { expected: usize, found: usize },
    #[error("directory locked by another writer: {0}")]
    Locked(PathBuf),
    #[error("invalid tensor: {0}")]
    InvalidTensor(String),
    #[error("invalid metadata: {0}")]
    InvalidMeta(String),
    #[error("io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    // --- preprocessing
    #[error("cutoff ≥ Nyquist: {cutoff} Hz at {rate} Hz sampling")]
    CutoffAboveNyquist { cutoff: f64, rate: f64 },
    #[error("invalid filter: {0}")]
    InvalidFilter(String),
    #[error("signal too short: {0}")]
    SignalTooShort(String),
    #[error("flat signal (zero variance)")]
    FlatSignal,
    #[error("< 3 peaks: got {0}")]
    TooFewPeaks(usize),
    #[error("event_onsets not increasing")]
    EventsNotIncreasing,
    #[error("baseline window outside epoch: {0}")]
    BaselineOutsideEpoch(String),
    #[error("limit > 0 required, got {0}")]
    InvalidLimit(f64),
    #[error("zero variance")]
    ZeroVariance,

    // --- features
    #[error("too few intervals: need {needed}, got {got}")]
    TooFewIntervals { needed: usize, got: usize },
    #[error("series shorter than window: {len} intervals < window {window}")]
    ShorterThanWindow { len: usize, window: usize },
    #[error("too short: catch22 needs at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("non-finite input")]
    NonFinite,
    #[error("epoch too short: {0}")]
    EpochTooShort(String),
    #[error("rate too low: {0}")]
    RateTooLow(String),
    #[error("empty tensor")]
    EmptyTensor,

    // --- synthetic generation
    #[error("non-positive rate: {0}")]
    NonPositiveRate(String),
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("targets > 0 required")]
    NonPositiveTargets,
    #[error("targets unreachable: best achieved sd1 = {best_sd1:.3} ms, sd2 = {best_sd2:.3} ms (c_s = {c_s:.5}, c_v = {c_v:.5})")]
    TargetsUnreachable { best_sd1: f64, best_sd2: f64, c_s: f64, c_v: f64 },

    // --- learning
    #[error("single-class target")]
    SingleClass,
    #[error("NaN features")]
    NanFeatures,
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("minority class too small: {0}")]
    MinorityTooSmall(String),
    #[error("k too large: {0}")]
    KTooLarge(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("unknown label: {0}")]
    UnknownLabel(usize),
    #[error("class count < k: {0}")]
    ClassCountBelowK(String),
    #[error("degenerate groups: {0}")]
    DegenerateGroups(String),
    #[error("model format: {0}")]
    ModelFormat(String),

    // --- cross-modal / grid
    #[error("alignment failure: unmatched keys {0:?}")]
    AlignmentFailure(Vec<String>),
    #[error("too few pairs: need {needed}, got {got}")]
    TooFewPairs { needed: usize, got: usize },
    #[error("name mismatch: expected {expected:?}, got {got:?}")]
    NameMismatch { expected: Vec<String>, got: Vec<String> },
    #[error("missing tables: {0:?}")]
    MissingTables(Vec<PathBuf>),
}

impl Error {
    /// Bad configuration or arguments, as opposed to bad data.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::InvalidParams(_)
                | Error::InvalidFilter(_)
                | Error::CutoffAboveNyquist { .. }
                | Error::InvalidLimit(_)
                | Error::BaselineOutsideEpoch(_)
                | Error::MissingTables(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
