use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bhi_core::features::FeatureMode;
use bhi_core::ml::{ClassifierKind, Task};
use bhi_core::pipeline::{self, PipelineConfig, RunRecorder};
use bhi_core::Error;
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "bhi", version, about = "Brain-heart feature pipeline")]
struct Cli {
    /// TOML pipeline config; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Global seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Log more (repeat for debug output).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct IoArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    #[arg(long)]
    task: Option<Task>,
    #[arg(long)]
    classifier: Option<ClassifierKind>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Filter, baseline-correct and artifact-reject epoched trials (BHIX → BHIX).
    Preprocess(IoArgs),
    /// Per-trial feature table (BHIX → CSV).
    Extract {
        #[command(flatten)]
        io: IoArgs,
        #[arg(long)]
        mode: Option<FeatureMode>,
    },
    /// Synthetic RR trials from a spec CSV, or derive that CSV from real trials.
    Synth {
        /// Spec CSV to read (with --out) or to write (with --in).
        #[arg(long)]
        spec: PathBuf,
        /// Output BHIX directory of synthetic RR intervals.
        #[arg(long, conflicts_with = "input", required_unless_present = "input")]
        out: Option<PathBuf>,
        /// Real ECG or RR tensor to derive specs from.
        #[arg(long = "in")]
        input: Option<PathBuf>,
    },
    /// Cross-validate a classifier on a feature table and fit it on all rows.
    Train {
        #[command(flatten)]
        io: IoArgs,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// HRV → EEG-feature regression evaluated through an EEG classifier.
    Crossmodal {
        #[arg(long)]
        hrv: Option<PathBuf>,
        #[arg(long)]
        eeg: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Feature set × task × classifier grid from the config's [grid] section.
    Grid {
        #[arg(long)]
        out: PathBuf,
    },
    /// Markdown summary and confusion-matrix SVGs for a result directory.
    Report(IoArgs),
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Preprocess(_) => "preprocess",
            Cmd::Extract { .. } => "extract",
            Cmd::Synth { .. } => "synth",
            Cmd::Train { .. } => "train",
            Cmd::Crossmodal { .. } => "crossmodal",
            Cmd::Grid { .. } => "grid",
            Cmd::Report(_) => "report",
        }
    }
}

enum Failure {
    Validation(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Data(e.to_string())
        }
    }
}

fn require(flag: &str, p: &Path) -> Result<(), Failure> {
    if p.exists() {
        Ok(())
    } else {
        Err(Failure::Validation(format!("--{flag}: {} does not exist", p.display())))
    }
}

fn apply_model(cfg: &mut PipelineConfig, m: &ModelArgs) {
    if let Some(t) = m.task {
        cfg.train.task = t;
    }
    if let Some(c) = m.classifier {
        cfg.train.classifier = c;
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    match &cli.cmd {
        Cmd::Extract { mode: Some(m), .. } => cfg.extract.mode = *m,
        Cmd::Train { model, .. } | Cmd::Crossmodal { model, .. } => apply_model(&mut cfg, model),
        _ => {}
    }
    if let Cmd::Crossmodal { hrv, eeg, .. } = &cli.cmd {
        if let Some(h) = hrv {
            cfg.crossmodal.hrv = Some(h.clone());
        }
        if let Some(e) = eeg {
            cfg.crossmodal.eeg = Some(e.clone());
        }
    }
    cfg.validate()?;
    if cfg.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build_global()
            .map_err(|e| Failure::Validation(format!("--jobs: {e}")))?;
    }

    let name = cli.cmd.name();
    let mut rec = RunRecorder::new(name, cfg.seed, &cfg)?;
    let (outputs, out) = match &cli.cmd {
        Cmd::Preprocess(io) => {
            require("in", &io.input)?;
            rec.input(&io.input);
            (rec.time(name, || pipeline::run_preprocess(&cfg, &io.input, &io.out))?, io.out.clone())
        }
        Cmd::Extract { io, .. } => {
            require("in", &io.input)?;
            rec.input(&io.input);
            let mode = cfg.extract.mode;
            (rec.time(name, || pipeline::run_extract(&cfg, &io.input, mode, &io.out))?, io.out.clone())
        }
        Cmd::Synth { spec, out, input } => match (input, out) {
            (Some(i), _) => {
                require("in", i)?;
                rec.input(i);
                (rec.time(name, || pipeline::run_derive_specs(&cfg, i, spec))?, spec.clone())
            }
            (None, Some(o)) => {
                require("spec", spec)?;
                rec.input(spec);
                (rec.time(name, || pipeline::run_synth(&cfg, spec, o))?, o.clone())
            }
            (None, None) => return Err(Failure::Validation("synth: --out or --in is required".into())),
        },
        Cmd::Train { io, .. } => {
            require("in", &io.input)?;
            rec.input(&io.input);
            (rec.time(name, || pipeline::run_train(&cfg, &io.input, &io.out))?, io.out.clone())
        }
        Cmd::Crossmodal { out, .. } => {
            let h = cfg
                .crossmodal
                .hrv
                .clone()
                .ok_or_else(|| Failure::Validation("--hrv (or crossmodal.hrv) is required".into()))?;
            let e = cfg
                .crossmodal
                .eeg
                .clone()
                .ok_or_else(|| Failure::Validation("--eeg (or crossmodal.eeg) is required".into()))?;
            require("hrv", &h)?;
            require("eeg", &e)?;
            rec.input(&h);
            rec.input(&e);
            (rec.time(name, || pipeline::run_crossmodal(&cfg, &h, &e, out))?, out.clone())
        }
        Cmd::Grid { out } => {
            if cli.config.is_none() {
                return Err(Failure::Validation("grid: --config with a [grid] section is required".into()));
            }
            for fs in &cfg.grid.feature_sets {
                for t in &fs.tables {
                    rec.input(t);
                }
            }
            let g = pipeline::grid_from_config(&cfg)?;
            let missing: Vec<PathBuf> =
                g.feature_sets.iter().flat_map(|f| f.tables.iter()).filter(|p| !p.is_file()).cloned().collect();
            if !missing.is_empty() {
                return Err(Error::MissingTables(missing).into());
            }
            (rec.time(name, || pipeline::run_grid(&cfg, out))?, out.clone())
        }
        Cmd::Report(io) => {
            require("in", &io.input)?;
            (rec.time(name, || pipeline::run_report(&io.input, &io.out))?, io.out.clone())
        }
    };
    rec.finish(&outputs, &out)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
