//! The `sonarsim` command line: `simulate`, `gen-dataset`, `evaluate` and
//! `render`.
//!
//! Physics lives in the TOML config (see [`crate::config`]); flags carry only
//! run-scoped values. Exit codes: 0 success, 1 runtime failure, 2 usage or
//! configuration error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::dataset::{Corpus, CorpusBuilder, DatasetManifest, Split};
use crate::image::{f32_from_le_bytes, f32_to_le_bytes, render_comparison, GrayImage};
use crate::mask::Mask;
use crate::metrics::{binarize, evaluate, IouMode, MetricsReport, DEFAULT_THRESHOLD};
use crate::scenegen::{generate_scene, rasterize, SceneSpec};
use crate::wavesim::{simulate_with, snapshot, Cell, SnapshotFormat};

#[derive(Debug, Parser)]
#[command(
    name = "sonarsim",
    version,
    about = "Acoustic FDTD simulation and obstacle-mask corpora"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one scene and write its receiver gather.
    Simulate(SimulateArgs),
    /// Generate a corpus of (gather, mask) samples.
    GenDataset(GenDatasetArgs),
    /// Score prediction files against a corpus.
    Evaluate(EvaluateArgs),
    /// Render a target/prediction pair side by side.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// TOML run configuration; production defaults when omitted.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<RunConfig, CliError> {
        match &self.config {
            Some(path) => RunConfig::load(path).map_err(|source| CliError::Config {
                path: path.clone(),
                source,
            }),
            None => Ok(RunConfig::default()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SnapshotKind {
    Pgm,
    F32,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Generate the scene from this seed.
    #[arg(long, conflicts_with = "scene", required_unless_present = "scene")]
    pub seed: Option<u64>,
    /// Simulate the scene in this JSON file.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Write a wavefield snapshot every this many timesteps.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub snapshot_every: Option<u64>,
    #[arg(long, value_enum, default_value = "pgm")]
    pub snapshot_format: SnapshotKind,
}

#[derive(Debug, Args)]
pub struct GenDatasetArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// Number of samples.
    #[arg(long)]
    pub n: usize,
    /// Sample `i` uses seed `base_seed + i`.
    #[arg(long, default_value_t = 0)]
    pub base_seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; overrides the config.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
    /// Suppress per-sample progress lines.
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Directory of `sample-NNNNNN.f32` probability maps, one per corpus index.
    #[arg(long)]
    pub pred_dir: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum, default_value = "foreground")]
    pub mode: IouMode,
    /// Samples to score; all when omitted.
    #[arg(long, value_enum)]
    pub split: Option<Split>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f32,
    /// Report file (JSON).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Target mask or field: `.pgm`, `.f32` (raw floats) or raw 0/1 bytes.
    #[arg(long)]
    pub target: PathBuf,
    /// Prediction, same formats as the target.
    #[arg(long)]
    pub pred: PathBuf,
    /// Output image; `.ppm` for colour PPM, anything else PGM.
    #[arg(long)]
    pub out: PathBuf,
    /// Width of headerless inputs.
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    /// Height of headerless inputs.
    #[arg(long, default_value_t = 256)]
    pub height: usize,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}", config_message(.path, .source))]
    Config { path: PathBuf, source: ConfigError },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config { .. } | Self::Usage(_) => 2,
            Self::Runtime(_) => 1,
        }
    }
}

fn config_message(path: &Path, e: &ConfigError) -> String {
    match e {
        ConfigError::Read { .. } => e.to_string(),
        _ => format!("{}: {e}", path.display()),
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Runtime(format!("{}: {e}", path.display()))
}

/// File name of the prediction for corpus sample `index`.
pub fn prediction_file_name(index: usize) -> String {
    format!("sample-{index:06}.f32")
}

pub fn run() -> ExitCode {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::GenDataset(a) => cmd_gen_dataset(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Render(a) => cmd_render(&a),
    }
}

#[derive(Serialize)]
struct GatherInfo<'a> {
    file: &'a str,
    dtype: &'a str,
    shape: [usize; 2],
    record_start: usize,
    receivers: &'a [Cell],
    dt: f64,
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let cfg = a.config.load()?;
    let scene = match (&a.scene, a.seed) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let scene = SceneSpec::from_json(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            scene
                .validate(&cfg.scene)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            scene
        }
        (None, Some(seed)) => generate_scene(seed, &cfg.scene),
        (None, None) => unreachable!("clap requires --seed or --scene"),
    };
    let (model, target) = rasterize(&scene, &cfg.scene).map_err(runtime)?;

    let format = match a.snapshot_format {
        SnapshotKind::Pgm => SnapshotFormat::Pgm,
        SnapshotKind::F32 => SnapshotFormat::RawF32,
    };
    let every = a.snapshot_every.map(|k| k as usize);
    let mut snapshots = Vec::new();
    let gather = simulate_with(
        &model,
        &cfg.grid,
        &cfg.source,
        &cfg.receivers,
        |n, state| {
            if every.is_some_and(|k| n % k == 0) {
                snapshots.push(snapshot(state, n));
            }
        },
    )
    .map_err(runtime)?;

    let out = &a.out;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let write = |name: &str, bytes: &[u8]| {
        let path = out.join(name);
        fs::write(&path, bytes).map_err(io_err(&path))
    };
    write("gather.f32", &f32_to_le_bytes(gather.samples()))?;
    let info = GatherInfo {
        file: "gather.f32",
        dtype: "float32-le",
        shape: [gather.n_rows(), gather.n_receivers()],
        record_start: gather.record_start(),
        receivers: cfg.receivers.positions(),
        dt: cfg.grid.dt,
    };
    let info = serde_json::to_string_pretty(&info).expect("gather info serializes");
    write("gather.json", format!("{info}\n").as_bytes())?;
    write(
        "scene.json",
        format!("{}\n", scene.to_json_line()).as_bytes(),
    )?;
    write("target.pgm", &mask_image(&target).to_pgm())?;
    if !snapshots.is_empty() {
        let dir = out.join("snapshots");
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        let ext = match format {
            SnapshotFormat::Pgm => "pgm",
            SnapshotFormat::RawF32 => "f32",
        };
        for snap in &snapshots {
            let path = dir.join(format!("step-{:06}.{ext}", snap.timestep));
            fs::write(&path, snap.encode(format)).map_err(io_err(&path))?;
        }
    }
    println!(
        "seed {} with {} objects: {}x{} gather, max |p| {:e}, {} snapshots -> {}",
        scene.seed,
        scene.n_objects,
        gather.n_rows(),
        gather.n_receivers(),
        gather.max_abs(),
        snapshots.len(),
        out.display()
    );
    Ok(())
}

fn mask_image(mask: &Mask) -> GrayImage {
    GrayImage {
        width: mask.width(),
        height: mask.height(),
        pixels: mask.as_bytes().iter().map(|&b| b * 255).collect(),
    }
}

pub fn cmd_gen_dataset(a: &GenDatasetArgs) -> Result<(), CliError> {
    let cfg = a.config.load()?;
    let workers = a.workers.map_or(cfg.output.workers, |w| w as usize);
    let quiet = a.quiet;
    let manifest = CorpusBuilder::new(cfg.dataset(), &a.out)
        .samples(a.n)
        .base_seed(a.base_seed)
        .workers(workers)
        .samples_per_shard(cfg.output.samples_per_shard)
        .on_progress(move |done, total, meta| {
            if !quiet {
                eprintln!(
                    "[{done}/{total}] seed {} ({} objects)",
                    meta.seed, meta.scene.n_objects
                );
            }
        })
        .build()
        .map_err(runtime)?;
    let c = manifest.split_counts;
    println!(
        "{} samples ({} train, {} val, {} test) -> {}",
        manifest.n_samples,
        c.train,
        c.val,
        c.test,
        a.out.display()
    );
    Ok(())
}

/// Report file of `evaluate`.
#[derive(Debug, Serialize)]
pub struct EvaluationReport {
    pub split: Option<Split>,
    pub threshold: f32,
    #[serde(flatten)]
    pub metrics: MetricsReport,
}

fn missing_predictions(dir: &Path, indices: &[usize]) -> Vec<usize> {
    indices
        .iter()
        .copied()
        .filter(|&i| !dir.join(prediction_file_name(i)).is_file())
        .collect()
}

fn format_ids(ids: &[usize]) -> String {
    const SHOWN: usize = 20;
    let mut s: Vec<String> = ids.iter().take(SHOWN).map(|i| i.to_string()).collect();
    if ids.len() > SHOWN {
        s.push(format!("... ({} more)", ids.len() - SHOWN));
    }
    s.join(", ")
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&a.threshold) {
        return Err(CliError::Usage(format!(
            "threshold {} is outside [0, 1]",
            a.threshold
        )));
    }
    let corpus = Corpus::open(&a.corpus).map_err(runtime)?;
    let manifest: &DatasetManifest = corpus.manifest();
    let indices = manifest.indices(a.split);
    if indices.is_empty() {
        return Err(runtime("no samples to evaluate"));
    }
    let missing = missing_predictions(&a.pred_dir, &indices);
    if !missing.is_empty() {
        return Err(CliError::Runtime(format!(
            "{} predictions missing from {}: samples {}",
            missing.len(),
            a.pred_dir.display(),
            format_ids(&missing)
        )));
    }
    let [h, w] = manifest.target.shape;
    let mut pairs = Vec::with_capacity(indices.len());
    for &i in &indices {
        let path = a.pred_dir.join(prediction_file_name(i));
        let bytes = fs::read(&path).map_err(io_err(&path))?;
        let probs = f32_from_le_bytes(&bytes).map_err(io_err(&path))?;
        let pred = binarize(&probs, w, h, a.threshold)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        let target = corpus.read_sample(i).map_err(runtime)?.target;
        pairs.push((pred, target));
    }
    let metrics = evaluate(&pairs, a.mode).map_err(runtime)?;
    let report = EvaluationReport {
        split: a.split,
        threshold: a.threshold,
        metrics,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    fs::write(&a.out, format!("{json}\n")).map_err(io_err(&a.out))?;
    let m = &report.metrics;
    let opt = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.4}"));
    println!("samples      {}", m.n_samples);
    println!("accuracy     {:.4}", m.accuracy);
    println!("precision    {}", opt(m.precision));
    println!("sensitivity  {}", opt(m.sensitivity));
    println!("specificity  {}", opt(m.specificity));
    println!("iou          {:.4} ({:?})", m.iou, m.mode);
    Ok(())
}

/// Loads a panel as `(width, height, values)`.
fn load_panel(
    path: &Path,
    width: usize,
    height: usize,
) -> Result<(usize, usize, Vec<f32>), CliError> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let bad = |m: String| CliError::Runtime(format!("{}: {m}", path.display()));
    match ext.as_deref() {
        Some("pgm") => {
            let img = GrayImage::from_pgm(&bytes).map_err(|e| bad(e.to_string()))?;
            let values = img.pixels.iter().map(|&p| p as f32 / 255.0).collect();
            Ok((img.width, img.height, values))
        }
        Some("f32") => {
            let values = f32_from_le_bytes(&bytes).map_err(|e| bad(e.to_string()))?;
            if values.len() != width * height {
                return Err(bad(format!(
                    "{} floats for a {width}x{height} panel",
                    values.len()
                )));
            }
            Ok((width, height, values))
        }
        _ => {
            let mask = Mask::from_bits(width, height, bytes).map_err(bad)?;
            Ok((width, height, mask.to_f32()))
        }
    }
}

pub fn cmd_render(a: &RenderArgs) -> Result<(), CliError> {
    let (tw, th, target) = load_panel(&a.target, a.width, a.height)?;
    let (pw, ph, pred) = load_panel(&a.pred, a.width, a.height)?;
    if (tw, th) != (pw, ph) {
        return Err(runtime(format!(
            "shape mismatch: target is {tw}x{th}, prediction is {pw}x{ph}"
        )));
    }
    let img = render_comparison(tw, th, &target, &pred);
    img.save(&a.out).map_err(io_err(&a.out))?;
    println!(
        "{}x{} comparison -> {}",
        img.width,
        img.height,
        a.out.display()
    );
    Ok(())
}
