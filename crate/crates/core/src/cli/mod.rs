//! The `gfl` command-line tool.
//!
//! Exit codes: 0 on success, 1 for usage and configuration errors, 2 for
//! data errors (missing or malformed files, incompatible dimensions).

mod config;

pub use config::CliConfig;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::error::Error;
use crate::harness::{
    derived_seed, make_pair, optimize_direct, psnr, ssim, train_linear_restorer, Pair,
};
use crate::imagecore::{load_image, save_image, to_grayscale, Image};
use crate::loss::{gfl, GflParams, LossBreakdown};
use crate::pyramid::build_laplacian;
use crate::scheduler::{trace, AllocationMode, TraceRow};
use crate::spectral::{apply_highpass, highpass_mask, radial_power_spectrum, FrequencyMask};

pub const MANIFEST_NAME: &str = "run-manifest.json";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_data_error() {
            CliError::Data(e)
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(Error::Io(e))
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "gfl", version, about = "Guided frequency loss experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the loss breakdown `ch_c,pi_c,theta_c,total` for a restored/target pair.
    LossEval {
        restored: PathBuf,
        target: PathBuf,
        /// High-pass threshold for the Θ term; omitted means an empty band.
        #[arg(long)]
        mask_omega: Option<f64>,
        #[arg(long, default_value_t = crate::loss::DEFAULT_EPSILON)]
        epsilon: f64,
        /// Print the CSV header line first.
        #[arg(long)]
        header: bool,
    },
    /// Write the Laplacian pyramid levels of an image as PNGs.
    Pyramid {
        input: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Radially averaged power spectrum of the grayscale image, as CSV.
    AnalyzeSpectrum {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write the image restricted to frequencies above this radius.
        #[arg(long)]
        keep_above: Option<f64>,
        /// Where to write the filtered image (default: beside the CSV).
        #[arg(long, requires = "keep_above")]
        filtered_out: Option<PathBuf>,
    },
    /// Expand a band-allocation schedule to `epoch,omega,frozen` rows.
    ScheduleTrace {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Per-epoch loss values (dynamic mode), whitespace or comma separated.
        #[arg(long)]
        gfl: Option<PathBuf>,
    },
    /// Degrade an image for a restoration task.
    Degrade {
        input: PathBuf,
        #[arg(long)]
        task: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Restore an image by gradient descent on its pixels.
    Optimize {
        #[arg(long)]
        config: PathBuf,
    },
    /// Train a linear restoration filter on a corpus of clean images.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = 5)]
        kernel_size: usize,
    },
    /// Print `psnr,ssim` of two images.
    Metrics { a: PathBuf, b: PathBuf },
}

/// Runs the tool with explicit arguments (the first is the program name)
/// and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::LossEval {
            restored,
            target,
            mask_omega,
            epsilon,
            header,
        } => loss_eval(&restored, &target, mask_omega, epsilon, header),
        Command::Pyramid { input, depth, out } => pyramid(&input, depth, &out),
        Command::AnalyzeSpectrum {
            input,
            out,
            keep_above,
            filtered_out,
        } => analyze_spectrum(&input, &out, keep_above, filtered_out),
        Command::ScheduleTrace { config, out, gfl } => schedule_trace(&config, &out, gfl),
        Command::Degrade {
            input,
            task,
            seed,
            out,
        } => degrade(&input, &task, seed, &out),
        Command::Optimize { config } => optimize(&config),
        Command::Train {
            config,
            corpus,
            kernel_size,
        } => train(&config, &corpus, kernel_size),
        Command::Metrics { a, b } => metrics(&a, &b),
    }
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn ensure_parent(path: &Path) -> CliResult<()> {
    fs::create_dir_all(parent_dir(path))?;
    Ok(())
}

fn write_manifest(dir: &Path, manifest: serde_json::Value) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(dir.join(MANIFEST_NAME), text)?;
    Ok(())
}

/// Affine display mapping of all samples to `[0, 1]` (min→0, max→1).
fn display_normalize(img: &Image) -> Image {
    let lo = img.samples().fold(f64::INFINITY, f64::min);
    let hi = img.samples().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    img.map(|v| if span > 0.0 { (v - lo) / span } else { 0.0 })
        .expect("normalized samples are finite")
}

fn loss_eval(
    restored: &Path,
    target: &Path,
    mask_omega: Option<f64>,
    epsilon: f64,
    header: bool,
) -> CliResult<()> {
    let a = load_image(restored)?;
    let b = load_image(target)?;
    a.check_same_shape(&b)?;
    let mask = match mask_omega {
        Some(w) => highpass_mask(a.height(), a.width(), w)?,
        None => FrequencyMask::empty(a.height(), a.width()),
    };
    let breakdown = gfl(&a, &b, &GflParams::new(epsilon, mask)?)?;
    if header {
        println!("{}", LossBreakdown::CSV_HEADER);
    }
    println!("{}", breakdown.to_csv_row());
    Ok(())
}

fn pyramid(input: &Path, depth: usize, out: &Path) -> CliResult<()> {
    let img = load_image(input)?;
    let pyr = build_laplacian(&img, depth)?;
    fs::create_dir_all(out)?;
    for (n, level) in pyr.levels().iter().enumerate() {
        save_image(
            &display_normalize(level),
            out.join(format!("level_{n}.png")),
        )?;
    }
    save_image(pyr.base(), out.join("base.png"))?;
    write_manifest(
        out,
        json!({
            "command": "pyramid",
            "input": input,
            "depth": depth,
        }),
    )
}

fn analyze_spectrum(
    input: &Path,
    out: &Path,
    keep_above: Option<f64>,
    filtered_out: Option<PathBuf>,
) -> CliResult<()> {
    let img = load_image(input)?;
    let bins = radial_power_spectrum(&to_grayscale(&img))?;
    let mut csv = String::from("radius,power\n");
    for b in &bins {
        csv.push_str(&format!("{},{}\n", b.radius, b.power));
    }
    ensure_parent(out)?;
    fs::write(out, csv)?;

    let mut manifest = json!({
        "command": "analyze-spectrum",
        "input": input,
        "out": out,
    });
    if let Some(omega) = keep_above {
        let mask = highpass_mask(img.height(), img.width(), omega)?;
        let filtered = apply_highpass(&img, &mask)?;
        let path = filtered_out.unwrap_or_else(|| {
            let stem = out
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("spectrum");
            parent_dir(out).join(format!("{stem}_above_{omega}.png"))
        });
        ensure_parent(&path)?;
        save_image(&display_normalize(&filtered), &path)?;
        manifest["keep_above"] = json!(omega);
        manifest["filtered_out"] = json!(path);
    }
    write_manifest(&parent_dir(out), manifest)
}

fn parse_sequence(path: &Path) -> CliResult<Vec<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad loss value {t:?} in {}", path.display())))
        })
        .collect()
}

fn schedule_trace(config: &Path, out: &Path, gfl: Option<PathBuf>) -> CliResult<()> {
    let cfg = CliConfig::load(config)?;
    let schedule = cfg.schedule()?.clone();
    let sequence = match (&gfl, schedule.mode) {
        (Some(p), AllocationMode::Dynamic) => Some(parse_sequence(p)?),
        (None, AllocationMode::Dynamic) => {
            return Err(CliError::Usage("dynamic schedules need --gfl".into()))
        }
        (Some(_), AllocationMode::Static) => {
            return Err(CliError::Usage(
                "--gfl only applies to dynamic schedules".into(),
            ))
        }
        (None, AllocationMode::Static) => None,
    };
    let rows = trace(&schedule, sequence.as_deref())?;
    let mut csv = String::from(TraceRow::CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.to_csv_row());
        csv.push('\n');
    }
    ensure_parent(out)?;
    fs::write(out, csv)?;
    write_manifest(
        &parent_dir(out),
        json!({
            "command": "schedule-trace",
            "config": cfg,
            "gfl_sequence": sequence,
            "seed": cfg.seed,
        }),
    )
}

fn degrade(input: &Path, task: &str, seed: u64, out: &Path) -> CliResult<()> {
    let task = task
        .parse()
        .map_err(|e: Error| CliError::Usage(e.to_string()))?;
    let img = load_image(input)?;
    let pair = make_pair(&img, task, seed)?;
    ensure_parent(out)?;
    save_image(&pair.degraded, out)?;
    write_manifest(
        &parent_dir(out),
        json!({
            "command": "degrade",
            "input": input,
            "task": task,
            "seed": seed,
            "out": out,
        }),
    )
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("image")
        .to_string()
}

fn optimize(config: &Path) -> CliResult<()> {
    let cfg = CliConfig::load(config)?;
    let experiment = cfg.experiment()?;
    let input = cfg.input()?.to_path_buf();
    let out_dir = cfg.output_dir()?.to_path_buf();

    let img = load_image(&input)?;
    let pair = make_pair(&img, experiment.task, experiment.seed)?;
    let (restored, mut report) = optimize_direct(&pair, &experiment)?;
    for m in &mut report.per_image {
        m.name = file_stem(&input);
    }

    fs::create_dir_all(&out_dir)?;
    save_image(&pair.degraded, out_dir.join("degraded.png"))?;
    save_image(&restored, out_dir.join("restored.png"))?;
    fs::write(out_dir.join("history.csv"), report.history_csv())?;
    fs::write(
        out_dir.join("report.csv"),
        report.report_csv(experiment.loss),
    )?;
    write_manifest(
        &out_dir,
        json!({
            "command": "optimize",
            "config": cfg,
            "seed": experiment.seed,
            "omega_trace": report.omega_trace,
        }),
    )
}

fn corpus_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CliError::Data(Error::FileNotFound(dir.to_path_buf())),
        _ => CliError::from(e),
    })?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry?.path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase());
        if matches!(ext.as_deref(), Some("png" | "pgm" | "ppm")) {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(CliError::Data(Error::InvalidArgument(format!(
            "no images in {}",
            dir.display()
        ))));
    }
    Ok(files)
}

fn train(config: &Path, corpus_dir: &Path, kernel_size: usize) -> CliResult<()> {
    let cfg = CliConfig::load(config)?;
    let experiment = cfg.experiment()?;
    let out_dir = cfg.output_dir()?.to_path_buf();
    let files = corpus_files(corpus_dir)?;

    let corpus = files
        .iter()
        .enumerate()
        .map(|(i, path)| {
            let img = load_image(path)?;
            make_pair(&img, experiment.task, derived_seed(experiment.seed, i))
        })
        .collect::<Result<Vec<Pair>, Error>>()?;
    let (kernel, mut report) = train_linear_restorer(&corpus, &experiment, kernel_size)?;
    for m in &mut report.per_image {
        if let Some(path) = m.name.parse::<usize>().ok().and_then(|i| files.get(i)) {
            m.name = file_stem(path);
        }
    }

    fs::create_dir_all(&out_dir)?;
    let k = kernel.size();
    let kernel_csv: String = kernel
        .weights()
        .chunks(k)
        .map(|row| {
            let cells: Vec<String> = row.iter().map(|w| w.to_string()).collect();
            cells.join(",") + "\n"
        })
        .collect();
    fs::write(out_dir.join("kernel.csv"), kernel_csv)?;
    fs::write(out_dir.join("history.csv"), report.history_csv())?;
    fs::write(
        out_dir.join("report.csv"),
        report.report_csv(experiment.loss),
    )?;
    write_manifest(
        &out_dir,
        json!({
            "command": "train",
            "config": cfg,
            "seed": experiment.seed,
            "corpus": files,
            "kernel_size": kernel_size,
        }),
    )
}

fn metrics(a: &Path, b: &Path) -> CliResult<()> {
    let x = load_image(a)?;
    let y = load_image(b)?;
    println!("{:.6},{:.6}", psnr(&x, &y)?, ssim(&x, &y)?);
    Ok(())
}
