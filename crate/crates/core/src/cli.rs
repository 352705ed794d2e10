//! Command-line front end.
//!
//! ```text
//! andwp add-noise --in clean.pgm --out noisy.pgm --mask truth.pgm --p 0.4
//! andwp denoise   --in noisy.pgm --out restored.pgm --iterations 4 --threshold 510 --decay 0.8 --report r.json
//! andwp tune      --in noisy.pgm --reference clean.pgm --out restored.pgm --report trace.json
//! andwp evaluate  --clean c.pgm --noisy n.pgm --restored r.pgm --mask truth.pgm --report eval.json
//! andwp benchmark --clean c.pgm --csv table.csv --report bench.json
//! ```
//!
//! The seed comes from `--seed`, then `ANDWP_SEED`, then 0. Noise and swarm
//! draw from separate streams of that seed; benchmark row `i` uses
//! [`rng::derive_seed`]`(seed, i)`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{ImageError, ParamError, PsoError};
use crate::filter::{denoise, FilterParams, IterationStats};
use crate::image::{GrayImage, Mask};
use crate::metrics::{EvaluationReport, Psnr};
use crate::noise::{corrupt, ImpulseKind, NoiseSpec};
use crate::pgm::{read_pgm_file, write_pgm_file, PgmFormat};
use crate::pso::{tune, Position, SearchSpace, SwarmConfig};
use crate::rng;

pub const SEED_ENV: &str = "ANDWP_SEED";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        source: ImageError,
    },
    #[error(transparent)]
    Pso(#[from] PsoError),
    #[error(transparent)]
    Metrics(#[from] ImageError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Report(String),
}

#[derive(Debug, Parser)]
#[command(name = "andwp", version, about = "Random-valued impulse noise removal")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corrupt a clean image and write the ground-truth mask.
    AddNoise(AddNoiseArgs),
    /// Restore a noisy image with explicit parameters.
    Denoise(DenoiseArgs),
    /// Search parameters against a clean reference, then restore.
    Tune(TuneArgs),
    /// Score a restoration against ground truth.
    Evaluate(EvaluateArgs),
    /// Corrupt, tune and evaluate over a list of noise densities.
    Benchmark(BenchmarkArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Random,
    Fixed,
}

impl From<KindArg> for ImpulseKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Random => ImpulseKind::RandomValued,
            KindArg::Fixed => ImpulseKind::FixedValued,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    P5,
    P2,
}

impl From<FormatArg> for PgmFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::P5 => PgmFormat::P5,
            FormatArg::P2 => PgmFormat::P2,
        }
    }
}

#[derive(Debug, Args)]
struct SeedArg {
    /// Master seed (falls back to ANDWP_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
}

impl SeedArg {
    fn resolve(&self) -> Result<u64, CliError> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not a u64"))),
            Err(_) => Ok(0),
        }
    }
}

#[derive(Debug, Args)]
struct AddNoiseArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Ground-truth mask output ({0,255} P5).
    #[arg(long)]
    mask: PathBuf,
    /// Corruption probability in [0, 1].
    #[arg(long = "p")]
    probability: f64,
    #[arg(long, value_enum, default_value = "random")]
    kind: KindArg,
    #[arg(long, value_enum, default_value = "p5")]
    format: FormatArg,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Debug, Args)]
struct DenoiseArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    iterations: u32,
    #[arg(long)]
    threshold: f64,
    #[arg(long)]
    decay: f64,
    /// JSON report with per-iteration statistics.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Union of detection maps ({0,255} P5).
    #[arg(long)]
    detected: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "p5")]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct SwarmArgs {
    #[arg(long, default_value_t = 8)]
    swarm_size: usize,
    #[arg(long, default_value_t = 15)]
    max_iterations: usize,
    #[arg(long, default_value_t = 2.0)]
    cognitive: f64,
    #[arg(long, default_value_t = 2.0)]
    social: f64,
    #[arg(long, default_value_t = 0.4)]
    inertia_min: f64,
    #[arg(long, default_value_t = 0.9)]
    inertia_max: f64,
    /// Stop early once this PSNR (dB) is reached.
    #[arg(long)]
    target_db: Option<f64>,
    #[arg(long, default_value_t = 3.0)]
    i_min: f64,
    #[arg(long, default_value_t = 6.0)]
    i_max: f64,
    #[arg(long, default_value_t = 300.0)]
    t_min: f64,
    #[arg(long, default_value_t = 1000.0)]
    t_max: f64,
    #[arg(long, default_value_t = 0.6)]
    r_min: f64,
    #[arg(long, default_value_t = 0.95)]
    r_max: f64,
    /// Velocity limit as a fraction of each dimension's range.
    #[arg(long, default_value_t = SearchSpace::DEFAULT_VMAX_FRACTION)]
    vmax_fraction: f64,
}

impl SwarmArgs {
    fn build(&self, seed: u64) -> Result<(SearchSpace, SwarmConfig), CliError> {
        let low: Position = [self.i_min, self.t_min, self.r_min];
        let high: Position = [self.i_max, self.t_max, self.r_max];
        if !(self.vmax_fraction > 0.0) {
            return Err(ParamError::new("vmax_fraction", "must be > 0").into());
        }
        let v_max = std::array::from_fn(|d| self.vmax_fraction * (high[d] - low[d]));
        let space = SearchSpace::with_v_max(low, high, v_max)?;
        if self.i_min < 1.0 || self.t_min <= 0.0 || self.r_min <= 0.0 || self.r_max > 1.0 {
            return Err(ParamError::new(
                "bounds",
                "need I >= 1, T > 0 and R within (0, 1]",
            )
            .into());
        }
        let cfg = SwarmConfig {
            swarm_size: self.swarm_size,
            max_iterations: self.max_iterations,
            cognitive: self.cognitive,
            social: self.social,
            inertia: (self.inertia_min, self.inertia_max),
            seed,
            target: self.target_db,
        };
        cfg.validate()?;
        Ok((space, cfg))
    }
}

#[derive(Debug, Args)]
struct TuneArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Clean reference image; tuning is supervised.
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    detected: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "p5")]
    format: FormatArg,
    #[command(flatten)]
    swarm: SwarmArgs,
    #[command(flatten)]
    seed: SeedArg,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[arg(long)]
    clean: PathBuf,
    #[arg(long)]
    noisy: PathBuf,
    #[arg(long)]
    restored: PathBuf,
    /// Ground-truth mask from add-noise.
    #[arg(long)]
    mask: PathBuf,
    /// Detection map from denoise/tune; defaults to pixels that differ
    /// between the noisy and restored images.
    #[arg(long)]
    detected: Option<PathBuf>,
    /// Denoise/tune JSON report to copy parameters and iteration stats from.
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long)]
    report: PathBuf,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    #[arg(long)]
    clean: PathBuf,
    /// Noise densities as fractions.
    #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.3, 0.4, 0.5, 0.6])]
    densities: Vec<f64>,
    #[arg(long, value_enum, default_value = "random")]
    kind: KindArg,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    swarm: SwarmArgs,
    #[command(flatten)]
    seed: SeedArg,
}

/// Report written by `denoise` and `tune`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub params: FilterParams,
    pub iterations: Vec<IterationStats>,
    pub flagged_total: usize,
    pub changed_total: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tuning: Option<TuningTrace>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuningTrace {
    pub seed: u64,
    pub space: SearchSpace,
    pub swarm: SwarmConfig,
    pub best_position: Position,
    pub best_psnr_db: Psnr,
    /// Global best after initialization and after each swarm iteration.
    pub history: Vec<Psnr>,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub density: f64,
    pub seed: u64,
    pub report: EvaluationReport,
    pub best_position: Position,
    pub history: Vec<Psnr>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub kind: ImpulseKind,
    pub rows: Vec<BenchmarkRow>,
}

fn read_image(path: &Path) -> Result<GrayImage, CliError> {
    read_pgm_file(path).map_err(|source| CliError::Image {
        path: path.to_path_buf(),
        source,
    })
}

fn write_image(path: &Path, img: &GrayImage, format: PgmFormat) -> Result<(), CliError> {
    write_pgm_file(path, img, format).map_err(|source| CliError::Image {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Report(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Fails early if any output would land in a missing directory.
fn check_outputs<'a>(paths: impl IntoIterator<Item = &'a PathBuf>) -> Result<(), CliError> {
    for p in paths {
        if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
            if !dir.is_dir() {
                return Err(CliError::Usage(format!(
                    "output directory {} does not exist",
                    dir.display()
                )));
            }
        }
    }
    Ok(())
}

fn check_same_shape(a: &GrayImage, b: &GrayImage, what: &str) -> Result<(), CliError> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "{what}: {}x{} vs {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )))
    }
}

fn run_add_noise(args: &AddNoiseArgs) -> Result<(), CliError> {
    let spec = NoiseSpec::new(args.kind.into(), args.probability, args.seed.resolve()?)?;
    check_outputs([&args.out, &args.mask])?;
    let clean = read_image(&args.input)?;
    let (noisy, mask) = corrupt(&clean, &spec);
    write_image(&args.out, &noisy, args.format.into())?;
    write_image(&args.mask, &mask.to_image(), PgmFormat::P5)?;
    Ok(())
}

fn run_report(params: FilterParams, stats: Vec<IterationStats>, flagged: &Mask, changed: &Mask) -> RunReport {
    RunReport {
        params,
        iterations: stats,
        flagged_total: flagged.count(),
        changed_total: changed.count(),
        tuning: None,
    }
}

fn run_denoise(args: &DenoiseArgs) -> Result<(), CliError> {
    let params = FilterParams::new(args.iterations, args.threshold, args.decay)?;
    check_outputs([Some(&args.out), args.report.as_ref(), args.detected.as_ref()].into_iter().flatten())?;
    let noisy = read_image(&args.input)?;
    let out = denoise(&noisy, &params);
    write_image(&args.out, &out.restored, args.format.into())?;
    if let Some(path) = &args.detected {
        write_image(path, &out.ever_flagged.to_image(), PgmFormat::P5)?;
    }
    if let Some(path) = &args.report {
        let report = run_report(params, out.stats, &out.ever_flagged, &out.ever_changed);
        write_text(path, &to_json(&report)?)?;
    }
    Ok(())
}

fn run_tune(args: &TuneArgs) -> Result<(), CliError> {
    let seed = args.seed.resolve()?;
    let (space, cfg) = args.swarm.build(seed)?;
    check_outputs([Some(&args.out), args.report.as_ref(), args.detected.as_ref()].into_iter().flatten())?;
    let noisy = read_image(&args.input)?;
    let reference = read_image(&args.reference)?;
    check_same_shape(&reference, &noisy, "reference and noisy image differ in size")?;

    let (params, result) = tune(&noisy, &reference, &space, &cfg)?;
    let out = denoise(&noisy, &params);
    write_image(&args.out, &out.restored, args.format.into())?;
    if let Some(path) = &args.detected {
        write_image(path, &out.ever_flagged.to_image(), PgmFormat::P5)?;
    }
    if let Some(path) = &args.report {
        let mut report = run_report(params, out.stats, &out.ever_flagged, &out.ever_changed);
        report.tuning = Some(TuningTrace {
            seed,
            space,
            swarm: cfg,
            best_position: result.best_position,
            best_psnr_db: result.best_fitness,
            history: result.history,
            evaluations: result.evaluations,
        });
        write_text(path, &to_json(&report)?)?;
    }
    Ok(())
}

fn run_evaluate(args: &EvaluateArgs) -> Result<(), CliError> {
    check_outputs([&args.report])?;
    let clean = read_image(&args.clean)?;
    let noisy = read_image(&args.noisy)?;
    let restored = read_image(&args.restored)?;
    let truth = Mask::from_image(&read_image(&args.mask)?);
    check_same_shape(&clean, &noisy, "clean and noisy image differ in size")?;
    check_same_shape(&clean, &restored, "clean and restored image differ in size")?;
    check_same_shape(&clean, &truth.to_image(), "clean image and mask differ in size")?;

    let detected = match &args.detected {
        Some(path) => {
            let img = read_image(path)?;
            check_same_shape(&clean, &img, "clean image and detection map differ in size")?;
            Mask::from_image(&img)
        }
        None => Mask::new(
            noisy.width(),
            noisy.height(),
            noisy
                .pixels()
                .iter()
                .zip(restored.pixels())
                .map(|(a, b)| a != b)
                .collect(),
        )?,
    };
    let run = match &args.stats {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            let run: RunReport = serde_json::from_str(&text)
                .map_err(|e| CliError::Report(format!("{}: {e}", path.display())))?;
            Some(run)
        }
        None => None,
    };

    let mut report = EvaluationReport::evaluate(&clean, &noisy, &restored, &truth, &detected)?;
    if let Some(run) = run {
        report = report.with_run(run.params, run.iterations);
    }
    write_text(&args.report, &to_json(&report)?)
}

/// Runs one corrupt/tune/evaluate cycle per density.
pub fn benchmark(
    clean: &GrayImage,
    densities: &[f64],
    kind: ImpulseKind,
    space: &SearchSpace,
    cfg: &SwarmConfig,
) -> Result<BenchmarkReport, CliError> {
    let mut rows = Vec::with_capacity(densities.len());
    for (i, &density) in densities.iter().enumerate() {
        let seed = rng::derive_seed(cfg.seed, i as u64);
        let spec = NoiseSpec::new(kind, density, seed)?;
        let (noisy, truth) = corrupt(clean, &spec);
        let row_cfg = SwarmConfig { seed, ..*cfg };
        let (params, result) = tune(&noisy, clean, space, &row_cfg)?;
        let out = denoise(&noisy, &params);
        let report =
            EvaluationReport::evaluate(clean, &noisy, &out.restored, &truth, &out.ever_flagged)?
                .with_run(params, out.stats);
        rows.push(BenchmarkRow {
            density,
            seed,
            report,
            best_position: result.best_position,
            history: result.history,
        });
    }
    Ok(BenchmarkReport {
        seed: cfg.seed,
        width: clean.width(),
        height: clean.height(),
        kind,
        rows,
    })
}

/// Table with one row per density. PSNR in dB, `sen`/`spc` in percent.
pub fn benchmark_csv(report: &BenchmarkReport) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Report(e.to_string());
    w.write_record([
        "density_pct",
        "psnr_noisy",
        "psnr_restored",
        "miss",
        "false",
        "sen",
        "spc",
        "iterations",
        "threshold",
        "decay",
    ])
    .map_err(err)?;
    for row in &report.rows {
        let r = &row.report;
        let p = r.params_used.expect("benchmark rows carry params");
        w.write_record([
            format!("{:.0}", row.density * 100.0),
            r.psnr_noisy.to_string(),
            r.psnr_restored.to_string(),
            r.miss.to_string(),
            r.false_positives.to_string(),
            format!("{:.2}", r.sensitivity),
            format!("{:.2}", r.specificity),
            p.iterations.to_string(),
            format!("{:.4}", p.initial_threshold),
            format!("{:.4}", p.decay),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Report(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("ascii csv"))
}

fn run_benchmark(args: &BenchmarkArgs) -> Result<(), CliError> {
    let seed = args.seed.resolve()?;
    let (space, cfg) = args.swarm.build(seed)?;
    if args.densities.is_empty() {
        return Err(CliError::Usage("no densities given".into()));
    }
    for d in &args.densities {
        NoiseSpec::new(args.kind.into(), *d, 0)?;
    }
    check_outputs([args.csv.as_ref(), args.report.as_ref()].into_iter().flatten())?;
    let clean = read_image(&args.clean)?;
    let report = benchmark(&clean, &args.densities, args.kind.into(), &space, &cfg)?;
    let csv = benchmark_csv(&report)?;
    match &args.csv {
        Some(path) => write_text(path, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(path) = &args.report {
        write_text(path, &to_json(&report)?)?;
    }
    Ok(())
}

/// Parses `argv` (program name first) and runs the chosen subcommand.
/// Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            // clap's message spans several lines; keep everything before the usage hint
            let msg = e.to_string();
            let line = msg
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect::<Vec<_>>()
                .join(" ");
            eprintln!("andwp: {}", line.trim_start_matches("error: "));
            return 2;
        }
    };
    let result = match &cli.command {
        Command::AddNoise(a) => run_add_noise(a),
        Command::Denoise(a) => run_denoise(a),
        Command::Tune(a) => run_tune(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Benchmark(a) => run_benchmark(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("andwp: {e}");
            1
        }
    }
}
