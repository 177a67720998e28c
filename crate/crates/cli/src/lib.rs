//! `litterscan` subcommands. Every subcommand reads its inputs, computes
//! everything in memory, then writes outputs atomically; nothing is written
//! to standard output except clap's help and version text.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use litterscan_core::dataset::SplitSpec;
use litterscan_core::eval::{confusion_masks, metrics};
use litterscan_core::indexes::{b8b9_index, combined_index_mask, fdi, ndvi, threshold_map};
use litterscan_core::mlp::{load_model, predict_map, save_model, TrainConfig, DEFAULT_THRESHOLD};
use litterscan_core::pipeline::{train_pipeline, PipelineConfig};
use litterscan_core::raster_io::{
    import_pgm_band, load_stack, read_cube, read_mask, save_stack, write_atomic, write_cube,
    write_float_raster, write_mask, BandId, BandStack,
};
use litterscan_core::resample::align_stack;
use litterscan_core::synthetic::make_synthetic;

/// Environment variable selecting diagnostic verbosity (error, info, debug).
pub const LOG_ENV: &str = "LITTERSCAN_LOG";

#[derive(Debug, Parser)]
#[command(
    name = "litterscan",
    version,
    about = "Plastic-cover detection in 13-band multispectral rasters"
)]
struct Cli {
    /// Seed for every random choice (balancing, splitting, initialization, synthetic scenes).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a band-stack container from PGM bands.
    Import(ImportArgs),
    /// Align a band stack onto its finest grid with Lanczos3.
    Resample(ResampleArgs),
    /// Compute a spectral index map or mask.
    Index(IndexArgs),
    /// Train the per-pixel classifier on a cube and truth mask.
    Train(TrainArgs),
    /// Classify every pixel of a cube.
    Predict(PredictArgs),
    /// Compare a predicted mask against a truth mask.
    Eval(EvalArgs),
    /// Write the seeded synthetic scene (cube + truth mask).
    MakeSynthetic(SyntheticArgs),
}

#[derive(Debug, Args)]
struct ImportArgs {
    /// Band to import as ID=PATH, e.g. B8=nir.pgm; repeat per band.
    #[arg(long = "band", value_name = "ID=PATH", required = true)]
    bands: Vec<String>,
    /// Output directory for manifest.json and the band payloads.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ResampleArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output cube header path (payload goes beside it).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Ndvi,
    Fdi,
    B8b9,
    Combined,
}

#[derive(Debug, Args)]
struct IndexArgs {
    #[arg(long)]
    cube: PathBuf,
    #[arg(long, value_enum)]
    method: Method,
    /// Float raster for ndvi/fdi/b8b9; PGM mask for combined.
    #[arg(long)]
    out: PathBuf,
    /// Threshold for the optional mask of a single index.
    #[arg(long, allow_negative_numbers = true)]
    threshold: Option<f64>,
    /// Where to write the thresholded mask.
    #[arg(long)]
    mask: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    ndvi_max: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    fdi_min: Option<f64>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    cube: PathBuf,
    /// Truth mask (PGM, 255 = plastic).
    #[arg(long)]
    mask: PathBuf,
    /// Model JSON; the training report goes to `<stem>.report.json`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    #[arg(long, default_value_t = 6)]
    val_failures: usize,
    #[arg(long, default_value_t = 0.70)]
    train_frac: f64,
    #[arg(long, default_value_t = 0.15)]
    val_frac: f64,
    #[arg(long, default_value_t = 0.15)]
    test_frac: f64,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    cube: PathBuf,
    /// Float raster of raw network outputs.
    #[arg(long)]
    out: PathBuf,
    /// Thresholded output mask.
    #[arg(long)]
    mask: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD, allow_negative_numbers = true)]
    threshold: f64,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Truth mask.
    #[arg(long)]
    mask: PathBuf,
    /// Predicted mask.
    #[arg(long)]
    predicted: PathBuf,
    /// JSON report; a text table goes to the same path with a `.txt` extension.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SyntheticArgs {
    /// Output directory for cube.json, cube.f32 and truth.pgm.
    #[arg(long)]
    out: PathBuf,
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or(LOG_ENV, "warn");
    // repeated calls (tests) keep the first logger
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
}

/// Parses `argv` (program name first) and runs the subcommand. Returns the
/// process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("litterscan: {e:#}");
            1
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Import(a) => import(a),
        Command::Resample(a) => resample(a),
        Command::Index(a) => index(a),
        Command::Train(a) => train(a, seed),
        Command::Predict(a) => predict(a),
        Command::Eval(a) => eval(a),
        Command::MakeSynthetic(a) => synthetic(a, seed),
    }
}

fn import(a: ImportArgs) -> Result<()> {
    let mut bands = Vec::with_capacity(a.bands.len());
    for spec in &a.bands {
        let (id, path) = spec
            .split_once('=')
            .with_context(|| format!("--band {spec:?}: expected ID=PATH"))?;
        let id: BandId = id.parse()?;
        bands.push(import_pgm_band(path, id.spec())?);
    }
    let first = &bands[0];
    let extent = first.rows as f64 * first.spec.native_gsd_m;
    let stack = BandStack::new(bands, extent)?;
    let manifest = save_stack(&stack, &a.out)?;
    log::info!("wrote {}", manifest.display());
    Ok(())
}

fn resample(a: ResampleArgs) -> Result<()> {
    let stack = load_stack(&a.manifest)?;
    let cube = align_stack(&stack)?;
    write_cube(&cube, &a.out)?;
    log::info!(
        "wrote {}x{}x{} cube to {}",
        cube.rows(),
        cube.cols(),
        cube.n_bands(),
        a.out.display()
    );
    Ok(())
}

fn index(a: IndexArgs) -> Result<()> {
    let cube = read_cube(&a.cube)?;
    let map = match a.method {
        Method::Combined => {
            let (Some(ndvi_max), Some(fdi_min)) = (a.ndvi_max, a.fdi_min) else {
                bail!("--method combined requires --ndvi-max and --fdi-min");
            };
            let mask = combined_index_mask(&cube, ndvi_max, fdi_min)?;
            write_mask(&mask, &a.out)?;
            return Ok(());
        }
        Method::Ndvi => ndvi(&cube)?,
        Method::Fdi => fdi(&cube)?,
        Method::B8b9 => b8b9_index(&cube)?,
    };
    let mask = match (a.threshold, &a.mask) {
        (Some(t), Some(_)) => Some(threshold_map(&map, t)),
        (None, Some(_)) => bail!("--mask requires --threshold"),
        _ => None,
    };
    write_float_raster(&map.values, map.rows, map.cols, &a.out)?;
    if let (Some(mask), Some(path)) = (mask, &a.mask) {
        write_mask(&mask, path)?;
    }
    Ok(())
}

/// `model.json` -> `model.report.json`
pub fn report_path(model_path: &Path) -> PathBuf {
    model_path.with_extension("report.json")
}

fn train(a: TrainArgs, seed: u64) -> Result<()> {
    let cube = read_cube(&a.cube)?;
    let truth = read_mask(&a.mask)?;
    let cfg = PipelineConfig {
        seed,
        split: SplitSpec {
            train_frac: a.train_frac,
            val_frac: a.val_frac,
            test_frac: a.test_frac,
            seed,
        },
        train: TrainConfig {
            max_iters: a.max_iters,
            max_val_failures: a.val_failures,
            ..TrainConfig::default()
        },
        threshold: DEFAULT_THRESHOLD,
    };
    let (model, report) = train_pipeline(&cube, &truth, &cfg)?;
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    save_model(&model, &a.out)?;
    write_atomic(report_path(&a.out), &json)?;
    Ok(())
}

fn predict(a: PredictArgs) -> Result<()> {
    let model = load_model(&a.model)?;
    let cube = read_cube(&a.cube)?;
    let (mask, map) = predict_map(&model, &cube, a.threshold)?;
    write_float_raster(&map.values, map.rows, map.cols, &a.out)?;
    if let Some(path) = &a.mask {
        write_mask(&mask, path)?;
    }
    log::info!(
        "{} of {} pixels classified as plastic",
        mask.count_positive(),
        cube.n_pixels()
    );
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let truth = read_mask(&a.mask)?;
    let predicted = read_mask(&a.predicted)?;
    let report = metrics(&confusion_masks(&predicted, &truth)?)?;
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    let table = report.render_table("Confusion matrix");
    write_atomic(&a.out, &json)?;
    write_atomic(a.out.with_extension("txt"), table.as_bytes())?;
    Ok(())
}

fn synthetic(a: SyntheticArgs, seed: u64) -> Result<()> {
    let scene = make_synthetic(seed)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    write_cube(&scene.cube, a.out.join("cube.json"))?;
    write_mask(&scene.truth, a.out.join("truth.pgm"))?;
    Ok(())
}
