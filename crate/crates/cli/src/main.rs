mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand};
use monostereo::geometry::{sample_scale, DisparityMode, WarpMode};
use monostereo::imgio::{read_depth, read_image, write_image};
use monostereo::metrics::{evaluate_directory, MaskKind};
use monostereo::pipeline::{
    compose_grid, inspect_panels, load_manifest, run, sweep_scale_render, Generator,
    GeneratorConfig, RunOptions,
};
use monostereo::rng::{stream_rng, SYNTHESIS_STREAM};
use monostereo::synthesis::SynthesisConfig;

use config::Settings;

#[derive(Parser, Debug)]
#[command(
    name = "monostereo",
    version,
    about = "Stereo training data from single images and depth"
)]
struct Cli {
    /// Log progress (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a dataset from a manifest.
    Generate(GenerateArgs),
    /// Score disparity predictions against ground truth.
    Eval(EvalArgs),
    /// Render inspection panels for one image and depth map.
    Inspect(InspectArgs),
}

/// Synthesis overrides shared by `generate` and `inspect`. Unset flags fall
/// back to the config file, then to built-in defaults.
#[derive(Args, Debug, Default)]
struct SynthesisFlags {
    /// Flat key/value TOML settings file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Lower bound of the scale draw [default: 50].
    #[arg(long)]
    d_min: Option<f32>,
    /// Upper bound of the scale draw [default: 225].
    #[arg(long)]
    d_max: Option<f32>,
    /// max_disparity or literal [default: max_disparity].
    #[arg(long, value_parser = parse_disparity_mode)]
    disparity_mode: Option<DisparityMode>,
    /// linear or nearest [default: linear].
    #[arg(long, value_parser = parse_warp_mode)]
    warp_mode: Option<WarpMode>,
    /// Skip depth sharpening.
    #[arg(long)]
    no_sharpen: bool,
    /// Fill holes with the background as is, without colour matching.
    #[arg(long)]
    no_color_transfer: bool,
}

impl SynthesisFlags {
    fn settings(&self) -> Settings {
        Settings {
            d_min: self.d_min,
            d_max: self.d_max,
            disparity_mode: self.disparity_mode,
            warp_mode: self.warp_mode,
            sharpen: self.no_sharpen.then_some(false),
            color_transfer: self.no_color_transfer.then_some(false),
            ..Default::default()
        }
    }

    fn file(&self) -> Result<Settings> {
        self.config
            .as_deref()
            .map(Settings::load)
            .transpose()
            .map(Option::unwrap_or_default)
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// TSV (left, depth, split) or JSON manifest.
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// mono, affine, shapes, superpixels or svsm [default: mono].
    #[arg(long, value_parser = parse_generator)]
    generator: Option<Generator>,
    /// Global seed [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads [default: available cores].
    #[arg(long)]
    workers: Option<usize>,
    /// Also write 16-bit PNG disparities.
    #[arg(long)]
    png_disparity: bool,
    /// Leave the right view unaugmented.
    #[arg(long)]
    no_augment: bool,
    /// Emit tuples at input resolution.
    #[arg(long)]
    no_crop: bool,
    /// Row failures tolerated before exiting with status 2.
    #[arg(long, default_value_t = 0)]
    max_failures: usize,
    #[command(flatten)]
    synthesis: SynthesisFlags,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// Directory of predicted disparities (.pfm or 16-bit .png).
    #[arg(long)]
    pred: PathBuf,
    /// Directory of ground-truth disparities with matching file stems.
    #[arg(long)]
    gt: PathBuf,
    /// Error threshold in pixels; repeat for several columns.
    #[arg(long = "tau", default_values_t = vec![1.0, 2.0, 3.0])]
    taus: Vec<f64>,
    /// Directory of non-occluded masks; restricts evaluation to them.
    #[arg(long)]
    noc: Option<PathBuf>,
    /// Where to write the JSON report.
    #[arg(long, default_value = "eval_report.json")]
    json: PathBuf,
}

#[derive(Args, Debug)]
struct InspectArgs {
    /// Left image.
    #[arg(long)]
    image: PathBuf,
    /// Depth map (.pfm or 16-bit .png) aligned with the image.
    #[arg(long)]
    depth: PathBuf,
    /// Hole-filling background [default: the mirrored left image].
    #[arg(long)]
    background: Option<PathBuf>,
    /// Output PNG.
    #[arg(long, default_value = "inspect.png")]
    out: PathBuf,
    /// Fixed scale s [default: drawn from the seed].
    #[arg(long)]
    scale: Option<f32>,
    /// Seed for the scale draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated scales; writes a labelled grid next to the output.
    #[arg(long, value_delimiter = ',')]
    sweep_s: Vec<f32>,
    #[command(flatten)]
    synthesis: SynthesisFlags,
}

fn parse_generator(s: &str) -> Result<Generator, String> {
    s.parse()
        .map_err(|_| "expected one of mono, affine, shapes, superpixels, svsm".to_string())
}

fn parse_warp_mode(s: &str) -> Result<WarpMode, String> {
    match s {
        "linear" => Ok(WarpMode::Linear),
        "nearest" => Ok(WarpMode::Nearest),
        _ => Err("expected linear or nearest".into()),
    }
}

fn parse_disparity_mode(s: &str) -> Result<DisparityMode, String> {
    match s {
        "max_disparity" => Ok(DisparityMode::MaxDisparity),
        "literal" => Ok(DisparityMode::Literal),
        _ => Err("expected max_disparity or literal".into()),
    }
}

/// Status for a run that finished but had too many row failures.
const EXIT_ROW_FAILURES: u8 = 2;

fn generate(args: &GenerateArgs) -> Result<ExitCode> {
    let mut manifest = load_manifest(&args.manifest)?;
    let flags = Settings {
        generator: args.generator,
        seed: args.seed,
        workers: args.workers,
        png_disparity: args.png_disparity.then_some(true),
        augment: args.no_augment.then_some(false),
        crop: args.no_crop.then_some(false),
        ..args.synthesis.settings()
    };
    let settings = args.synthesis.file()?.overlay(flags);
    manifest.generator = settings.generator.unwrap_or(manifest.generator);
    manifest.global_seed = settings.seed.unwrap_or(manifest.global_seed);
    manifest.config = settings.apply(&manifest.config);
    manifest.check()?;

    let workers = settings
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let png_disparity = settings.png_disparity.unwrap_or(false);
    let resolved = Settings::resolved(
        manifest.generator,
        manifest.global_seed,
        workers,
        png_disparity,
        &manifest.config,
    );
    let echo = resolved.to_toml();
    print!("{echo}");
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    std::fs::write(args.out.join("config.toml"), &echo)?;

    let ledger = run(
        &manifest,
        &RunOptions {
            out_dir: args.out.clone(),
            workers,
            png_disparity,
        },
    )?;
    println!(
        "{} ok, {} failed in {:.1}s (config {})",
        ledger.ok,
        ledger.failed,
        ledger.wall_time_secs,
        &ledger.config_hash[..12]
    );
    for r in &ledger.rows {
        if let monostereo::pipeline::RowStatus::Failed { reason } = &r.status {
            println!("  row {} {}: {reason}", r.row, r.left.display());
        }
    }
    Ok(if ledger.failed > args.max_failures {
        ExitCode::from(EXIT_ROW_FAILURES)
    } else {
        ExitCode::SUCCESS
    })
}

fn eval(args: &EvalArgs) -> Result<ExitCode> {
    let mask = if args.noc.is_some() {
        MaskKind::Noc
    } else {
        MaskKind::All
    };
    let report = evaluate_directory(&args.pred, &args.gt, &args.taus, mask, args.noc.as_deref())?;
    if report.images.is_empty() {
        bail!(
            "no matched prediction / ground-truth pairs ({} skipped)",
            report.skipped.len()
        );
    }
    print!("{}", report.to_table());
    let json = format!("{}\n", serde_json::to_string_pretty(&report)?);
    std::fs::write(&args.json, json).with_context(|| format!("writing {}", args.json.display()))?;
    Ok(ExitCode::SUCCESS)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("inspect");
    path.with_file_name(format!("{stem}_{suffix}.png"))
}

fn inspect(args: &InspectArgs) -> Result<ExitCode> {
    let settings = args.synthesis.file()?.overlay(args.synthesis.settings());
    let cfg = settings.apply(&GeneratorConfig::default()).synthesis;
    cfg.validate()?;
    let left = read_image(&args.image)?;
    let depth = read_depth(&args.depth)?;
    let background = match &args.background {
        Some(p) => read_image(p)?,
        None => left.flip_horizontal(),
    };
    let s = match args.scale {
        Some(s) => s,
        None => sample_scale(&mut stream_rng(args.seed, SYNTHESIS_STREAM), &cfg.scale),
    };
    let panels = if args.synthesis.no_sharpen {
        // sharpened row on top, raw row below
        let sharp_cfg = SynthesisConfig {
            sharpen: Some(cfg.sharpen.unwrap_or_default()),
            ..cfg.clone()
        };
        let mut rows = inspect_panels(&left, &depth, &background, s, &sharp_cfg, true)?;
        rows.extend(inspect_panels(&left, &depth, &background, s, &cfg, false)?);
        rows
    } else {
        inspect_panels(&left, &depth, &background, s, &cfg, cfg.sharpen.is_some())?
    };
    write_image(&compose_grid(&panels, 4), &args.out)?;
    println!("s = {s:.2}: wrote {}", args.out.display());
    if !args.sweep_s.is_empty() {
        let (grid, sweep) = sweep_scale_render(&left, &depth, &background, &args.sweep_s, &cfg)?;
        let path = sibling(&args.out, "sweep");
        write_image(&grid, &path)?;
        for p in &sweep {
            println!("s = {:>7.2}: holes {:.2}%", p.s, 100.0 * p.hole_fraction);
        }
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            if !e.render().to_string().contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(1);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match &cli.command {
        Command::Generate(a) => generate(a),
        Command::Eval(a) => eval(a),
        Command::Inspect(a) => inspect(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
