use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use voxpht::fitter::FitConfig;
use voxpht::image_io::ImageFormat;
use voxpht::pipeline::{
    run_analyze, run_fit, run_phantom, with_manifest, AnalyzeRun, BenchmarkKind, FitRun, ImageSource, PhantomKind,
};

#[derive(Parser)]
#[command(name = "voxpht", version, about = "Voxel images to cubic PHT-spline volume parametrizations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a PHT-spline mesh to an image or a built-in phantom.
    Fit(FitArgs),
    /// Convergence study of an elasticity benchmark.
    Analyze(AnalyzeArgs),
    /// Write a built-in phantom image.
    Phantom(PhantomArgs),
}

#[derive(Args)]
struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Recorded in the manifest; the pipeline itself is deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FitArgs {
    /// PGM (2D) or RAW with a JSON sidecar (3D).
    #[arg(long, conflicts_with = "phantom")]
    input: Option<PathBuf>,
    /// Input format; guessed from the extension when absent.
    #[arg(long, value_parser = parse_format)]
    format: Option<ImageFormat>,
    #[arg(long, required_unless_present = "input")]
    phantom: Option<PhantomKind>,
    /// Embedding elements per axis.
    #[arg(long, default_value_t = 16)]
    n: usize,
    /// Boundary refinement rounds after the first fit.
    #[arg(long, default_value_t = 2)]
    levels: usize,
    #[command(flatten)]
    knobs: Knobs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Knobs {
    /// Intensity threshold of the contour.
    #[arg(long = "T")]
    threshold: Option<f64>,
    /// Percentage of inside samples that keeps a cut element.
    #[arg(long = "P")]
    percent: Option<f64>,
    /// Laplacian smoothing weight.
    #[arg(long)]
    lambda: Option<f64>,
    /// Classification samples per element axis.
    #[arg(long)]
    samples: Option<usize>,
    /// Largest template radius, in element sizes.
    #[arg(long = "radius-clamp")]
    radius_clamp: Option<f64>,
    /// Classify only; no boundary fitting (fixed geometry for `analyze`).
    #[arg(long = "no-adjust")]
    no_adjust: bool,
}

impl Knobs {
    fn apply(&self, cfg: &mut FitConfig) {
        if let Some(v) = self.threshold {
            cfg.threshold = v;
        }
        if let Some(v) = self.percent {
            cfg.percent = v;
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.samples {
            cfg.samples = v;
        }
        if let Some(v) = self.radius_clamp {
            cfg.radius_clamp = v;
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long, default_value = "plate-with-hole")]
    benchmark: BenchmarkKind,
    /// Study levels; level k uses n·2^k elements per axis.
    #[arg(long, default_value_t = 5)]
    levels: usize,
    /// Elements per axis on the first level.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "E", default_value_t = 1e5)]
    young: f64,
    #[arg(long, default_value_t = 0.3)]
    nu: f64,
    #[arg(long = "sigma-inf", default_value_t = 10.0)]
    sigma_inf: f64,
    #[command(flatten)]
    knobs: Knobs,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct PhantomArgs {
    #[arg(long)]
    phantom: PhantomKind,
    #[command(flatten)]
    common: Common,
}

fn parse_format(s: &str) -> Result<ImageFormat, String> {
    match s {
        "pgm" => Ok(ImageFormat::Pgm),
        "raw" => Ok(ImageFormat::Raw),
        _ => Err(format!("unknown format '{s}' (pgm or raw)")),
    }
}

fn run(cli: Cli) -> voxpht::Result<()> {
    match cli.command {
        Command::Fit(a) => {
            let image = match (a.input, a.phantom) {
                (Some(path), _) => {
                    let format = a.format.or_else(|| ImageFormat::from_path(&path)).ok_or_else(|| {
                        voxpht::Error::InvalidArgument(format!("cannot tell the format of {}", path.display()))
                            .in_stage("image_io")
                    })?;
                    ImageSource::File { path, format }
                }
                (None, Some(kind)) => ImageSource::Phantom { kind },
                (None, None) => unreachable!("clap requires --input or --phantom"),
            };
            let mut fit = FitConfig { levels: a.levels, adjust: !a.knobs.no_adjust, ..Default::default() };
            a.knobs.apply(&mut fit);
            let cfg = FitRun { image, n: a.n, fit, vtk_resolution: 4, seed: a.common.seed };
            let out = a.common.out;
            with_manifest("fit", &cfg, cfg.seed, &out, || run_fit(&cfg, &out))?;
            print!("{}", std::fs::read_to_string(out.join("fit_report.csv")).unwrap_or_default());
        }
        Command::Analyze(a) => {
            let mut cfg =
                AnalyzeRun::new(a.benchmark, a.levels, a.n, a.sigma_inf, a.young, a.nu, !a.knobs.no_adjust, a.common.seed)?;
            a.knobs.apply(&mut cfg.study.fit);
            let out = a.common.out;
            with_manifest("analyze", &cfg, cfg.seed, &out, || run_analyze(&cfg, &out))?;
            print!("{}", std::fs::read_to_string(out.join("convergence.csv")).unwrap_or_default());
        }
        Command::Phantom(a) => {
            let out = a.common.out;
            let r = with_manifest("phantom", &a.phantom, a.common.seed, &out, || run_phantom(a.phantom, &out))?;
            for p in &r.outputs {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
