//! Command-line binary: adversarial training of a quantum circuit that
//! generates handwritten-digit images.

use clap::{Args, Parser, Subcommand};
use qgan::cli::{
    cmd_generate, cmd_inspect, cmd_selftest, cmd_train, load_run_config, RunConfig,
};
use qgan::encoding::ScaleStatistic;
use qgan::optimizer::LogBase;
use qgan::{Error, Result};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "qgan",
    version,
    about = "Adversarial quantum circuit learning on handwritten digits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)] // parsed once at startup
enum Command {
    /// Train a generator on a digit class and write all run artifacts.
    Train(TrainArgs),
    /// Regenerate images from a finished run's saved parameters.
    Generate(GenerateArgs),
    /// Summarize a run directory as per-epoch CSV.
    Inspect(InspectArgs),
    /// Run the fast invariant suite.
    Selftest,
}

#[derive(Args)]
struct TrainArgs {
    /// Output directory for all run artifacts.
    #[arg(long)]
    out: PathBuf,
    /// TOML config file: either a bare config or a manifest from an
    /// earlier run. Flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Generator register width (2 to 8).
    #[arg(long)]
    qubits: Option<usize>,
    /// Digit class to train on (0 to 9).
    #[arg(long)]
    digit: Option<u8>,
    /// Number of training images to draw from the class.
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Optimizer generations per player per epoch.
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Norm statistic for the encoding scale: mean, max, or median.
    #[arg(long)]
    scale_statistic: Option<String>,
    /// Log base in the optimizer population rule: natural or ten.
    #[arg(long)]
    log_base: Option<String>,
    /// Draw fresh search starting points every epoch instead of resuming
    /// from the previous epoch's best.
    #[arg(long)]
    no_warm_start: bool,
    /// Optimize all generator parameter sets as one joint search.
    #[arg(long)]
    joint_generator: bool,
    /// MNIST image file (IDX format).
    #[arg(long)]
    images: Option<PathBuf>,
    /// MNIST label file (IDX format).
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Directory holding the standard MNIST files; a fallback for
    /// --images/--labels.
    #[arg(long)]
    data_dir: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// A finished run directory (holds manifest, parameters, PCA model).
    #[arg(long)]
    run: PathBuf,
    /// Where to write the images; defaults to <run>/regenerated.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InspectArgs {
    /// A finished run directory.
    #[arg(long)]
    run: PathBuf,
}

fn parse_scale_statistic(text: &str) -> Result<ScaleStatistic> {
    match text {
        "mean" => Ok(ScaleStatistic::Mean),
        "max" => Ok(ScaleStatistic::Max),
        "median" => Ok(ScaleStatistic::Median),
        other => Err(Error::Config(format!(
            "scale statistic must be mean, max, or median, got {other}"
        ))),
    }
}

fn parse_log_base(text: &str) -> Result<LogBase> {
    match text {
        "natural" => Ok(LogBase::Natural),
        "ten" => Ok(LogBase::Ten),
        other => Err(Error::Config(format!(
            "log base must be natural or ten, got {other}"
        ))),
    }
}

fn build_config(args: &TrainArgs) -> Result<RunConfig> {
    let mut config = match &args.config {
        Some(path) => load_run_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(q) = args.qubits {
        config.qubits = q;
    }
    if let Some(d) = args.digit {
        config.digit = d;
    }
    if let Some(c) = args.count {
        config.count = c;
    }
    if let Some(e) = args.epochs {
        config.epochs = e;
    }
    if let Some(g) = args.generations {
        config.generations = g;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(s) = &args.scale_statistic {
        config.scale_statistic = parse_scale_statistic(s)?;
    }
    if let Some(b) = &args.log_base {
        config.log_base = parse_log_base(b)?;
    }
    if args.no_warm_start {
        config.warm_start = false;
    }
    if args.joint_generator {
        config.joint_generator = true;
    }
    if let Some(p) = &args.images {
        config.images = Some(p.clone());
    }
    if let Some(p) = &args.labels {
        config.labels = Some(p.clone());
    }
    if let Some(dir) = &args.data_dir {
        if config.images.is_none() {
            config.images = Some(dir.join(qgan::cli::DEFAULT_IMAGES_FILE));
        }
        if config.labels.is_none() {
            config.labels = Some(dir.join(qgan::cli::DEFAULT_LABELS_FILE));
        }
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => {
            let config = build_config(&args)?;
            cmd_train(&config, &args.out)
        }
        Command::Generate(args) => {
            cmd_generate(&args.run, args.out.as_deref()).map(|_| ())
        }
        Command::Inspect(args) => {
            let report = cmd_inspect(&args.run)?;
            print!("{report}");
            Ok(())
        }
        Command::Selftest => {
            let report = cmd_selftest()?;
            print!("{report}");
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        let code = match e {
            Error::Config(_) => 2,
            _ => 1,
        };
        std::process::exit(code);
    }
}
