//! Command-line front end: `threshold`, `decode`, `braid-demo`, `lifetime`,
//! `describe`.
//!
//! Experiments are described by a JSON config document; CLI flags override
//! the matching config fields. Result tables go to `--out` (or the config's
//! `output.path`, or standard output); progress and notes go to standard
//! error. Exit codes: 0 success, 1 usage or config error, 2 runtime
//! failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use planar_code::decode::DecodeError;
use planar_code::geometry::build_planar;
use planar_code::tableau::{braid_cnot_demo, ControlPrep, TargetPrep};
use planar_code_lab::config::{
    ExperimentConfig, LifetimeConfig, OutputFormat, OutputSpec, SyndromeFile, ThresholdConfig,
};
use planar_code_lab::sweep::{run_lifetime_sweep_with, run_threshold_sweep_with, SweepError};
use planar_code_lab::table::{LifetimeRow, ResultRow};

#[derive(Parser)]
#[command(
    name = "planar-code-lab",
    version,
    about = "Planar-code experiment driver: threshold sweeps, decoding, braiding, lifetimes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo threshold sweep described by a JSON config.
    Threshold(SweepArgs),
    /// Decode one stored syndrome document and print the correction.
    Decode {
        /// JSON document with `distance`, optional `model`, and `syndrome`.
        #[arg(long)]
        syndrome: PathBuf,
    },
    /// Hole-braiding CNOT walkthrough on a distance-d patch (d >= 8).
    BraidDemo(BraidArgs),
    /// Thermal memory-lifetime sweep described by a JSON config.
    Lifetime(LifetimeArgs),
    /// Print layout facts for one code distance.
    Describe {
        #[arg(long)]
        distance: usize,
    },
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's worker count.
    #[arg(long)]
    workers: Option<usize>,
    /// Write the table here instead of the config's output path / stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table format (default: config's choice, else csv).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Include per-point wall-clock columns (they vary run to run).
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct LifetimeArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// Write per-trial failure times here (CSV). Defaults to the summary
    /// path with a `-trials` suffix when the summary goes to a file.
    #[arg(long)]
    per_trial: Option<PathBuf>,
}

#[derive(Args)]
struct BraidArgs {
    /// Patch distance; the two-hole braid needs at least 8.
    #[arg(long)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ControlArg::Zero)]
    control: ControlArg,
    #[arg(long, value_enum, default_value_t = TargetArg::Zero)]
    target: TargetArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> OutputFormat {
        match f {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ControlArg {
    Zero,
    One,
    Plus,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    Zero,
    Plus,
    Minus,
}

impl From<ControlArg> for ControlPrep {
    fn from(c: ControlArg) -> ControlPrep {
        match c {
            ControlArg::Zero => ControlPrep::Zero,
            ControlArg::One => ControlPrep::One,
            ControlArg::Plus => ControlPrep::Plus,
        }
    }
}

impl From<TargetArg> for TargetPrep {
    fn from(t: TargetArg) -> TargetPrep {
        match t {
            TargetArg::Zero => TargetPrep::Zero,
            TargetArg::Plus => TargetPrep::Plus,
            TargetArg::Minus => TargetPrep::Minus,
        }
    }
}

/// A failed run, split by exit code.
enum Failure {
    /// Exit 1: bad invocation, unreadable or invalid config/input.
    Config(String),
    /// Exit 2: the experiment itself failed.
    Runtime(String),
}

impl Failure {
    fn config(msg: impl Into<String>) -> Failure {
        Failure::Config(msg.into())
    }

    fn runtime(msg: impl Into<String>) -> Failure {
        Failure::Runtime(msg.into())
    }
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let benign = matches!(
                e.kind(),
                ErrorKind::DisplayHelp
                    | ErrorKind::DisplayVersion
                    | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            );
            let _ = e.print();
            return if benign { 0 } else { 1 };
        }
    };
    let outcome = match cli.command {
        Command::Threshold(args) => cmd_threshold(args),
        Command::Decode { syndrome } => cmd_decode(&syndrome),
        Command::BraidDemo(args) => cmd_braid(args),
        Command::Lifetime(args) => cmd_lifetime(args),
        Command::Describe { distance } => cmd_describe(distance),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            2
        }
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    let src = fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_json_str(&src)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn sweep_failure(e: SweepError) -> Failure {
    match e {
        SweepError::Config(c) => Failure::config(c.to_string()),
        other => Failure::runtime(other.to_string()),
    }
}

/// Emit `text` to `path`, or to stdout when no path is given.
fn deliver(text: &str, path: Option<&Path>) -> Result<(), Failure> {
    match path {
        Some(path) => {
            fs::write(path, text)
                .map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Resolve output destination/format from config and flags; flags win.
fn resolve_output(
    config: Option<&OutputSpec>,
    args: &SweepArgs,
) -> (Option<PathBuf>, OutputFormat) {
    let path = args.out.clone().or_else(|| config.map(|o| o.path.clone()));
    let format = args
        .format
        .map(OutputFormat::from)
        .or(config.map(|o| o.format))
        .unwrap_or_default();
    (path, format)
}

fn cmd_threshold(args: SweepArgs) -> Result<(), Failure> {
    let mut cfg: ThresholdConfig = match load_config(&args.config)? {
        ExperimentConfig::Threshold(t) => t,
        other => {
            return Err(Failure::config(format!(
                "{}: config describes a {} experiment; use that subcommand",
                args.config.display(),
                other.kind_name()
            )))
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(workers) = args.workers {
        cfg.workers = workers;
    }
    let table = run_threshold_sweep_with(&cfg, |row: &ResultRow, done, total| {
        eprintln!(
            "[{done}/{total}] d={} p={} failures={}/{} rate={:.5} ({} ms)",
            row.distance,
            row.p(),
            row.failures,
            row.trials,
            row.rate,
            row.wall_ms.unwrap_or(0),
        );
    })
    .map_err(sweep_failure)?;
    let (path, format) = resolve_output(cfg.output.as_ref(), &args);
    deliver(&table.render(format, args.timings), path.as_deref())
}

fn cmd_lifetime(args: LifetimeArgs) -> Result<(), Failure> {
    let mut cfg: LifetimeConfig = match load_config(&args.sweep.config)? {
        ExperimentConfig::Lifetime(l) => l,
        other => {
            return Err(Failure::config(format!(
                "{}: config describes a {} experiment; use that subcommand",
                args.sweep.config.display(),
                other.kind_name()
            )))
        }
    };
    if let Some(seed) = args.sweep.seed {
        cfg.seed = seed;
    }
    if let Some(workers) = args.sweep.workers {
        cfg.workers = workers;
    }
    let table = run_lifetime_sweep_with(&cfg, |row: &LifetimeRow, done, total| {
        eprintln!(
            "[{done}/{total}] {} L={} beta={} failed={}/{} median={} ({} ms)",
            row.system,
            row.size,
            row.beta,
            row.failures,
            row.trials,
            row.median_lifetime,
            row.wall_ms.unwrap_or(0),
        );
    })
    .map_err(sweep_failure)?;
    let (path, format) = resolve_output(cfg.output.as_ref(), &args.sweep);
    deliver(&table.render(format, args.sweep.timings), path.as_deref())?;

    let per_trial = args
        .per_trial
        .or(cfg.per_trial)
        .or_else(|| path.as_deref().map(derive_trials_path));
    match per_trial {
        Some(trials_path) => deliver(&table.trials_to_csv(), Some(&trials_path)),
        None => {
            eprintln!("note: per-trial records not kept; pass --per-trial PATH to write them");
            Ok(())
        }
    }
}

/// `out.csv` -> `out-trials.csv` alongside the summary.
fn derive_trials_path(summary: &Path) -> PathBuf {
    let stem = summary.file_stem().and_then(|s| s.to_str()).unwrap_or("lifetime");
    summary.with_file_name(format!("{stem}-trials.csv"))
}

fn cmd_decode(path: &Path) -> Result<(), Failure> {
    let src = fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let doc: SyndromeFile = serde_json::from_str(&src)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let layout = build_planar(doc.distance)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let model = doc.effective_model();
    let correction =
        planar_code::decode::decode(&doc.syndrome, &layout, &model).map_err(|e| match e {
            DecodeError::BadSyndrome { .. }
            | DecodeError::RoundMismatch { .. }
            | DecodeError::InconsistentRounds => {
                Failure::config(format!("{}: {e}", path.display()))
            }
            other => Failure::runtime(other.to_string()),
        })?;
    let report = serde_json::json!({
        "distance": doc.distance,
        "qubits": layout.n_qubits(),
        "total_weight": correction.total_weight,
        "correction": correction.frame.to_hex(),
        "x_weight": correction.frame.x_weight(),
        "z_weight": correction.frame.z_weight(),
        "pairing": correction.pairing,
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

fn cmd_braid(args: BraidArgs) -> Result<(), Failure> {
    if args.size < 8 {
        return Err(Failure::config(format!(
            "braid demo needs --size of at least 8, got {}",
            args.size
        )));
    }
    let result = braid_cnot_demo(args.size, args.control.into(), args.target.into(), args.seed)
        .map_err(|e| Failure::runtime(e.to_string()))?;
    eprintln!(
        "braided d={} control={:?} target={:?}: {} moves, {} readings",
        result.distance,
        result.control,
        result.target,
        result.moves,
        result.readings.len(),
    );
    println!("{}", serde_json::to_string_pretty(&result).expect("report serializes"));
    Ok(())
}

fn cmd_describe(distance: usize) -> Result<(), Failure> {
    let layout =
        build_planar(distance).map_err(|e| Failure::config(e.to_string()))?;
    let report = serde_json::json!({
        "distance": layout.distance(),
        "side": layout.side(),
        "qubits": layout.n_qubits(),
        "plaquettes": layout.plaquettes().len(),
        "vertices": layout.vertices().len(),
        "logical_z": layout.logical_z(),
        "logical_x": layout.logical_x(),
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}
