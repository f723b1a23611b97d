use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tradeoff_core::artifact::{
    read_selections, summarize, DatasetDocument, EvalScope, ModelFamilyArtifact, SelectionLog,
    SourceReport,
};
use tradeoff_core::classifier::TrainConfig;
use tradeoff_core::dataset::{build_balanced, filter_records, parse_raw, Attribute};
use tradeoff_core::frontier::{build_family, FamilyConfig, GridConfig};
use tradeoff_core::metrics::ThresholdGrid;
use tradeoff_service::AppState;

#[derive(Debug, Parser)]
#[command(name = "tradeoff", version, about = "Build and explore families of accuracy/disparity trade-off models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and filter a raw recidivism table into a dataset file.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Where to write the rejected-rows report.
        #[arg(long)]
        rejects: Option<PathBuf>,
    },
    /// Train a model family and write the artifact.
    Build(BuildArgs),
    /// Serve an artifact over HTTP.
    Serve {
        #[arg(long)]
        artifact: PathBuf,
        /// Selection log (created if missing).
        #[arg(long)]
        selections: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Directory with the built explorer UI.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
    /// Inspect the selection log.
    Selections {
        #[command(subcommand)]
        command: SelectionsCommand,
    },
}

#[derive(Debug, Subcommand)]
enum SelectionsCommand {
    /// Per-model and per-threshold selection counts.
    Summarize {
        #[arg(long)]
        log: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AttributeArg {
    Race,
    Gender,
}

impl From<AttributeArg> for Attribute {
    fn from(a: AttributeArg) -> Self {
        match a {
            AttributeArg::Race => Attribute::Race,
            AttributeArg::Gender => Attribute::Gender,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScopeArg {
    Full,
    Test,
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum)]
    attribute: AttributeArg,
    /// Records sampled per group [default: 1500 for race, 800 for gender].
    #[arg(long)]
    per_group_n: Option<usize>,
    /// Seeds group sampling and the train/test split.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 9, value_parser = clap::value_parser!(u64).range(1..=99))]
    grid_k: u64,
    #[arg(long, default_value_t = 4.0)]
    grid_range: f64,
    /// Threshold grid as start:stop:step.
    #[arg(long, default_value = "0:1:0.05")]
    thresholds: String,
    #[arg(long, default_value_t = 0.7)]
    train_fraction: f64,
    /// Records the frontiers and sweep are computed on.
    #[arg(long, value_enum, default_value_t = ScopeArg::Full)]
    eval_scope: ScopeArg,
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn ingest(input: &Path, out: &Path, rejects: Option<&Path>) -> Result<()> {
    let parsed = parse_raw(&read(input)?).with_context(|| format!("cannot parse {}", input.display()))?;
    let (records, filter) = filter_records(&parsed.records);
    let doc = DatasetDocument::new(
        SourceReport {
            parsed_rows: parsed.records.len(),
            rejected_rows: parsed.rejects.len(),
            filter,
        },
        records,
    );
    write(out, &doc.export())?;
    if let Some(path) = rejects {
        let mut report = serde_json::to_vec_pretty(&parsed.rejects)?;
        report.push(b'\n');
        write(path, &report)?;
    }
    println!(
        "parsed {} rows ({} rejected); kept {} after filtering \
         (incomplete {}, traffic/ordinance {}, race out of scope {}, underage {})",
        parsed.records.len(),
        parsed.rejects.len(),
        filter.kept,
        filter.incomplete,
        filter.traffic_or_ordinance,
        filter.race_out_of_scope,
        filter.underage,
    );
    Ok(())
}

fn build(args: &BuildArgs) -> Result<()> {
    let doc = DatasetDocument::load(&read(&args.dataset)?)
        .with_context(|| format!("invalid dataset {}", args.dataset.display()))?;
    let attribute = Attribute::from(args.attribute);
    let per_group_n = args.per_group_n.unwrap_or(attribute.default_per_group_n());
    let balanced = build_balanced(&doc.records, attribute, per_group_n, args.seed)?;

    let defaults = TrainConfig::default();
    let train = TrainConfig {
        l2_lambda: args.l2.unwrap_or(defaults.l2_lambda),
        max_iterations: args.max_iterations.unwrap_or(defaults.max_iterations),
        gradient_tolerance: args.tolerance.unwrap_or(defaults.gradient_tolerance),
        ..defaults
    };
    train.validate()?;
    let config = FamilyConfig {
        thresholds: ThresholdGrid::parse(&args.thresholds)?,
        grid: GridConfig {
            levels: args.grid_k as usize,
            range: args.grid_range,
        },
        train,
        train_fraction: args.train_fraction,
        eval_scope: match args.eval_scope {
            ScopeArg::Full => EvalScope::Full,
            ScopeArg::Test => EvalScope::Test,
        },
        build_timestamp: std::env::var("SOURCE_DATE_EPOCH").ok(),
        ..FamilyConfig::new(args.seed)
    };
    let artifact = build_family(&balanced, &config)?;
    write(&args.out, &artifact.export())?;

    let meta = &artifact.metadata;
    println!(
        "{attribute}: {} records, {} models ({} failed), {} thresholds",
        meta.dataset.records,
        artifact.models.len(),
        meta.failures.len(),
        artifact.thresholds().len()
    );
    println!(
        "unweighted model {}: train accuracy {:.3}, test accuracy {:.3} at threshold {}",
        meta.unweighted_model_id,
        meta.unweighted_accuracy.train,
        meta.unweighted_accuracy.test,
        meta.unweighted_accuracy.threshold
    );
    for frontier in &artifact.frontiers {
        let (lo, hi) = (frontier.min_disparity(), frontier.max_disparity());
        println!(
            "threshold {:.2}: {} frontier points, disparity {}..{}, errors {}..{}",
            frontier.threshold,
            frontier.points.len(),
            lo.disparity,
            hi.disparity,
            hi.errors,
            lo.errors
        );
    }
    Ok(())
}

fn serve(artifact: &Path, selections: &Path, addr: SocketAddr, ui_dir: Option<PathBuf>) -> Result<()> {
    let artifact = ModelFamilyArtifact::load(&read(artifact)?)
        .with_context(|| format!("invalid artifact {}", artifact.display()))?;
    let log = SelectionLog::open(selections)?;
    let state = AppState::new(artifact, log, ui_dir);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime
        .block_on(tradeoff_service::serve(state, addr))
        .with_context(|| format!("cannot serve on {addr}"))
}

fn summarize_log(log: &Path) -> Result<()> {
    let records = read_selections(log)?;
    let summary = summarize(&records);
    println!("{} selections", summary.total);
    println!("by model:");
    for (model, n) in &summary.by_model {
        println!("  {model}\t{n}");
    }
    println!("by threshold:");
    for (t, n) in &summary.by_threshold {
        println!("  {t}\t{n}");
    }
    println!("by view:");
    for (v, n) in &summary.by_view {
        println!("  {v}\t{n}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { input, out, rejects } => ingest(&input, &out, rejects.as_deref()),
        Command::Build(args) => {
            if args.grid_range.is_nan() || args.grid_range <= 1.0 {
                bail!("--grid-range must be greater than 1");
            }
            build(&args)
        }
        Command::Serve {
            artifact,
            selections,
            port,
            host,
            ui_dir,
        } => serve(&artifact, &selections, SocketAddr::new(host, port), ui_dir),
        Command::Selections {
            command: SelectionsCommand::Summarize { log },
        } => summarize_log(&log),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
