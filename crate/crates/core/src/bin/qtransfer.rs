use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use qtransfer::bench::{
    apply_override, cache_file_name, collect_rows, emit_report, read_reference, render, render_markdown,
    run_experiment, table_rows, ExperimentConfig, ReportFormat, Task,
};
use qtransfer::data_io::{gen_synthetic, write_bundle, DatasetBundle};
use qtransfer::Error;

#[derive(Parser)]
#[command(name = "qtransfer", version, about = "Transfer-learning benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured tasks and methods and write reports.
    Run(RunArgs),
    /// Write the synthetic bundles to a directory.
    GenData(GenArgs),
    /// Render the reports found in a directory as one table.
    Table(TableArgs),
}

#[derive(Args)]
struct Overrides {
    /// Configuration file, JSON or TOML.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Arbitrary override, e.g. `--set vqtf.solver.layers=4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Overrides,
    /// Tasks to run, e.g. `sa_sb`. Repeatable.
    #[arg(long = "task")]
    tasks: Vec<String>,
    /// Methods to run, e.g. `vqtf`. Repeatable.
    #[arg(long = "method")]
    methods: Vec<String>,
    /// Embedding dimension for every method.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report formats to write. Repeatable.
    #[arg(long = "format")]
    formats: Vec<String>,
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Use 2000 MNIST and 1800 USPS samples.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    common: Overrides,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "md")]
    format: String,
    /// `method,task,accuracy` CSV of literature numbers to merge.
    #[arg(long)]
    reference: Option<PathBuf>,
}

fn resolve(common: &Overrides, mut extra: Vec<(String, Value)>) -> qtransfer::Result<ExperimentConfig> {
    let mut value = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => json!({}),
    };
    if let Some(seed) = common.seed {
        extra.push(("seed".into(), json!(seed)));
    }
    for (k, v) in extra {
        apply_override(&mut value, &format!("{k}={v}"))?;
    }
    for s in &common.set {
        apply_override(&mut value, s)?;
    }
    let cfg = ExperimentConfig::from_value(value)?;
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: RunArgs) -> qtransfer::Result<()> {
    let mut extra = Vec::new();
    if !args.tasks.is_empty() {
        let tasks = args
            .tasks
            .iter()
            .map(|t| t.parse::<Task>())
            .collect::<qtransfer::Result<Vec<_>>>()?;
        extra.push(("tasks".into(), serde_json::to_value(tasks)?));
    }
    if !args.methods.is_empty() {
        let methods = args
            .methods
            .iter()
            .map(|m| m.parse::<qtransfer::bench::Method>())
            .collect::<qtransfer::Result<Vec<_>>>()?;
        extra.push(("methods".into(), serde_json::to_value(methods)?));
    }
    if !args.formats.is_empty() {
        let f = args
            .formats
            .iter()
            .map(|f| f.parse::<ReportFormat>())
            .collect::<qtransfer::Result<Vec<_>>>()?;
        extra.push(("formats".into(), serde_json::to_value(f)?));
    }
    if let Some(d) = args.d {
        extra.push(("d".into(), json!(d)));
    }
    if let Some(out) = &args.out {
        extra.push(("output_dir".into(), json!(out)));
    }
    if let Some(dir) = &args.data_dir {
        extra.push(("digits.data_dir".into(), json!(dir)));
    }
    if args.full {
        extra.push(("digits.full".into(), json!(true)));
    }
    if let Some(t) = args.threads {
        extra.push(("threads".into(), json!(t)));
    }
    let cfg = resolve(&args.common, extra)?;
    let report = run_experiment(&cfg)?;
    print!("{}", render_markdown(&table_rows(&report)));
    if let Some(dir) = &cfg.output_dir {
        for p in emit_report(&report, &cfg.formats, dir)? {
            eprintln!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn gen_data(args: GenArgs) -> qtransfer::Result<()> {
    let cfg = resolve(&args.common, Vec::new())?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::Io {
        path: args.out.clone(),
        source: e,
    })?;
    let (a, b) = gen_synthetic(&cfg.synthetic, cfg.seed)?;
    for (task, src, tgt) in [(Task::SaSb, &a, &b), (Task::SbSa, &b, &a)] {
        let path = args.out.join(cache_file_name(task));
        write_bundle(&DatasetBundle::from_domains(src, tgt)?, cfg.seed, &path)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn table(args: TableArgs) -> qtransfer::Result<()> {
    let format: ReportFormat = args.format.parse()?;
    let mut rows = collect_rows(&args.input)?;
    if let Some(r) = &args.reference {
        rows.extend(read_reference(r)?);
    }
    print!("{}", render(&rows, format)?);
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Parameter(_) => 2,
        e if e.is_data_error() => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Run(a) => run(a),
        Command::GenData(a) => gen_data(a),
        Command::Table(a) => table(a),
    };
    match out {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
