//! Argument parsing and dispatch for the `personasage` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::{
    build_report, read_rows_from, run_sweep_on, run_train, write_rows, write_rows_to, write_trace, ResultRow,
    RunConfig, TrainOutcome,
};
use crate::aggregate::Aggregator;
use crate::clustering::Clusterer;
use crate::datasets::load_bundle;
use crate::error::{Error, Result};
use crate::model::{Activation, ModelKind, ReadoutKind};
use crate::train::{ClusterSource, FeatureSource, Task};

#[derive(Debug, Parser)]
#[command(name = "personasage", version, about = "Persona graph networks: training, K sweeps and reports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train one configuration over several seeds.
    Train(RunArgs),
    /// Train the persona model for each K at a fixed readout width.
    SweepK(SweepArgs),
    /// Pivot result files into a table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// lp (link prediction) or nc (node classification).
    #[arg(long, default_value = "lp")]
    task: Task,
    /// Bundle directory.
    #[arg(long)]
    dataset: PathBuf,
    /// raw or random.
    #[arg(long, default_value = "raw")]
    features: FeatureSource,
    /// Features the initial clustering sees: model or raw.
    #[arg(long, default_value = "model")]
    cluster_features: ClusterSource,
    /// personasage, graphsage or personasage-k1.
    #[arg(long, default_value = "personasage")]
    model: ModelKind,
    /// ward or kmeans.
    #[arg(long, default_value = "ward")]
    clusterer: Clusterer,
    /// mean, sum or max.
    #[arg(long, default_value = "mean")]
    aggregator: Aggregator,
    /// Persona count [default: number of classes].
    #[arg(long)]
    k: Option<usize>,
    /// Per-persona output width [default: total-dim / K].
    #[arg(long)]
    d: Option<usize>,
    /// Readout width [default: 70 cora, 60 citeseer, 30 pubmed, else 10 per class].
    #[arg(long)]
    total_dim: Option<usize>,
    /// Hidden width per persona.
    #[arg(long, default_value_t = 128)]
    hidden_dim: usize,
    #[arg(long, default_value_t = 2)]
    layers: usize,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    /// Number of seeds, run as 0..N.
    #[arg(long, default_value_t = 5, conflicts_with = "seed_list")]
    seeds: u64,
    /// Explicit comma separated seeds.
    #[arg(long, value_delimiter = ',')]
    seed_list: Option<Vec<u64>>,
    /// relu or sigmoid between layers.
    #[arg(long, default_value = "relu")]
    activation: Activation,
    /// conditioned or plain.
    #[arg(long, default_value = "conditioned")]
    readout: ReadoutKind,
    /// Results CSV [default: stdout].
    #[arg(long)]
    output: Option<PathBuf>,
    /// Per-epoch metric sidecar CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Comma separated K values, or an inclusive range such as 1-10.
    #[arg(long, default_value = "1-10")]
    k_list: String,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Result files written by train or sweep-k.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Also write the cells as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

impl RunArgs {
    fn into_config(self) -> RunConfig {
        RunConfig {
            task: self.task,
            dataset: self.dataset,
            features: self.features,
            cluster_features: self.cluster_features,
            model: self.model,
            clusterer: self.clusterer,
            aggregator: self.aggregator,
            k: self.k,
            d: self.d,
            total_dim: self.total_dim,
            hidden_dim: self.hidden_dim,
            layers: self.layers,
            epochs: self.epochs,
            lr: self.lr,
            seeds: self.seed_list.unwrap_or_else(|| (0..self.seeds).collect()),
            activation: self.activation,
            readout: self.readout,
            output: self.output,
            trace: self.trace,
        }
    }
}

/// Parses `1,2,5` or `1-10`.
pub fn parse_k_list(text: &str) -> Result<Vec<usize>> {
    let bad = || Error::invalid(format!("cannot read K list {text:?}"));
    if let Some((a, b)) = text.split_once('-') {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| bad()))
        .collect::<Result<Vec<_>>>()
        .and_then(|v| if v.is_empty() { Err(bad()) } else { Ok(v) })
}

fn emit(rows: &[ResultRow], output: Option<&PathBuf>) -> Result<()> {
    match output {
        Some(path) => write_rows_to(path, rows),
        None => write_rows(std::io::stdout().lock(), rows),
    }
}

fn summarize(o: &TrainOutcome) {
    let k = &o.key;
    eprintln!(
        "{} {} {} {} K={} D={}: test {:.4} ± {:.4} over {} seed(s)",
        k.dataset, k.task, k.model, k.features, k.k, k.d, o.aggregate.mean, o.aggregate.std, o.aggregate.runs
    );
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(args) => {
            let cfg = args.into_config();
            let outcome = run_train(&cfg)?;
            emit(&outcome.rows, cfg.output.as_ref())?;
            if let Some(path) = &cfg.trace {
                write_trace(path, &[&outcome])?;
            }
            summarize(&outcome);
        }
        Command::SweepK(args) => {
            let ks = parse_k_list(&args.k_list)?;
            let cfg = args.run.into_config();
            cfg.validate()?;
            let bundle = load_bundle(&cfg.dataset)?;
            let results = run_sweep_on(&bundle, &cfg, &ks)?;
            let rows: Vec<ResultRow> = results.iter().flat_map(|(r, _)| r.iter().cloned()).collect();
            emit(&rows, cfg.output.as_ref())?;
            let outcomes: Vec<&TrainOutcome> = results.iter().filter_map(|(_, o)| o.as_ref()).collect();
            if let Some(path) = &cfg.trace {
                write_trace(path, &outcomes)?;
            }
            outcomes.iter().for_each(|o| summarize(o));
        }
        Command::Report(args) => {
            let mut rows = Vec::new();
            for f in &args.files {
                rows.extend(read_rows_from(f)?);
            }
            let report = build_report(&rows)?;
            print!("{}", report.render());
            std::io::stdout().flush().ok();
            if let Some(path) = &args.json {
                std::fs::write(path, report.to_json() + "\n").map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
            }
        }
    }
    Ok(())
}

/// Runs the command line and returns the process exit code: 0 on success,
/// 1 for usage errors, 2 for data errors, 3 for numeric failures.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
