//! Run configuration, result tables and the command line.

pub mod cli;
mod config;
mod report;
mod results;

pub use config::{preset_total_dim, sweep_dims, RunConfig};
pub use report::{build_report, Cell, Report};
pub use results::{read_rows, read_rows_from, write_rows, write_rows_to, ConfigKey, ResultRow, SeedField, HEADER};

use std::io::Write;
use std::path::Path;

use crate::datasets::{load_bundle, GraphBundle};
use crate::error::{Error, Result};
use crate::model::ModelKind;
use crate::train::{multi_seed_run, AggregateResult, RunResult, TrainConfig};

/// Seed rows, aggregate rows and the underlying runs of one command.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub key: ConfigKey,
    pub rows: Vec<ResultRow>,
    pub runs: Vec<RunResult>,
    pub aggregate: AggregateResult,
}

pub fn config_key(bundle: &GraphBundle, cfg: &RunConfig, train: &TrainConfig) -> ConfigKey {
    ConfigKey {
        dataset: bundle.meta.name.clone(),
        task: cfg.task.to_string(),
        model: cfg.model.to_string(),
        features: cfg.features.to_string(),
        clusterer: cfg.clusterer.to_string(),
        aggregator: cfg.aggregator.to_string(),
        k: train.effective_k(),
        d: train.persona.out_dim,
    }
}

/// Trains every seed of `cfg` on an already loaded bundle.
pub fn run_train_on(bundle: &GraphBundle, cfg: &RunConfig) -> Result<TrainOutcome> {
    let train = cfg.train_config(bundle)?;
    let key = config_key(bundle, cfg, &train);
    let (runs, aggregate) = multi_seed_run(cfg.task, bundle, &train, &cfg.seeds)?;
    let mut rows: Vec<ResultRow> = runs.iter().map(|r| ResultRow::from_run(&key, r)).collect();
    rows.extend(ResultRow::aggregate(&key, &runs)?);
    Ok(TrainOutcome {
        key,
        rows,
        runs,
        aggregate,
    })
}

pub fn run_train(cfg: &RunConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let bundle = load_bundle(&cfg.dataset)?;
    run_train_on(&bundle, cfg)
}

/// Mean and std rows per `K`, with the readout width held at `total_dim`
/// (`D = total_dim / K`, rounded down). A failing `K` yields an error row
/// and the sweep moves on.
pub fn run_sweep_on(
    bundle: &GraphBundle,
    cfg: &RunConfig,
    ks: &[usize],
) -> Result<Vec<(Vec<ResultRow>, Option<TrainOutcome>)>> {
    if ks.is_empty() {
        return Err(Error::invalid("the K list is empty"));
    }
    if cfg.model != ModelKind::PersonaSage {
        return Err(Error::invalid("sweep-k needs --model personasage"));
    }
    let total = cfg
        .total_dim
        .unwrap_or_else(|| preset_total_dim(&bundle.meta.name, bundle.num_classes()));
    let mut out = Vec::with_capacity(ks.len());
    for (&k, d) in ks.iter().zip(sweep_dims(total, ks)) {
        let per_k = RunConfig {
            k: Some(k),
            d: Some(d),
            total_dim: Some(total),
            ..cfg.clone()
        };
        let outcome = if k == 0 || d == 0 {
            Err(Error::invalid(format!("K = {k} does not fit a readout of width {total}")))
        } else {
            run_train_on(bundle, &per_k)
        };
        match outcome {
            Ok(o) => {
                let aggregate = o.rows[o.rows.len() - 2..].to_vec();
                out.push((aggregate, Some(o)));
            }
            Err(e) => {
                eprintln!("K = {k}: {e}");
                let key = ConfigKey {
                    dataset: bundle.meta.name.clone(),
                    task: cfg.task.to_string(),
                    model: cfg.model.to_string(),
                    features: cfg.features.to_string(),
                    clusterer: cfg.clusterer.to_string(),
                    aggregator: cfg.aggregator.to_string(),
                    k,
                    d,
                };
                out.push((vec![ResultRow::error(&key)], None));
            }
        }
    }
    Ok(out)
}

/// Per-epoch metrics of every run, one CSV line per parameter state.
pub fn write_trace(path: &Path, outcomes: &[&TrainOutcome]) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(
        w,
        "dataset,task,model,features,clusterer,aggregator,K,D,seed,epoch,train_loss,val_metric,test_metric"
    )
    .map_err(io)?;
    for o in outcomes {
        let k = &o.key;
        for run in &o.runs {
            for e in &run.trace {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    k.dataset,
                    k.task,
                    k.model,
                    k.features,
                    k.clusterer,
                    k.aggregator,
                    k.k,
                    k.d,
                    run.seed,
                    e.epoch,
                    e.train_loss,
                    e.val_metric,
                    e.test_metric
                )
                .map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)
}
