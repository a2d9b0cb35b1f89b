use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::train::{AggregateResult, RunResult};

pub const HEADER: [&str; 12] = [
    "dataset",
    "task",
    "model",
    "features",
    "clusterer",
    "aggregator",
    "K",
    "D",
    "seed",
    "best_epoch",
    "val_metric",
    "test_metric",
];

/// Value of the `seed` column.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedField {
    Seed(u64),
    Mean,
    Std,
    /// The configuration failed; metric columns are empty.
    Error,
}

impl fmt::Display for SeedField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeedField::Seed(s) => write!(f, "{s}"),
            SeedField::Mean => f.write_str("mean"),
            SeedField::Std => f.write_str("std"),
            SeedField::Error => f.write_str("error"),
        }
    }
}

impl std::str::FromStr for SeedField {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "mean" => Ok(SeedField::Mean),
            "std" => Ok(SeedField::Std),
            "error" => Ok(SeedField::Error),
            other => other
                .parse()
                .map(SeedField::Seed)
                .map_err(|_| format!("bad seed field {other:?}")),
        }
    }
}

/// Columns identifying a configuration.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConfigKey {
    pub dataset: String,
    pub task: String,
    pub model: String,
    pub features: String,
    pub clusterer: String,
    pub aggregator: String,
    pub k: usize,
    pub d: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub key: ConfigKey,
    pub seed: SeedField,
    /// Fractional for aggregate rows.
    pub best_epoch: Option<f64>,
    pub val_metric: Option<f64>,
    pub test_metric: Option<f64>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

impl ResultRow {
    pub fn from_run(key: &ConfigKey, run: &RunResult) -> Self {
        Self {
            key: key.clone(),
            seed: SeedField::Seed(run.seed),
            best_epoch: Some(run.best_epoch as f64),
            val_metric: Some(run.val_metric),
            test_metric: Some(run.test_metric),
        }
    }

    /// Mean and std rows over `runs`.
    pub fn aggregate(key: &ConfigKey, runs: &[RunResult]) -> Result<[ResultRow; 2]> {
        let stat = |f: &dyn Fn(&RunResult) -> f64| {
            AggregateResult::from_values(&runs.iter().map(f).collect::<Vec<_>>())
        };
        let epoch = stat(&|r| r.best_epoch as f64)?;
        let val = stat(&|r| r.val_metric)?;
        let test = stat(&|r| r.test_metric)?;
        Ok([
            Self {
                key: key.clone(),
                seed: SeedField::Mean,
                best_epoch: Some(epoch.mean),
                val_metric: Some(val.mean),
                test_metric: Some(test.mean),
            },
            Self {
                key: key.clone(),
                seed: SeedField::Std,
                best_epoch: Some(epoch.std),
                val_metric: Some(val.std),
                test_metric: Some(test.std),
            },
        ])
    }

    pub fn error(key: &ConfigKey) -> Self {
        Self {
            key: key.clone(),
            seed: SeedField::Error,
            best_epoch: None,
            val_metric: None,
            test_metric: None,
        }
    }

    fn fields(&self) -> [String; 12] {
        let k = &self.key;
        [
            k.dataset.clone(),
            k.task.clone(),
            k.model.clone(),
            k.features.clone(),
            k.clusterer.clone(),
            k.aggregator.clone(),
            k.k.to_string(),
            k.d.to_string(),
            self.seed.to_string(),
            opt(self.best_epoch),
            opt(self.val_metric),
            opt(self.test_metric),
        ]
    }
}

/// Writes the header and `rows` as LF-terminated CSV.
pub fn write_rows<W: Write>(out: W, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let wrap = |e: csv::Error| Error::invalid(format!("writing results: {e}"));
    w.write_record(HEADER).map_err(wrap)?;
    for r in rows {
        w.write_record(r.fields()).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::invalid(format!("writing results: {e}")))
}

pub fn write_rows_to(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_rows(std::io::BufWriter::new(file), rows)
}

/// Parses a results file, naming the offending line on failure.
pub fn read_rows<R: Read>(input: R, path: &Path) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(input);
    let header = rdr
        .headers()
        .map_err(|e| Error::data(path, Some(1), e.to_string()))?
        .clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(Error::data(path, Some(1), format!("expected header {}", HEADER.join(","))));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::data(path, e.position().map(|p| p.line() as usize), e.to_string()))?;
        let line = rec.position().map(|p| p.line() as usize);
        let bad = |msg: String| Error::data(path, line, msg);
        if rec.len() != HEADER.len() {
            return Err(bad(format!("expected {} fields, found {}", HEADER.len(), rec.len())));
        }
        let int = |i: usize| -> Result<usize> {
            rec[i].parse().map_err(|_| bad(format!("{} must be an integer, found {:?}", HEADER[i], &rec[i])))
        };
        let num = |i: usize| -> Result<Option<f64>> {
            if rec[i].is_empty() {
                return Ok(None);
            }
            rec[i]
                .parse()
                .map(Some)
                .map_err(|_| bad(format!("{} must be a number, found {:?}", HEADER[i], &rec[i])))
        };
        let seed: SeedField = rec[8].parse().map_err(bad)?;
        let row = ResultRow {
            key: ConfigKey {
                dataset: rec[0].to_string(),
                task: rec[1].to_string(),
                model: rec[2].to_string(),
                features: rec[3].to_string(),
                clusterer: rec[4].to_string(),
                aggregator: rec[5].to_string(),
                k: int(6)?,
                d: int(7)?,
            },
            seed,
            best_epoch: num(9)?,
            val_metric: num(10)?,
            test_metric: num(11)?,
        };
        if matches!(seed, SeedField::Seed(_) | SeedField::Mean) && row.test_metric.is_none() {
            return Err(bad("missing test_metric".into()));
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_rows_from(path: &Path) -> Result<Vec<ResultRow>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_rows(file, path)
}
