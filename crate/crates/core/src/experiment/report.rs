use std::collections::{BTreeMap, HashSet};

use serde::Serialize;

use super::results::{ConfigKey, ResultRow, SeedField};
use crate::error::{Error, Result};
use crate::train::AggregateResult;

/// One table cell: the test metric over the runs of one configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub row: String,
    pub column: String,
    pub dataset: String,
    pub task: String,
    pub model: String,
    pub features: String,
    pub clusterer: String,
    pub aggregator: String,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "D")]
    pub d: usize,
    pub mean: f64,
    pub std: f64,
    /// Seed rows behind the cell; 0 when only aggregate rows were given.
    pub runs: usize,
}

/// Test metrics pivoted into model rows and dataset columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub cells: Vec<Cell>,
}

fn row_label(k: &ConfigKey) -> String {
    format!("{} {}/{} K={} D={}", k.model, k.clusterer, k.aggregator, k.k, k.d)
}

fn column_label(k: &ConfigKey) -> String {
    format!("{} {} {}", k.dataset, k.task, k.features)
}

/// Groups rows by configuration. Seed rows are re-aggregated (a seed seen
/// twice counts once); configurations with only aggregate rows keep them.
pub fn build_report(rows: &[ResultRow]) -> Result<Report> {
    let mut order: Vec<ConfigKey> = Vec::new();
    let mut groups: BTreeMap<ConfigKey, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        if r.seed == SeedField::Error {
            continue;
        }
        if !groups.contains_key(&r.key) {
            order.push(r.key.clone());
        }
        groups.entry(r.key.clone()).or_default().push(r);
    }
    let mut report = Report {
        rows: Vec::new(),
        columns: Vec::new(),
        cells: Vec::new(),
    };
    for key in order {
        let group = &groups[&key];
        let mut seen = HashSet::new();
        let values: Vec<f64> = group
            .iter()
            .filter_map(|r| match r.seed {
                SeedField::Seed(s) if seen.insert(s) => r.test_metric,
                _ => None,
            })
            .collect();
        let (mean, std, runs) = if values.is_empty() {
            let find = |f: SeedField| group.iter().find(|r| r.seed == f).and_then(|r| r.test_metric);
            let mean = find(SeedField::Mean)
                .ok_or_else(|| Error::invalid(format!("no usable rows for {}", row_label(&key))))?;
            (mean, find(SeedField::Std).unwrap_or(0.0), 0)
        } else {
            let a = AggregateResult::from_values(&values)?;
            (a.mean, a.std, a.runs)
        };
        let row = row_label(&key);
        let column = column_label(&key);
        if !report.rows.contains(&row) {
            report.rows.push(row.clone());
        }
        if !report.columns.contains(&column) {
            report.columns.push(column.clone());
        }
        report.cells.push(Cell {
            row,
            column,
            dataset: key.dataset.clone(),
            task: key.task.clone(),
            model: key.model.clone(),
            features: key.features.clone(),
            clusterer: key.clusterer.clone(),
            aggregator: key.aggregator.clone(),
            k: key.k,
            d: key.d,
            mean,
            std,
            runs,
        });
    }
    Ok(report)
}

impl Report {
    pub fn cell(&self, row: &str, column: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.row == row && c.column == column)
    }

    /// Fixed-width text table, `mean ± std` per cell.
    pub fn render(&self) -> String {
        let text = |r: &str, c: &str| {
            self.cell(r, c)
                .map(|cell| format!("{:.4} ± {:.4}", cell.mean, cell.std))
                .unwrap_or_else(|| "-".into())
        };
        let first = self.rows.iter().map(|r| r.chars().count()).max().unwrap_or(0).max(5);
        let widths: Vec<usize> = self
            .columns
            .iter()
            .map(|c| {
                self.rows
                    .iter()
                    .map(|r| text(r, c).chars().count())
                    .max()
                    .unwrap_or(0)
                    .max(c.chars().count())
            })
            .collect();
        let mut out = format!("{:<first$}", "model");
        for (c, w) in self.columns.iter().zip(&widths) {
            out += &format!("  {c:>w$}");
        }
        out.push('\n');
        for r in &self.rows {
            out += &format!("{r:<first$}");
            for (c, w) in self.columns.iter().zip(&widths) {
                out += &format!("  {:>w$}", text(r, c));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.cells).expect("cells serialize")
    }
}
