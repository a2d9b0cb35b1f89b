//! Graph bundles on disk.
//!
//! A bundle is a directory holding
//!
//! * `meta.json` with `name`, `num_nodes`, `num_edges`, `num_features`,
//!   `num_classes` and optionally `num_source_edges` (the edge count of the
//!   upstream distribution before duplicate citations were merged),
//! * `edges.csv`, one `u,v` line per undirected edge, 0-indexed,
//! * `labels.csv`, one `node,label` line per node,
//! * `features.csv`, one comma separated row per node, or `features.bin`
//!   holding row-major little-endian `f32` values. The binary file wins when
//!   both are present.
//!
//! CSV files have no header and use LF line endings.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{canonical, Edge, Graph};
use crate::numeric::{rand_uniform, Matrix, RandomStream};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleMeta {
    pub name: String,
    pub num_nodes: usize,
    pub num_edges: usize,
    pub num_features: usize,
    pub num_classes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num_source_edges: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct GraphBundle {
    pub meta: BundleMeta,
    pub graph: Graph,
    pub features: Matrix,
    pub labels: Vec<usize>,
}

impl GraphBundle {
    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    pub fn num_classes(&self) -> usize {
        self.meta.num_classes
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(io_err(path))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file))
}

fn line_of(record: &csv::StringRecord) -> Option<usize> {
    record.position().map(|p| p.line() as usize)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize);
    Error::data(path, line, e.to_string())
}

fn parse_index(path: &Path, rec: &csv::StringRecord, field: usize) -> Result<usize> {
    let raw = rec.get(field).unwrap_or("").trim();
    raw.parse::<usize>()
        .map_err(|_| Error::data(path, line_of(rec), format!("expected a non-negative integer, found {raw:?}")))
}

fn expect_fields(path: &Path, rec: &csv::StringRecord, n: usize) -> Result<()> {
    if rec.len() != n {
        return Err(Error::data(
            path,
            line_of(rec),
            format!("expected {n} fields, found {}", rec.len()),
        ));
    }
    Ok(())
}

/// Reads and validates the bundle in `dir`.
pub fn load_bundle(dir: impl AsRef<Path>) -> Result<GraphBundle> {
    let dir = dir.as_ref();
    let meta_path = dir.join("meta.json");
    let text = fs::read_to_string(&meta_path).map_err(io_err(&meta_path))?;
    let meta: BundleMeta = serde_json::from_str(&text)
        .map_err(|e| Error::data(&meta_path, Some(e.line()), e.to_string()))?;
    let n = meta.num_nodes;

    let edges = read_edges(&dir.join("edges.csv"), n)?;
    if edges.len() != meta.num_edges {
        return Err(Error::data(
            dir.join("edges.csv"),
            None,
            format!("meta.json declares {} edges, file has {}", meta.num_edges, edges.len()),
        ));
    }
    let graph = Graph::new(n, &edges)?;
    let labels = read_labels(&dir.join("labels.csv"), n, meta.num_classes)?;

    let bin = dir.join("features.bin");
    let features = if bin.exists() {
        read_features_bin(&bin, n, meta.num_features)?
    } else {
        read_features_csv(&dir.join("features.csv"), n, meta.num_features)?
    };

    Ok(GraphBundle {
        meta,
        graph,
        features,
        labels,
    })
}

fn read_edges(path: &Path, n: usize) -> Result<Vec<Edge>> {
    let mut seen: HashSet<Edge> = HashSet::new();
    let mut edges = Vec::new();
    for rec in csv_reader(path)?.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        expect_fields(path, &rec, 2)?;
        let u = parse_index(path, &rec, 0)?;
        let v = parse_index(path, &rec, 1)?;
        let line = line_of(&rec);
        if u >= n || v >= n {
            return Err(Error::data(path, line, format!("edge ({u}, {v}) outside 0..{n}")));
        }
        if u == v {
            return Err(Error::data(path, line, format!("self-loop on node {u}")));
        }
        if !seen.insert(canonical(u, v)) {
            return Err(Error::data(path, line, format!("duplicate edge ({u}, {v})")));
        }
        edges.push((u, v));
    }
    Ok(edges)
}

fn read_labels(path: &Path, n: usize, classes: usize) -> Result<Vec<usize>> {
    let mut labels: Vec<Option<usize>> = vec![None; n];
    for rec in csv_reader(path)?.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        expect_fields(path, &rec, 2)?;
        let node = parse_index(path, &rec, 0)?;
        let label = parse_index(path, &rec, 1)?;
        let line = line_of(&rec);
        if node >= n {
            return Err(Error::data(path, line, format!("node {node} outside 0..{n}")));
        }
        if label >= classes {
            return Err(Error::data(path, line, format!("label {label} outside 0..{classes}")));
        }
        if labels[node].replace(label).is_some() {
            return Err(Error::data(path, line, format!("node {node} labeled twice")));
        }
    }
    labels
        .into_iter()
        .enumerate()
        .map(|(v, l)| l.ok_or_else(|| Error::data(path, None, format!("node {v} has no label"))))
        .collect()
}

fn read_features_csv(path: &Path, n: usize, f: usize) -> Result<Matrix> {
    let mut data = Vec::with_capacity(n * f);
    let mut rows = 0;
    for rec in csv_reader(path)?.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        expect_fields(path, &rec, f)?;
        for field in rec.iter() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::data(path, line_of(&rec), format!("malformed number {field:?}")))?;
            if !v.is_finite() {
                return Err(Error::data(path, line_of(&rec), format!("non-finite value {field:?}")));
            }
            data.push(v);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::data(path, None, format!("expected {n} feature rows, found {rows}")));
    }
    Matrix::from_vec(n, f, data)
}

fn read_features_bin(path: &Path, n: usize, f: usize) -> Result<Matrix> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    if bytes.len() != n * f * 4 {
        return Err(Error::data(
            path,
            None,
            format!("expected {} bytes for {n}x{f} f32 values, found {}", n * f * 4, bytes.len()),
        ));
    }
    let data: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    if let Some(i) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::data(path, None, format!("non-finite value at row {}", i / f.max(1))));
    }
    Matrix::from_vec(n, f, data)
}

/// Writes `bundle` in CSV form, creating `dir` if needed.
pub fn write_bundle(dir: impl AsRef<Path>, bundle: &GraphBundle) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let meta_path = dir.join("meta.json");
    let json = serde_json::to_string_pretty(&bundle.meta).map_err(|e| Error::data(&meta_path, None, e.to_string()))?;
    fs::write(&meta_path, json + "\n").map_err(io_err(&meta_path))?;

    write_lines(&dir.join("edges.csv"), |w| {
        for (u, v) in bundle.graph.edges() {
            writeln!(w, "{u},{v}")?;
        }
        Ok(())
    })?;
    write_lines(&dir.join("labels.csv"), |w| {
        for (v, l) in bundle.labels.iter().enumerate() {
            writeln!(w, "{v},{l}")?;
        }
        Ok(())
    })?;
    write_lines(&dir.join("features.csv"), |w| {
        for row in bundle.features.iter_rows() {
            let mut first = true;
            for x in row {
                if !first {
                    w.write_all(b",")?;
                }
                first = false;
                write!(w, "{x}")?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    })
}

fn write_lines(path: &PathBuf, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

/// Rescales each column to `[0, 1]`; constant columns become 0.
pub fn min_max_normalize(features: &Matrix) -> Matrix {
    let (n, f) = features.shape();
    let mut lo = vec![f64::INFINITY; f];
    let mut hi = vec![f64::NEG_INFINITY; f];
    for row in features.iter_rows() {
        for (j, &x) in row.iter().enumerate() {
            lo[j] = lo[j].min(x);
            hi[j] = hi[j].max(x);
        }
    }
    let mut out = Matrix::zeros(n, f);
    for r in 0..n {
        let src = features.row(r);
        for (j, o) in out.row_mut(r).iter_mut().enumerate() {
            let span = hi[j] - lo[j];
            *o = if span > 0.0 { (src[j] - lo[j]) / span } else { 0.0 };
        }
    }
    out
}

/// Uniform `[0, 1)` features of shape `n x dim`.
pub fn random_features(n: usize, dim: usize, stream: &mut RandomStream) -> Result<Matrix> {
    if dim == 0 {
        return Err(Error::invalid("random feature dimension must be positive"));
    }
    rand_uniform(stream, n, dim, 0.0, 1.0)
}
