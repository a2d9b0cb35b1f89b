//! Eager reverse-mode differentiation over the matrix operations the models
//! use.
//!
//! Every operation is evaluated when it is recorded. Because nodes are only
//! ever appended, creation order is already a topological order and the
//! backward sweep walks it in reverse, visiting each node once.

mod check;

pub use check::finite_difference_check;

use std::sync::Arc;

use crate::aggregate::{aggregate, aggregate_backward, Aggregator};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numeric::{matmul, matmul_nt, matmul_tn, Elementwise, Matrix};

/// Primitive operations that can be recorded on a [`Tape`].
#[derive(Clone, Debug)]
pub enum OpKind {
    MatMul,
    Add,
    /// `m x n` plus a `1 x n` row broadcast over every row.
    AddRow,
    Map(Elementwise),
    ConcatCols,
    SliceRows { start: usize, len: usize },
    /// Multiplies row `r` by the constant `w[r]`.
    ScaleRows(Arc<Vec<f64>>),
    Aggregate {
        kind: Aggregator,
        graph: Arc<Graph>,
        weights: Option<Arc<Vec<f64>>>,
    },
    /// Row selection; the adjoint scatter-adds.
    Gather(Arc<Vec<usize>>),
    /// Per-row dot product of two equally shaped inputs, giving `n x 1`.
    RowDot,
    Sum,
    Mean,
    /// Mean binary cross-entropy of `n x 1` logits against fixed 0/1 labels.
    BceWithLogits(Arc<Vec<f64>>),
    /// Mean softmax cross-entropy of `n x c` logits against class ids.
    SoftmaxCrossEntropy(Arc<Vec<usize>>),
}

/// Handle to a value on a tape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var {
    id: usize,
    rows: usize,
    cols: usize,
}

impl Var {
    pub fn id(&self) -> usize {
        self.id
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }
}

#[derive(Clone, Debug)]
enum Source {
    Parameter,
    Constant,
    Op(OpKind, Vec<Var>),
}

#[derive(Clone, Debug)]
struct Node {
    value: Arc<Matrix>,
    source: Source,
    needs_grad: bool,
    argmax: Option<Vec<u32>>,
}

/// Records operations and their values for a single forward pass.
#[derive(Clone, Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Gradients of a scalar with respect to every node of a tape.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Matrix>>,
    shapes: Vec<(usize, usize)>,
}

impl Gradients {
    /// Gradient for `v`; exactly zero when `v` does not influence the loss.
    pub fn get(&self, v: Var) -> Matrix {
        match &self.grads[v.id] {
            Some(g) => g.clone(),
            None => {
                let (r, c) = self.shapes[v.id];
                Matrix::zeros(r, c)
            }
        }
    }

    /// Moves the gradient out, leaving nothing behind.
    pub fn take(&mut self, v: Var) -> Matrix {
        self.grads[v.id].take().unwrap_or_else(|| {
            let (r, c) = self.shapes[v.id];
            Matrix::zeros(r, c)
        })
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// A differentiable leaf.
    pub fn parameter(&mut self, value: Matrix) -> Var {
        self.push_leaf(Arc::new(value), Source::Parameter, true)
    }

    /// A leaf that never receives a gradient.
    pub fn constant(&mut self, value: Matrix) -> Var {
        self.push_leaf(Arc::new(value), Source::Constant, false)
    }

    /// Constant leaf sharing storage with the caller (avoids copying large
    /// feature matrices every epoch).
    pub fn constant_shared(&mut self, value: Arc<Matrix>) -> Var {
        self.push_leaf(value, Source::Constant, false)
    }

    fn push_leaf(&mut self, value: Arc<Matrix>, source: Source, needs_grad: bool) -> Var {
        let (rows, cols) = value.shape();
        self.nodes.push(Node {
            value,
            source,
            needs_grad,
            argmax: None,
        });
        Var {
            id: self.nodes.len() - 1,
            rows,
            cols,
        }
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.id].value
    }

    pub fn shared_value(&self, v: Var) -> Arc<Matrix> {
        Arc::clone(&self.nodes[v.id].value)
    }

    /// Evaluates `op` on `inputs` and appends the result.
    pub fn record(&mut self, op: OpKind, inputs: &[Var]) -> Result<Var> {
        for v in inputs {
            if v.id >= self.nodes.len() {
                return Err(Error::invalid(format!("variable {} does not belong to this tape", v.id)));
            }
        }
        check_shapes(&op, inputs)?;
        let values: Vec<&Matrix> = inputs.iter().map(|v| self.nodes[v.id].value.as_ref()).collect();
        let (value, argmax) = evaluate(&op, &values)?;
        let needs_grad = inputs.iter().any(|v| self.nodes[v.id].needs_grad);
        let (rows, cols) = value.shape();
        self.nodes.push(Node {
            value: Arc::new(value),
            source: Source::Op(op, inputs.to_vec()),
            needs_grad,
            argmax,
        });
        Ok(Var {
            id: self.nodes.len() - 1,
            rows,
            cols,
        })
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.record(OpKind::MatMul, &[a, b])
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.record(OpKind::Add, &[a, b])
    }

    pub fn add_row(&mut self, a: Var, row: Var) -> Result<Var> {
        self.record(OpKind::AddRow, &[a, row])
    }

    pub fn map(&mut self, a: Var, f: Elementwise) -> Result<Var> {
        self.record(OpKind::Map(f), &[a])
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        self.map(a, Elementwise::Relu)
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        self.map(a, Elementwise::Sigmoid)
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        self.record(OpKind::ConcatCols, parts)
    }

    pub fn slice_rows(&mut self, a: Var, start: usize, len: usize) -> Result<Var> {
        self.record(OpKind::SliceRows { start, len }, &[a])
    }

    pub fn scale_rows(&mut self, a: Var, weights: Arc<Vec<f64>>) -> Result<Var> {
        self.record(OpKind::ScaleRows(weights), &[a])
    }

    pub fn aggregate(
        &mut self,
        a: Var,
        kind: Aggregator,
        graph: Arc<Graph>,
        weights: Option<Arc<Vec<f64>>>,
    ) -> Result<Var> {
        self.record(OpKind::Aggregate { kind, graph, weights }, &[a])
    }

    pub fn gather(&mut self, a: Var, rows: Arc<Vec<usize>>) -> Result<Var> {
        self.record(OpKind::Gather(rows), &[a])
    }

    pub fn row_dot(&mut self, a: Var, b: Var) -> Result<Var> {
        self.record(OpKind::RowDot, &[a, b])
    }

    pub fn sum(&mut self, a: Var) -> Result<Var> {
        self.record(OpKind::Sum, &[a])
    }

    pub fn mean(&mut self, a: Var) -> Result<Var> {
        self.record(OpKind::Mean, &[a])
    }

    pub fn bce_with_logits(&mut self, logits: Var, labels: Arc<Vec<f64>>) -> Result<Var> {
        self.record(OpKind::BceWithLogits(labels), &[logits])
    }

    pub fn softmax_cross_entropy(&mut self, logits: Var, labels: Arc<Vec<usize>>) -> Result<Var> {
        self.record(OpKind::SoftmaxCrossEntropy(labels), &[logits])
    }

    /// Recomputes every node from the leaves.
    pub fn replay(&self) -> Result<Vec<Matrix>> {
        let mut values: Vec<Matrix> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let v = match &node.source {
                Source::Parameter | Source::Constant => node.value.as_ref().clone(),
                Source::Op(op, inputs) => {
                    let ins: Vec<&Matrix> = inputs.iter().map(|v| &values[v.id]).collect();
                    evaluate(op, &ins)?.0
                }
            };
            values.push(v);
        }
        Ok(values)
    }

    /// Gradients of the scalar `loss` with respect to every node.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        if loss.shape() != (1, 1) {
            return Err(Error::ShapeMismatch {
                op: "backward",
                left: loss.shape(),
                right: (1, 1),
            });
        }
        let shapes: Vec<_> = self.nodes.iter().map(|n| n.value.shape()).collect();
        let mut grads: Vec<Option<Matrix>> = vec![None; loss.id + 1];
        grads.resize(self.nodes.len(), None);
        if self.nodes[loss.id].needs_grad {
            grads[loss.id] = Some(Matrix::scalar(1.0));
        }
        for id in (0..=loss.id).rev() {
            let node = &self.nodes[id];
            let Source::Op(op, inputs) = &node.source else {
                continue;
            };
            if !node.needs_grad {
                continue;
            }
            let Some(upstream) = grads[id].take() else {
                continue;
            };
            let wants: Vec<bool> = inputs.iter().map(|v| self.nodes[v.id].needs_grad).collect();
            let input_values: Vec<&Matrix> = inputs.iter().map(|v| self.nodes[v.id].value.as_ref()).collect();
            let local = adjoint(op, &input_values, &node.value, node.argmax.as_deref(), &upstream, &wants)?;
            for ((v, g), want) in inputs.iter().zip(local).zip(&wants) {
                if !want {
                    continue;
                }
                let Some(g) = g else { continue };
                match &mut grads[v.id] {
                    Some(acc) => acc.add_assign(&g),
                    slot => *slot = Some(g),
                }
            }
            // Keep non-leaf gradients around for inspection.
            grads[id] = Some(upstream);
        }
        Ok(Gradients { grads, shapes })
    }
}

fn mismatch(op: &'static str, left: (usize, usize), right: (usize, usize)) -> Error {
    Error::ShapeMismatch { op, left, right }
}

fn check_shapes(op: &OpKind, inputs: &[Var]) -> Result<()> {
    let arity = |n: usize, name: &'static str| -> Result<()> {
        if inputs.len() != n {
            return Err(Error::invalid(format!("{name} takes {n} inputs, got {}", inputs.len())));
        }
        Ok(())
    };
    match op {
        OpKind::MatMul => {
            arity(2, "matmul")?;
            if inputs[0].cols != inputs[1].rows {
                return Err(mismatch("matmul", inputs[0].shape(), inputs[1].shape()));
            }
        }
        OpKind::Add | OpKind::RowDot => {
            arity(2, "add")?;
            if inputs[0].shape() != inputs[1].shape() {
                return Err(mismatch("add", inputs[0].shape(), inputs[1].shape()));
            }
        }
        OpKind::AddRow => {
            arity(2, "add_row")?;
            if inputs[1].rows != 1 || inputs[1].cols != inputs[0].cols {
                return Err(mismatch("add_row", inputs[0].shape(), inputs[1].shape()));
            }
        }
        OpKind::Map(_) | OpKind::Sum | OpKind::Mean => arity(1, "unary op")?,
        OpKind::ConcatCols => {
            if inputs.is_empty() {
                return Err(Error::invalid("concat of zero inputs"));
            }
            let rows = inputs[0].rows;
            if let Some(bad) = inputs.iter().find(|v| v.rows != rows) {
                return Err(mismatch("concat_cols", inputs[0].shape(), bad.shape()));
            }
        }
        OpKind::SliceRows { start, len } => {
            arity(1, "slice_rows")?;
            if start + len > inputs[0].rows {
                return Err(mismatch("slice_rows", inputs[0].shape(), (start + len, inputs[0].cols)));
            }
        }
        OpKind::ScaleRows(w) => {
            arity(1, "scale_rows")?;
            if w.len() != inputs[0].rows {
                return Err(mismatch("scale_rows", inputs[0].shape(), (w.len(), 1)));
            }
        }
        OpKind::Aggregate { graph, weights, .. } => {
            arity(1, "aggregate")?;
            if graph.num_nodes() != inputs[0].rows {
                return Err(mismatch("aggregate", inputs[0].shape(), (graph.num_nodes(), inputs[0].cols)));
            }
            if let Some(w) = weights {
                if w.len() != inputs[0].rows {
                    return Err(mismatch("aggregate weights", inputs[0].shape(), (w.len(), 1)));
                }
            }
        }
        OpKind::Gather(rows) => {
            arity(1, "gather")?;
            if let Some(&r) = rows.iter().find(|&&r| r >= inputs[0].rows) {
                return Err(Error::invalid(format!(
                    "gather index {r} out of range for {} rows",
                    inputs[0].rows
                )));
            }
        }
        OpKind::BceWithLogits(labels) => {
            arity(1, "bce_with_logits")?;
            if inputs[0].cols != 1 || labels.len() != inputs[0].rows {
                return Err(mismatch("bce_with_logits", inputs[0].shape(), (labels.len(), 1)));
            }
        }
        OpKind::SoftmaxCrossEntropy(labels) => {
            arity(1, "softmax_cross_entropy")?;
            if labels.len() != inputs[0].rows {
                return Err(mismatch("softmax_cross_entropy", inputs[0].shape(), (labels.len(), 1)));
            }
            if let Some(&c) = labels.iter().find(|&&c| c >= inputs[0].cols) {
                return Err(Error::invalid(format!(
                    "class id {c} out of range for {} logits",
                    inputs[0].cols
                )));
            }
        }
    }
    Ok(())
}

/// Numerically stable `log(1 + exp(-|z|))`-based binary cross-entropy term.
#[inline]
pub(crate) fn bce_term(z: f64, y: f64) -> f64 {
    z.max(0.0) - z * y + (-z.abs()).exp().ln_1p()
}

pub(crate) fn log_sum_exp(row: &[f64]) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = row.iter().map(|v| (v - max).exp()).sum();
    max + s.ln()
}

fn evaluate(op: &OpKind, x: &[&Matrix]) -> Result<(Matrix, Option<Vec<u32>>)> {
    let out = match op {
        OpKind::MatMul => matmul(x[0], x[1])?,
        OpKind::Add => x[0].add(x[1])?,
        OpKind::AddRow => {
            let mut out = x[0].clone();
            let b = x[1].row(0);
            for r in 0..out.rows() {
                for (o, &bv) in out.row_mut(r).iter_mut().zip(b) {
                    *o += bv;
                }
            }
            out
        }
        OpKind::Map(f) => x[0].map(*f),
        OpKind::ConcatCols => {
            let rows = x[0].rows();
            let cols: usize = x.iter().map(|m| m.cols()).sum();
            let mut out = Matrix::zeros(rows, cols);
            for r in 0..rows {
                let mut off = 0;
                let orow = out.row_mut(r);
                for m in x {
                    orow[off..off + m.cols()].copy_from_slice(m.row(r));
                    off += m.cols();
                }
            }
            out
        }
        OpKind::SliceRows { start, len } => x[0].slice_rows(*start, *len)?,
        OpKind::ScaleRows(w) => {
            let mut out = x[0].clone();
            for (r, &c) in w.iter().enumerate() {
                for v in out.row_mut(r) {
                    *v *= c;
                }
            }
            out
        }
        OpKind::Aggregate { kind, graph, weights } => {
            let (out, argmax) = aggregate(*kind, graph, weights.as_deref().map(|w| w.as_slice()), x[0]);
            return Ok((out, argmax));
        }
        OpKind::Gather(rows) => {
            let mut out = Matrix::zeros(rows.len(), x[0].cols());
            for (t, &r) in rows.iter().enumerate() {
                out.row_mut(t).copy_from_slice(x[0].row(r));
            }
            out
        }
        OpKind::RowDot => {
            let vals = (0..x[0].rows())
                .map(|r| x[0].row(r).iter().zip(x[1].row(r)).map(|(a, b)| a * b).sum())
                .collect();
            Matrix::column_vector(vals)
        }
        OpKind::Sum => Matrix::scalar(x[0].sum()),
        OpKind::Mean => {
            let n = x[0].data().len();
            Matrix::scalar(if n == 0 { 0.0 } else { x[0].sum() / n as f64 })
        }
        OpKind::BceWithLogits(labels) => {
            let n = labels.len();
            let total: f64 = x[0].data().iter().zip(labels.iter()).map(|(&z, &y)| bce_term(z, y)).sum();
            Matrix::scalar(if n == 0 { 0.0 } else { total / n as f64 })
        }
        OpKind::SoftmaxCrossEntropy(labels) => {
            let n = labels.len();
            let total: f64 = labels
                .iter()
                .enumerate()
                .map(|(r, &c)| {
                    let row = x[0].row(r);
                    log_sum_exp(row) - row[c]
                })
                .sum();
            Matrix::scalar(if n == 0 { 0.0 } else { total / n as f64 })
        }
    };
    Ok((out, None))
}

fn adjoint(
    op: &OpKind,
    x: &[&Matrix],
    out: &Matrix,
    argmax: Option<&[u32]>,
    up: &Matrix,
    wants: &[bool],
) -> Result<Vec<Option<Matrix>>> {
    let grads = match op {
        OpKind::MatMul => {
            let da = if wants[0] { Some(matmul_nt(up, x[1])?) } else { None };
            let db = if wants[1] { Some(matmul_tn(x[0], up)?) } else { None };
            vec![da, db]
        }
        OpKind::Add => vec![Some(up.clone()), Some(up.clone())],
        OpKind::AddRow => {
            let mut db = Matrix::zeros(1, up.cols());
            for r in 0..up.rows() {
                for (d, &g) in db.row_mut(0).iter_mut().zip(up.row(r)) {
                    *d += g;
                }
            }
            vec![Some(up.clone()), Some(db)]
        }
        OpKind::Map(f) => {
            let data = x[0]
                .data()
                .iter()
                .zip(out.data())
                .zip(up.data())
                .map(|((&xi, &yi), &g)| g * f.derivative(xi, yi))
                .collect();
            vec![Some(Matrix::from_vec(up.rows(), up.cols(), data)?)]
        }
        OpKind::ConcatCols => {
            let mut off = 0;
            x.iter()
                .map(|m| {
                    let part = up.select_columns(off..off + m.cols());
                    off += m.cols();
                    Some(part)
                })
                .collect()
        }
        OpKind::SliceRows { start, .. } => {
            let mut g = Matrix::zeros(x[0].rows(), x[0].cols());
            for r in 0..up.rows() {
                g.row_mut(start + r).copy_from_slice(up.row(r));
            }
            vec![Some(g)]
        }
        OpKind::ScaleRows(w) => {
            let mut g = up.clone();
            for (r, &c) in w.iter().enumerate() {
                for v in g.row_mut(r) {
                    *v *= c;
                }
            }
            vec![Some(g)]
        }
        OpKind::Aggregate { kind, graph, weights } => vec![Some(aggregate_backward(
            *kind,
            graph,
            weights.as_deref().map(|w| w.as_slice()),
            up,
            argmax,
        ))],
        OpKind::Gather(rows) => {
            let mut g = Matrix::zeros(x[0].rows(), x[0].cols());
            for (t, &r) in rows.iter().enumerate() {
                for (a, &u) in g.row_mut(r).iter_mut().zip(up.row(t)) {
                    *a += u;
                }
            }
            vec![Some(g)]
        }
        OpKind::RowDot => {
            let mut da = Matrix::zeros(x[0].rows(), x[0].cols());
            let mut db = Matrix::zeros(x[1].rows(), x[1].cols());
            for r in 0..x[0].rows() {
                let g = up.get(r, 0);
                for (d, &bv) in da.row_mut(r).iter_mut().zip(x[1].row(r)) {
                    *d = g * bv;
                }
                for (d, &av) in db.row_mut(r).iter_mut().zip(x[0].row(r)) {
                    *d = g * av;
                }
            }
            vec![Some(da), Some(db)]
        }
        OpKind::Sum => vec![Some(Matrix::filled(x[0].rows(), x[0].cols(), up.get(0, 0)))],
        OpKind::Mean => {
            let n = x[0].data().len().max(1) as f64;
            vec![Some(Matrix::filled(x[0].rows(), x[0].cols(), up.get(0, 0) / n))]
        }
        OpKind::BceWithLogits(labels) => {
            let n = labels.len().max(1) as f64;
            let scale = up.get(0, 0) / n;
            let data = x[0]
                .data()
                .iter()
                .zip(labels.iter())
                .map(|(&z, &y)| scale * (crate::numeric::Elementwise::Sigmoid.apply(z) - y))
                .collect();
            vec![Some(Matrix::from_vec(x[0].rows(), 1, data)?)]
        }
        OpKind::SoftmaxCrossEntropy(labels) => {
            let n = labels.len().max(1) as f64;
            let scale = up.get(0, 0) / n;
            let mut g = Matrix::zeros(x[0].rows(), x[0].cols());
            for (r, &c) in labels.iter().enumerate() {
                let row = x[0].row(r);
                let lse = log_sum_exp(row);
                let grow = g.row_mut(r);
                for (gv, &z) in grow.iter_mut().zip(row) {
                    *gv = scale * (z - lse).exp();
                }
                grow[c] -= scale;
            }
            vec![Some(g)]
        }
    };
    Ok(grads)
}
