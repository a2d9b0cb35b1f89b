//! The persona network, its readouts and heads, and the GraphSAGE baseline.
//!
//! Both models are built on a [`Tape`] by [`ForwardPlan`], so training and
//! plain inference share one code path. A layer maps every persona's
//! embedding matrix `X_i` to
//!
//! ```text
//! act( X_i W_self + agg_i(X_i) W_neigh + b )
//! ```
//!
//! where `W = [W_self; W_neigh]` acts on the concatenation of self and
//! message, `agg_i` weighs neighbor `u` by its membership `C_{u,i}`, and one
//! `W` is shared by all personas of a layer.

mod config;
mod plan;

pub use config::{Activation, ModelKind, PersonaConfig, ReadoutKind};
pub use plan::ForwardPlan;

use std::sync::Arc;

use crate::aggregate::{aggregate, Aggregator};
use crate::autodiff::Tape;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numeric::{matmul, rand_uniform, row_l1_normalize, Matrix, RandomStream};

/// Weight and bias of an affine map `x W + b`.
///
/// For message-passing layers `W` has `2 * in` rows: the first `in` act on
/// the node itself and the rest on the aggregated message.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams {
    pub w: Matrix,
    pub b: Matrix,
}

impl LayerParams {
    /// Uniform `(-a, a)` weights with `a = sqrt(6 / (rows + cols))`, zero bias.
    pub fn glorot(rows: usize, cols: usize, stream: &mut RandomStream) -> Result<Self> {
        let a = (6.0 / (rows + cols) as f64).sqrt();
        Ok(Self {
            w: rand_uniform(stream, rows, cols, -a, a)?,
            b: Matrix::zeros(1, cols),
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            w: Matrix::zeros(rows, cols),
            b: Matrix::zeros(1, cols),
        }
    }

    pub fn out_dim(&self) -> usize {
        self.w.cols()
    }
}

/// Message-passing layers for `in_dim` inputs, drawn in layer order.
pub fn init_layers(cfg: &PersonaConfig, in_dim: usize, stream: &mut RandomStream) -> Result<Vec<LayerParams>> {
    cfg.layer_dims(in_dim)
        .windows(2)
        .map(|d| LayerParams::glorot(2 * d[0], d[1], stream))
        .collect()
}

/// Per-persona embeddings and the memberships after the last layer.
#[derive(Clone, Debug, PartialEq)]
pub struct PersonaState {
    pub embeddings: Vec<Matrix>,
    pub memberships: Matrix,
}

impl PersonaState {
    pub fn k(&self) -> usize {
        self.embeddings.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.memberships.rows()
    }
}

/// One active persona of a node.
#[derive(Clone, Debug, PartialEq)]
pub struct Persona {
    pub index: usize,
    pub membership: f64,
    pub embedding: Vec<f64>,
}

/// `C_v + sum of C_u over neighbors`, renormalized to unit L1 norm.
pub fn membership_propagate(c: &Matrix, g: &Graph) -> Result<Matrix> {
    if c.rows() != g.num_nodes() {
        return Err(Error::ShapeMismatch {
            op: "membership_propagate",
            left: c.shape(),
            right: (g.num_nodes(), c.cols()),
        });
    }
    let mut out = c.clone();
    for v in 0..c.rows() {
        let row = out.row_mut(v);
        for &u in g.neighbors(v) {
            for (a, &x) in row.iter_mut().zip(c.row(u)) {
                *a += x;
            }
        }
    }
    // Isolated rows are already normalized; leave them bit-for-bit as given.
    let normalized = row_l1_normalize(&out)?;
    for v in 0..c.rows() {
        if g.degree(v) > 0 {
            out.row_mut(v).copy_from_slice(normalized.row(v));
        }
    }
    Ok(out)
}

/// `C^0, C^1, ..., C^layers`.
pub fn membership_schedule(c0: &Matrix, g: &Graph, layers: usize) -> Result<Vec<Matrix>> {
    let mut out = vec![c0.clone()];
    for _ in 0..layers {
        let next = membership_propagate(out.last().expect("non-empty"), g)?;
        out.push(next);
    }
    Ok(out)
}

/// Message for persona `i`: neighbors of each node weighted by their
/// membership in `i`, reduced by `kind`.
pub fn aggregate_neighbors(kind: Aggregator, c: &Matrix, x_i: &Matrix, g: &Graph, persona: usize) -> Matrix {
    let w: Vec<f64> = (0..c.rows()).map(|v| c.get(v, persona)).collect();
    aggregate(kind, g, Some(&w), x_i).0
}

/// Runs the persona network and returns its final state.
pub fn persona_forward(
    g: &Graph,
    features: &Matrix,
    c0: &Matrix,
    params: &[LayerParams],
    cfg: &PersonaConfig,
) -> Result<PersonaState> {
    let plan = ForwardPlan::persona(Arc::new(g.clone()), Arc::new(features.clone()), c0, cfg)?;
    let mut tape = Tape::new();
    let vars = plan.constant_params(&mut tape, params);
    let emb = plan.embeddings(&mut tape, &vars)?;
    Ok(PersonaState {
        embeddings: emb.iter().map(|&v| tape.value(v).clone()).collect(),
        memberships: plan.final_memberships().clone(),
    })
}
/// Plain GraphSAGE using `cfg.aggregator`; `cfg.k` is ignored.
/// GraphSAGE with mean aggregation; `cfg.k` is ignored.
pub fn graphsage_forward(g: &Graph, features: &Matrix, params: &[LayerParams], cfg: &PersonaConfig) -> Result<Matrix> {
    let plan = ForwardPlan::graphsage(Arc::new(g.clone()), Arc::new(features.clone()), cfg)?;
    let mut tape = Tape::new();
    let vars = plan.constant_params(&mut tape, params);
    let emb = plan.embeddings(&mut tape, &vars)?;
    Ok(tape.value(emb[0]).clone())
}

/// The personas with strictly positive membership, per node.
pub fn persona_set(state: &PersonaState) -> Vec<Vec<Persona>> {
    (0..state.num_nodes())
        .map(|v| {
            state
                .memberships
                .row(v)
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0.0)
                .map(|(i, &c)| Persona {
                    index: i,
                    membership: c,
                    embedding: state.embeddings[i].row(v).to_vec(),
                })
                .collect()
        })
        .collect()
}

/// Concatenates persona embeddings in persona order, each block scaled by
/// the node's membership for [`ReadoutKind::Conditioned`].
pub fn readout(state: &PersonaState, kind: ReadoutKind) -> Matrix {
    let n = state.num_nodes();
    let widths: Vec<usize> = state.embeddings.iter().map(|e| e.cols()).collect();
    let mut out = Matrix::zeros(n, widths.iter().sum());
    for v in 0..n {
        let row = out.row_mut(v);
        let mut off = 0;
        for (i, e) in state.embeddings.iter().enumerate() {
            let c = state.memberships.get(v, i);
            for (o, &x) in row[off..off + widths[i]].iter_mut().zip(e.row(v)) {
                *o = match kind {
                    ReadoutKind::Conditioned => c * x,
                    ReadoutKind::Plain => x,
                };
            }
            off += widths[i];
        }
    }
    out
}

/// Inner product of two readout rows (a logit).
pub fn link_score(readout: &Matrix, u: usize, v: usize) -> f64 {
    readout.row(u).iter().zip(readout.row(v)).map(|(a, b)| a * b).sum()
}

/// Class logits `readout W + b`.
pub fn classify(readout: &Matrix, head: &LayerParams) -> Result<Matrix> {
    if head.w.rows() != readout.cols() {
        return Err(Error::ShapeMismatch {
            op: "classify",
            left: readout.shape(),
            right: head.w.shape(),
        });
    }
    let mut out = matmul(readout, &head.w)?;
    for r in 0..out.rows() {
        for (o, &b) in out.row_mut(r).iter_mut().zip(head.b.row(0)) {
            *o += b;
        }
    }
    Ok(out)
}
