use std::sync::Arc;

use super::{membership_schedule, LayerParams, PersonaConfig, ReadoutKind};
use crate::aggregate::Aggregator;
use crate::autodiff::{Tape, Var};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numeric::Matrix;

/// Everything about a forward pass that does not depend on the weights.
///
/// Memberships never depend on learned parameters, so the whole schedule
/// `C^0..C^L` is computed once and reused for every epoch.
#[derive(Clone, Debug)]
pub struct ForwardPlan {
    graph: Arc<Graph>,
    features: Arc<Matrix>,
    cfg: PersonaConfig,
    k: usize,
    /// `weights[l][i]`: column `i` of `C^{l+1}`. `None` for GraphSAGE.
    weights: Option<Vec<Vec<Arc<Vec<f64>>>>>,
    memberships: Vec<Matrix>,
}

fn column(m: &Matrix, c: usize) -> Arc<Vec<f64>> {
    Arc::new((0..m.rows()).map(|r| m.get(r, c)).collect())
}

impl ForwardPlan {
    /// Persona network with initial memberships `c0` (`n x K`).
    pub fn persona(graph: Arc<Graph>, features: Arc<Matrix>, c0: &Matrix, cfg: &PersonaConfig) -> Result<Self> {
        cfg.validate()?;
        if features.rows() != graph.num_nodes() {
            return Err(Error::ShapeMismatch {
                op: "features",
                left: features.shape(),
                right: (graph.num_nodes(), features.cols()),
            });
        }
        if c0.shape() != (graph.num_nodes(), cfg.k) {
            return Err(Error::ShapeMismatch {
                op: "memberships",
                left: c0.shape(),
                right: (graph.num_nodes(), cfg.k),
            });
        }
        let memberships = membership_schedule(c0, &graph, cfg.layers)?;
        let weights = memberships[1..]
            .iter()
            .map(|c| (0..cfg.k).map(|i| column(c, i)).collect())
            .collect();
        Ok(Self {
            graph,
            features,
            cfg: cfg.clone(),
            k: cfg.k,
            weights: Some(weights),
            memberships,
        })
    }

    /// Single-embedding GraphSAGE; `cfg.k` and `cfg.readout` are ignored.
    pub fn graphsage(graph: Arc<Graph>, features: Arc<Matrix>, cfg: &PersonaConfig) -> Result<Self> {
        let cfg = PersonaConfig { k: 1, ..cfg.clone() };
        cfg.validate()?;
        if features.rows() != graph.num_nodes() {
            return Err(Error::ShapeMismatch {
                op: "features",
                left: features.shape(),
                right: (graph.num_nodes(), features.cols()),
            });
        }
        let ones = Matrix::filled(graph.num_nodes(), 1, 1.0);
        Ok(Self {
            memberships: vec![ones; cfg.layers + 1],
            graph,
            features,
            k: 1,
            cfg,
            weights: None,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn config(&self) -> &PersonaConfig {
        &self.cfg
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn features(&self) -> &Arc<Matrix> {
        &self.features
    }

    /// `C^0..C^L`.
    pub fn memberships(&self) -> &[Matrix] {
        &self.memberships
    }

    pub fn final_memberships(&self) -> &Matrix {
        self.memberships.last().expect("schedule has C^0")
    }

    /// Width of the readout row.
    pub fn readout_dim(&self) -> usize {
        let last = if self.cfg.layers == 0 {
            self.features.cols()
        } else {
            self.cfg.out_dim
        };
        self.k * last
    }

    pub fn constant_params(&self, tape: &mut Tape, params: &[LayerParams]) -> Vec<(Var, Var)> {
        params
            .iter()
            .map(|p| (tape.constant(p.w.clone()), tape.constant(p.b.clone())))
            .collect()
    }

    pub fn parameter_params(&self, tape: &mut Tape, params: &[LayerParams]) -> Vec<(Var, Var)> {
        params
            .iter()
            .map(|p| (tape.parameter(p.w.clone()), tape.parameter(p.b.clone())))
            .collect()
    }

    fn check_params(&self, params: &[(Var, Var)]) -> Result<()> {
        let dims = self.cfg.layer_dims(self.features.cols());
        if params.len() != self.cfg.layers {
            return Err(Error::invalid(format!(
                "expected {} layers of parameters, got {}",
                self.cfg.layers,
                params.len()
            )));
        }
        for (l, (w, b)) in params.iter().enumerate() {
            let want = (2 * dims[l], dims[l + 1]);
            if w.shape() != want {
                return Err(Error::ShapeMismatch {
                    op: "layer weight",
                    left: w.shape(),
                    right: want,
                });
            }
            if b.shape() != (1, want.1) {
                return Err(Error::ShapeMismatch {
                    op: "layer bias",
                    left: b.shape(),
                    right: (1, want.1),
                });
            }
        }
        Ok(())
    }

    /// Final embedding of every persona, in persona order.
    pub fn embeddings(&self, tape: &mut Tape, params: &[(Var, Var)]) -> Result<Vec<Var>> {
        self.check_params(params)?;
        let x0 = tape.constant_shared(Arc::clone(&self.features));
        let mut xs = vec![x0; self.k];
        for (l, &(w, b)) in params.iter().enumerate() {
            let last = l + 1 == params.len();
            xs = self.layer(tape, l, &xs, w, b, last)?;
        }
        Ok(xs)
    }

    fn layer(&self, tape: &mut Tape, l: usize, xs: &[Var], w: Var, b: Var, last: bool) -> Result<Vec<Var>> {
        let in_dim = w.rows() / 2;
        let w_self = tape.slice_rows(w, 0, in_dim)?;
        let w_neigh = tape.slice_rows(w, in_dim, in_dim)?;
        let agg = self.cfg.aggregator;
        let shared = xs.iter().all(|v| *v == xs[0]);
        let mut cache: Option<(Var, Var)> = None;
        let mut out = Vec::with_capacity(xs.len());
        for (i, &x) in xs.iter().enumerate() {
            let weights = self.weights.as_ref().map(|w| Arc::clone(&w[l][i]));
            let (s, p) = match cache {
                Some(c) => c,
                None => {
                    let s = tape.matmul(x, w_self)?;
                    let p = if agg.is_linear() { tape.matmul(x, w_neigh)? } else { x };
                    if shared {
                        cache = Some((s, p));
                    }
                    (s, p)
                }
            };
            let msg = if agg.is_linear() {
                tape.aggregate(p, agg, Arc::clone(&self.graph), weights)?
            } else {
                let a = tape.aggregate(p, Aggregator::Max, Arc::clone(&self.graph), weights)?;
                tape.matmul(a, w_neigh)?
            };
            let z = tape.add(s, msg)?;
            let z = tape.add_row(z, b)?;
            out.push(if last { z } else { tape.map(z, self.cfg.activation.elementwise())? });
        }
        Ok(out)
    }

    /// Concatenated persona blocks, membership-scaled for the conditioned
    /// readout.
    pub fn readout(&self, tape: &mut Tape, embeddings: &[Var]) -> Result<Var> {
        let conditioned = self.cfg.readout == ReadoutKind::Conditioned && self.weights.is_some();
        if embeddings.len() == 1 && !conditioned {
            return Ok(embeddings[0]);
        }
        let c = self.final_memberships();
        let blocks = embeddings
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                if conditioned {
                    tape.scale_rows(e, column(c, i))
                } else {
                    Ok(e)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if blocks.len() == 1 {
            return Ok(blocks[0]);
        }
        tape.concat_cols(&blocks)
    }
}
