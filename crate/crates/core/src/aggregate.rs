//! Order-invariant neighbor reductions shared by the models and the tape.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::graph::Graph;
use crate::numeric::Matrix;

/// How membership-scaled neighbor rows are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Aggregator {
    Mean,
    Sum,
    Max,
}

impl Aggregator {
    /// Mean and sum commute with a linear map applied to every row.
    pub fn is_linear(self) -> bool {
        !matches!(self, Aggregator::Max)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Aggregator::Mean => "mean",
            Aggregator::Sum => "sum",
            Aggregator::Max => "max",
        }
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Aggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "mean" => Ok(Aggregator::Mean),
            "sum" => Ok(Aggregator::Sum),
            "max" => Ok(Aggregator::Max),
            other => Err(Error::invalid(format!("unknown aggregator {other:?}"))),
        }
    }
}

/// Sentinel in the argmax table for nodes without neighbors.
pub(crate) const NO_ARGMAX: u32 = u32::MAX;

/// Reduces `{ w_u * x_u : u in N(v) }` for every node `v`.
///
/// `weights = None` means every weight is one. Neighbors are visited in
/// ascending id order; for `Max` the first maximal neighbor wins, so ties go
/// to the lowest id. Empty neighborhoods produce a zero row. The second
/// return value is the per-entry argmax table for `Max`.
pub fn aggregate(kind: Aggregator, g: &Graph, weights: Option<&[f64]>, x: &Matrix) -> (Matrix, Option<Vec<u32>>) {
    let (n, d) = x.shape();
    debug_assert_eq!(n, g.num_nodes());
    let mut out = Matrix::zeros(n, d);
    match kind {
        Aggregator::Mean | Aggregator::Sum => {
            for v in 0..n {
                let nbrs = g.neighbors(v);
                if nbrs.is_empty() {
                    continue;
                }
                let acc = out.row_mut(v);
                for &u in nbrs {
                    let xu = x.row(u);
                    match weights {
                        Some(w) => {
                            let c = w[u];
                            for (a, &xv) in acc.iter_mut().zip(xu) {
                                *a += c * xv;
                            }
                        }
                        None => {
                            for (a, &xv) in acc.iter_mut().zip(xu) {
                                *a += xv;
                            }
                        }
                    }
                }
                if kind == Aggregator::Mean {
                    let deg = nbrs.len() as f64;
                    for a in acc.iter_mut() {
                        *a /= deg;
                    }
                }
            }
            (out, None)
        }
        Aggregator::Max => {
            let mut argmax = vec![NO_ARGMAX; n * d];
            for v in 0..n {
                let nbrs = g.neighbors(v);
                if nbrs.is_empty() {
                    continue;
                }
                let arg = &mut argmax[v * d..(v + 1) * d];
                let acc = out.row_mut(v);
                for (idx, &u) in nbrs.iter().enumerate() {
                    let c = weights.map_or(1.0, |w| w[u]);
                    for ((a, am), &xv) in acc.iter_mut().zip(arg.iter_mut()).zip(x.row(u)) {
                        let val = c * xv;
                        if idx == 0 || val > *a {
                            *a = val;
                            *am = u as u32;
                        }
                    }
                }
            }
            (out, Some(argmax))
        }
    }
}

/// Adjoint of [`aggregate`] with respect to `x`.
pub(crate) fn aggregate_backward(
    kind: Aggregator,
    g: &Graph,
    weights: Option<&[f64]>,
    grad_out: &Matrix,
    argmax: Option<&[u32]>,
) -> Matrix {
    let (n, d) = grad_out.shape();
    let mut grad = Matrix::zeros(n, d);
    let weight = |u: usize| weights.map_or(1.0, |w| w[u]);
    match kind {
        Aggregator::Mean | Aggregator::Sum => {
            for v in 0..n {
                let nbrs = g.neighbors(v);
                if nbrs.is_empty() {
                    continue;
                }
                let scale = if kind == Aggregator::Mean {
                    1.0 / nbrs.len() as f64
                } else {
                    1.0
                };
                let gv = grad_out.row(v);
                for &u in nbrs {
                    let c = weight(u) * scale;
                    for (a, &gval) in grad.row_mut(u).iter_mut().zip(gv) {
                        *a += c * gval;
                    }
                }
            }
        }
        Aggregator::Max => {
            let argmax = argmax.expect("max aggregation records its argmax");
            for v in 0..n {
                for j in 0..d {
                    let u = argmax[v * d + j];
                    if u == NO_ARGMAX {
                        continue;
                    }
                    let u = u as usize;
                    let cur = grad.get(u, j);
                    grad.set(u, j, cur + weight(u) * grad_out.get(v, j));
                }
            }
        }
    }
    grad
}
