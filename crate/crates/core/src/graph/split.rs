use std::collections::HashSet;

use super::{canonical, Edge, Graph};
use crate::error::{Error, Result};
use crate::numeric::RandomStream;

/// Positive and negative edge partitions for link prediction, plus the
/// graph used for message passing (training positives only).
#[derive(Clone, Debug)]
pub struct EdgeSplit {
    pub train_pos: Vec<Edge>,
    pub val_pos: Vec<Edge>,
    pub test_pos: Vec<Edge>,
    pub train_neg: Vec<Edge>,
    pub val_neg: Vec<Edge>,
    pub test_neg: Vec<Edge>,
    pub message_graph: Graph,
}

pub(crate) fn fraction_count(frac: f64, total: usize) -> usize {
    // The epsilon keeps e.g. 0.29 * 100 from flooring to 28.
    ((frac * total as f64) + 1e-9).floor() as usize
}

/// Shuffles the edges and partitions them into test, validation and train
/// positives, then draws an equal number of non-edges split with the same
/// counts. Held-out positives are absent from the message graph.
pub fn split_edges(g: &Graph, test_frac: f64, val_frac: f64, stream: &mut RandomStream) -> Result<EdgeSplit> {
    if !(test_frac >= 0.0 && val_frac >= 0.0 && test_frac + val_frac < 1.0) {
        return Err(Error::invalid(format!(
            "holdout fractions must be nonnegative and sum below 1 (test {test_frac}, val {val_frac})"
        )));
    }
    let mut edges = g.edges();
    stream.shuffle(&mut edges);
    let m = edges.len();
    let n_test = fraction_count(test_frac, m);
    let n_val = fraction_count(val_frac, m);

    let negatives = sample_negative_edges(g, m, stream, &HashSet::new())?;

    let test_pos = edges[..n_test].to_vec();
    let val_pos = edges[n_test..n_test + n_val].to_vec();
    let train_pos = edges[n_test + n_val..].to_vec();
    let test_neg = negatives[..n_test].to_vec();
    let val_neg = negatives[n_test..n_test + n_val].to_vec();
    let train_neg = negatives[n_test + n_val..].to_vec();

    let mut sorted_train = train_pos.clone();
    sorted_train.sort_unstable();
    let message_graph = Graph::new(g.num_nodes(), &sorted_train)?;

    Ok(EdgeSplit {
        train_pos,
        val_pos,
        test_pos,
        train_neg,
        val_neg,
        test_neg,
        message_graph,
    })
}

/// Draws `count` distinct unordered non-edges uniformly at random, none of
/// which appear in `exclude`.
pub fn sample_negative_edges(
    g: &Graph,
    count: usize,
    stream: &mut RandomStream,
    exclude: &HashSet<Edge>,
) -> Result<Vec<Edge>> {
    let n = g.num_nodes();
    let excluded_non_edges = exclude
        .iter()
        .filter(|&&(u, v)| u != v && u < n && v < n && !g.has_edge(u, v))
        .map(|&(u, v)| canonical(u, v))
        .collect::<HashSet<_>>()
        .len();
    let available = g.num_non_edges() - excluded_non_edges;
    if count > available {
        return Err(Error::InsufficientNonEdges {
            requested: count,
            available,
        });
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let eligible = |u: usize, v: usize| {
        let e = canonical(u, v);
        !g.has_edge(u, v) && !exclude.contains(&e)
    };

    if count.saturating_mul(2) > available {
        // Dense regime: enumerate and take a uniformly random prefix.
        let mut pool: Vec<Edge> = Vec::with_capacity(available);
        for u in 0..n {
            for v in u + 1..n {
                if eligible(u, v) {
                    pool.push((u, v));
                }
            }
        }
        for i in 0..count {
            let j = i + stream.below(pool.len() - i);
            pool.swap(i, j);
        }
        pool.truncate(count);
        return Ok(pool);
    }

    let mut chosen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = stream.below(n);
        let v = stream.below(n);
        if u == v || !eligible(u, v) {
            continue;
        }
        let e = canonical(u, v);
        if chosen.insert(e) {
            out.push(e);
        }
    }
    Ok(out)
}
