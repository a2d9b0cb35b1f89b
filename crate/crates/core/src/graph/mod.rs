//! Undirected graphs in CSR form, edge splits and negative sampling.

mod split;

pub use split::{sample_negative_edges, split_edges, EdgeSplit};
pub(crate) use split::fraction_count;

use crate::error::{Error, Result};

/// An unordered node pair stored as `(min, max)`.
pub type Edge = (usize, usize);

#[inline]
pub(crate) fn canonical(u: usize, v: usize) -> Edge {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Undirected simple graph. Both directions are stored and every neighbor
/// list is sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    num_edges: usize,
}

impl Graph {
    /// Builds a graph from a list giving each unordered pair once.
    pub fn new(num_nodes: usize, edges: &[Edge]) -> Result<Self> {
        let mut degree = vec![0usize; num_nodes];
        for &(u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::EndpointOutOfRange { u, v, num_nodes });
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = Vec::with_capacity(num_nodes + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..num_nodes].to_vec();
        let mut neighbors = vec![0usize; offsets[num_nodes]];
        for &(u, v) in edges {
            neighbors[fill[u]] = v;
            fill[u] += 1;
            neighbors[fill[v]] = u;
            fill[v] += 1;
        }
        for v in 0..num_nodes {
            let list = &mut neighbors[offsets[v]..offsets[v + 1]];
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                let (a, b) = canonical(v, w[0]);
                return Err(Error::DuplicateEdge(a, b));
            }
        }
        Ok(Graph {
            offsets,
            neighbors,
            num_edges: edges.len(),
        })
    }

    /// Symmetrizes an arbitrary pair list: drops self-loops and repeated
    /// pairs in either direction.
    pub fn from_pairs_lossy(num_nodes: usize, pairs: &[Edge]) -> Result<Self> {
        let mut edges: Vec<Edge> = pairs
            .iter()
            .filter(|(u, v)| u != v)
            .map(|&(u, v)| canonical(u, v))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        Self::new(num_nodes, &edges)
    }

    #[inline]
    pub fn num_nodes(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of undirected edges.
    #[inline]
    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_nodes() && v < self.num_nodes() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Every edge once as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.num_edges);
        for u in 0..self.num_nodes() {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Count of unordered node pairs that are not edges.
    pub fn num_non_edges(&self) -> usize {
        let n = self.num_nodes();
        n * n.saturating_sub(1) / 2 - self.num_edges
    }
}
