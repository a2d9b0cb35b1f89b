//! Hard initial persona assignment by clustering node features.

mod kmeans;
mod ward;

pub use kmeans::{kmeans, kmeans_fit, KMeansFit};
pub use ward::{ward_cluster, ward_cluster_with_limit, WARD_MAX_NODES};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numeric::{Matrix, RandomStream};

/// One label in `0..k` per node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterLabels {
    labels: Vec<usize>,
    k: usize,
}

impl ClusterLabels {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::invalid(format!("cluster label {bad} outside 0..{k}")));
        }
        Ok(Self { labels, k })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Sizes of every cluster, indexed by label.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            s[l] += 1;
        }
        s
    }
}

/// Renumbers labels in order of first appearance.
pub(crate) fn canonicalize(raw: &[usize], k: usize) -> ClusterLabels {
    let mut map = vec![usize::MAX; raw.iter().copied().max().map_or(0, |m| m + 1)];
    let mut next = 0;
    let labels = raw
        .iter()
        .map(|&l| {
            if map[l] == usize::MAX {
                map[l] = next;
                next += 1;
            }
            map[l]
        })
        .collect();
    ClusterLabels { labels, k }
}

/// One-hot membership rows: row `v` is the unit vector of `v`'s label.
pub fn labels_to_one_hot(labels: &ClusterLabels) -> Matrix {
    let mut m = Matrix::zeros(labels.len(), labels.k());
    for (v, &l) in labels.labels().iter().enumerate() {
        m.set(v, l, 1.0);
    }
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clusterer {
    KMeans,
    Ward,
}

impl Clusterer {
    pub fn as_str(self) -> &'static str {
        match self {
            Clusterer::KMeans => "kmeans",
            Clusterer::Ward => "ward",
        }
    }

    /// Runs the chosen algorithm with its default settings.
    pub fn cluster(self, x: &Matrix, k: usize, stream: &mut RandomStream) -> Result<ClusterLabels> {
        match self {
            Clusterer::KMeans => kmeans(x, k, stream, kmeans::DEFAULT_MAX_ITER, kmeans::DEFAULT_TOL),
            Clusterer::Ward => ward_cluster(x, k),
        }
    }
}

impl fmt::Display for Clusterer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Clusterer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmeans" => Ok(Clusterer::KMeans),
            "ward" => Ok(Clusterer::Ward),
            other => Err(Error::invalid(format!("unknown clusterer {other:?} (expected kmeans or ward)"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hot_rows() {
        let l = ClusterLabels::new(vec![0, 1], 2).unwrap();
        assert_eq!(labels_to_one_hot(&l).data(), &[1.0, 0.0, 0.0, 1.0]);
        let l = ClusterLabels::new(vec![0, 0], 3).unwrap();
        assert_eq!(labels_to_one_hot(&l).data(), &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let l = ClusterLabels::new(vec![2, 0, 1], 3).unwrap();
        let m = labels_to_one_hot(&l);
        assert_eq!(m.row(0), &[0.0, 0.0, 1.0]);
        assert_eq!(m.row(1), &[1.0, 0.0, 0.0]);
        assert_eq!(m.row(2), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn out_of_range_label_rejected() {
        assert!(ClusterLabels::new(vec![0, 3], 3).is_err());
    }

    #[test]
    fn canonical_order() {
        assert_eq!(canonicalize(&[4, 4, 1, 0, 1], 3).labels(), &[0, 0, 1, 2, 1]);
    }
}
