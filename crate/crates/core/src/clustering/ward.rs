use super::{canonicalize, ClusterLabels};
use crate::error::{Error, Result};
use crate::numeric::{matmul, Matrix};

/// Default largest input accepted by [`ward_cluster`]. The pairwise table
/// needs `n (n - 1) / 2` doubles, about 2.5 GB at this size.
pub const WARD_MAX_NODES: usize = 25_000;

const BAND_ROWS: usize = 256;

/// Ward agglomerative clustering cut at `k` clusters.
pub fn ward_cluster(x: &Matrix, k: usize) -> Result<ClusterLabels> {
    ward_cluster_with_limit(x, k, WARD_MAX_NODES)
}

/// As [`ward_cluster`] with an explicit node limit.
pub fn ward_cluster_with_limit(x: &Matrix, k: usize, max_nodes: usize) -> Result<ClusterLabels> {
    let n = x.rows();
    if k == 0 {
        return Err(Error::invalid("ward clustering needs at least one cluster"));
    }
    if k > n {
        return Err(Error::invalid(format!("ward clustering asked for {k} clusters of {n} points")));
    }
    if n > max_nodes {
        return Err(Error::invalid(format!(
            "ward clustering of {n} points exceeds the limit of {max_nodes}; use kmeans instead"
        )));
    }
    if k == 1 {
        return Ok(canonicalize(&vec![0; n], k));
    }
    if k == n {
        return Ok(canonicalize(&(0..n).collect::<Vec<_>>(), k));
    }
    let mut table = Condensed::squared_euclidean(x)?;
    let mut merges = nn_chain(&mut table, n);
    merges.sort_by(|a, b| a.height.total_cmp(&b.height));

    let mut parent: Vec<usize> = (0..n).collect();
    for m in merges.iter().take(n - k) {
        let (ra, rb) = (find(&mut parent, m.a), find(&mut parent, m.b));
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
    }
    let roots: Vec<usize> = (0..n).map(|v| find(&mut parent, v)).collect();
    Ok(canonicalize(&roots, k))
}

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

struct Merge {
    a: usize,
    b: usize,
    height: f64,
}

/// Upper triangle of a symmetric matrix without the diagonal.
struct Condensed {
    n: usize,
    d: Vec<f64>,
}

impl Condensed {
    fn squared_euclidean(x: &Matrix) -> Result<Self> {
        let n = x.rows();
        let xt = x.transpose();
        let norms: Vec<f64> = x.iter_rows().map(|r| r.iter().map(|v| v * v).sum()).collect();
        let mut d = vec![0.0; n * (n - 1) / 2];
        let mut start = 0;
        while start < n {
            let len = BAND_ROWS.min(n - start);
            let gram = matmul(&x.slice_rows(start, len)?, &xt)?;
            for r in 0..len {
                let i = start + r;
                let g = gram.row(r);
                let base = Self::offset(n, i);
                for j in i + 1..n {
                    d[base + j - i - 1] = (norms[i] + norms[j] - 2.0 * g[j]).max(0.0);
                }
            }
            start += len;
        }
        Ok(Self { n, d })
    }

    #[inline]
    fn offset(n: usize, i: usize) -> usize {
        i * (2 * n - i - 1) / 2
    }

    #[inline]
    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        Self::offset(self.n, i) + j - i - 1
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.d[self.index(i, j)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.index(i, j);
        self.d[idx] = v;
    }
}

/// Nearest-neighbour chain over squared distances with the Lance-Williams
/// update for Ward linkage. Merge heights are the updated squared
/// distances, i.e. twice the increase in within-cluster sum of squares.
fn nn_chain(table: &mut Condensed, n: usize) -> Vec<Merge> {
    let mut size = vec![1usize; n];
    let mut active = vec![true; n];
    let mut merges = Vec::with_capacity(n - 1);
    let mut chain: Vec<usize> = Vec::with_capacity(n);

    while merges.len() + 1 < n {
        if chain.is_empty() {
            chain.push(active.iter().position(|&a| a).expect("an active cluster remains"));
        }
        let a = *chain.last().expect("chain is non-empty");
        let prev = chain.len().checked_sub(2).map(|i| chain[i]);
        let (mut best, mut best_d) = match prev {
            Some(p) => (p, table.get(a, p)),
            None => (usize::MAX, f64::INFINITY),
        };
        for y in 0..n {
            if y == a || !active[y] {
                continue;
            }
            let d = table.get(a, y);
            if d < best_d || (d == best_d && Some(best) != prev && y < best) {
                best = y;
                best_d = d;
            }
        }
        if Some(best) == prev {
            chain.pop();
            chain.pop();
            let (lo, hi) = if a < best { (a, best) } else { (best, a) };
            merges.push(Merge {
                a: lo,
                b: hi,
                height: best_d,
            });
            let (ni, nj) = (size[lo] as f64, size[hi] as f64);
            let dij = best_d;
            active[hi] = false;
            for k in 0..n {
                if !active[k] || k == lo {
                    continue;
                }
                let nk = size[k] as f64;
                let v = ((nk + ni) * table.get(k, lo) + (nk + nj) * table.get(k, hi) - nk * dij) / (nk + ni + nj);
                table.set(k, lo, v);
            }
            size[lo] += size[hi];
        } else {
            chain.push(best);
        }
    }
    merges
}
