use super::{canonicalize, ClusterLabels};
use crate::error::{Error, Result};
use crate::numeric::{Matrix, RandomStream};

pub(crate) const DEFAULT_MAX_ITER: usize = 300;
pub(crate) const DEFAULT_TOL: f64 = 1e-6;

/// Result of a k-means run.
#[derive(Clone, Debug)]
pub struct KMeansFit {
    pub labels: ClusterLabels,
    pub centroids: Matrix,
    /// Sum of squared distances after each assignment step.
    pub objective: Vec<f64>,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// k-means labels; see [`kmeans_fit`].
pub fn kmeans(x: &Matrix, k: usize, stream: &mut RandomStream, max_iter: usize, tol: f64) -> Result<ClusterLabels> {
    kmeans_fit(x, k, stream, max_iter, tol).map(|f| f.labels)
}

/// Lloyd iterations from k-means++ seeds.
///
/// Stops once no centroid moves by `tol` or more (Euclidean), or after
/// `max_iter` rounds. A cluster left empty is re-seeded with the point that
/// is currently farthest from its own centroid.
pub fn kmeans_fit(x: &Matrix, k: usize, stream: &mut RandomStream, max_iter: usize, tol: f64) -> Result<KMeansFit> {
    let n = x.rows();
    if k == 0 {
        return Err(Error::invalid("k-means needs at least one cluster"));
    }
    if k > n {
        return Err(Error::invalid(format!("k-means asked for {k} clusters of {n} points")));
    }
    let mut centroids = seed_plus_plus(x, k, stream);
    let mut assign = vec![0usize; n];
    let mut dist = vec![0.0f64; n];
    let mut objective = Vec::new();
    let mut iterations = 0;

    for _ in 0..max_iter.max(1) {
        iterations += 1;
        let mut total = 0.0;
        for i in 0..n {
            let (c, d) = nearest(x.row(i), &centroids);
            assign[i] = c;
            dist[i] = d;
            total += d;
        }
        objective.push(total);

        let mut next = Matrix::zeros(k, x.cols());
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[assign[i]] += 1;
            for (s, &v) in next.row_mut(assign[i]).iter_mut().zip(x.row(i)) {
                *s += v;
            }
        }
        let mut taken = vec![false; n];
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .filter(|&i| !taken[i])
                    .fold(None, |best: Option<usize>, i| match best {
                        Some(b) if dist[b] >= dist[i] => Some(b),
                        _ => Some(i),
                    })
                    .expect("k <= n leaves a point to reseed with");
                taken[far] = true;
                dist[far] = 0.0;
                next.row_mut(c).copy_from_slice(x.row(far));
            } else {
                let inv = counts[c] as f64;
                for s in next.row_mut(c) {
                    *s /= inv;
                }
            }
        }
        let shift = (0..k)
            .map(|c| sq_dist(centroids.row(c), next.row(c)).sqrt())
            .fold(0.0f64, f64::max);
        centroids = next;
        if shift < tol {
            break;
        }
    }

    for i in 0..n {
        assign[i] = nearest(x.row(i), &centroids).0;
    }
    let labels = canonicalize(&assign, k);
    Ok(KMeansFit {
        labels,
        centroids,
        objective,
        iterations,
    })
}

fn nearest(p: &[f64], centroids: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centroids.rows() {
        let d = sq_dist(p, centroids.row(c));
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn seed_plus_plus(x: &Matrix, k: usize, stream: &mut RandomStream) -> Matrix {
    let n = x.rows();
    let mut centroids = Matrix::zeros(k, x.cols());
    let first = stream.below(n);
    centroids.row_mut(0).copy_from_slice(x.row(first));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), x.row(first))).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = stream.next_f64() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            chosen.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).unwrap_or(0))
        } else {
            stream.below(n)
        };
        centroids.row_mut(c).copy_from_slice(x.row(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(x.row(i), x.row(pick)));
        }
    }
    centroids
}
