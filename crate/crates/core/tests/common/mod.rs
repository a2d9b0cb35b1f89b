//! Independent reference implementations used by several test targets.
#![allow(dead_code)]

use std::sync::Arc;

use personasage::autodiff::{finite_difference_check, Tape, Var};
use personasage::model::{
    graphsage_forward, init_layers, membership_propagate, persona_forward, persona_set, readout, Activation,
    ForwardPlan, LayerParams, PersonaConfig, ReadoutKind,
};
use personasage::numeric::{rand_uniform, Matrix, RandomStream};
use personasage::{Aggregator, Graph};

pub type Rows = Vec<Vec<f64>>;

pub fn to_rows(m: &Matrix) -> Rows {
    m.iter_rows().map(|r| r.to_vec()).collect()
}

pub fn adjacency(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.num_nodes();
    let mut a = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        a[u][v] = true;
        a[v][u] = true;
    }
    a
}

fn act(kind: Activation, x: f64) -> f64 {
    match kind {
        Activation::Relu => x.max(0.0),
        Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
    }
}

/// Line-by-line evaluation of the persona forward pass on a dense adjacency
/// matrix. Returns the per-persona embeddings `[persona][node][dim]` and
/// every membership matrix `C^0..C^L`.
pub fn naive_persona_forward(
    adj: &[Vec<bool>],
    x: &Rows,
    c0: &Rows,
    params: &[(Rows, Vec<f64>)],
    agg: Aggregator,
    activation: Activation,
) -> (Vec<Rows>, Vec<Rows>) {
    let n = adj.len();
    let k = c0[0].len();
    let mut c = c0.clone();
    let mut cs = vec![c.clone()];
    let mut xs: Vec<Rows> = vec![x.clone(); k];
    for (l, (w, b)) in params.iter().enumerate() {
        // memberships
        let mut next = vec![vec![0.0; k]; n];
        for v in 0..n {
            let mut s = c[v].clone();
            for u in 0..n {
                if adj[v][u] {
                    for i in 0..k {
                        s[i] += c[u][i];
                    }
                }
            }
            let norm: f64 = s.iter().map(|z| z.abs()).sum();
            let has_nbr = adj[v].iter().any(|&e| e);
            next[v] = if has_nbr { s.iter().map(|z| z / norm).collect() } else { c[v].clone() };
        }
        c = next;
        cs.push(c.clone());
        let last = l + 1 == params.len();
        let out_dim = b.len();
        let mut new_xs = Vec::with_capacity(k);
        for i in 0..k {
            let xi = &xs[i];
            let d_in = xi[0].len();
            let mut out = vec![vec![0.0; out_dim]; n];
            for v in 0..n {
                let nbrs: Vec<usize> = (0..n).filter(|&u| adj[v][u]).collect();
                let mut h = vec![0.0; d_in];
                if !nbrs.is_empty() {
                    match agg {
                        Aggregator::Mean | Aggregator::Sum => {
                            for &u in &nbrs {
                                for j in 0..d_in {
                                    h[j] += c[u][i] * xi[u][j];
                                }
                            }
                            if agg == Aggregator::Mean {
                                for hj in h.iter_mut() {
                                    *hj /= nbrs.len() as f64;
                                }
                            }
                        }
                        Aggregator::Max => {
                            for j in 0..d_in {
                                h[j] = nbrs.iter().map(|&u| c[u][i] * xi[u][j]).fold(f64::NEG_INFINITY, f64::max);
                            }
                        }
                    }
                }
                let cat: Vec<f64> = xi[v].iter().chain(h.iter()).copied().collect();
                for o in 0..out_dim {
                    let mut z = b[o];
                    for (r, &cv) in cat.iter().enumerate() {
                        z += cv * w[r][o];
                    }
                    out[v][o] = if last { z } else { act(activation, z) };
                }
            }
            new_xs.push(out);
        }
        xs = new_xs;
    }
    (xs, cs)
}

/// Plain GraphSAGE with mean aggregation, evaluated per node.
pub fn naive_graphsage(adj: &[Vec<bool>], x: &Rows, params: &[(Rows, Vec<f64>)], activation: Activation) -> Rows {
    let ones = vec![vec![1.0]; adj.len()];
    let (xs, _) = naive_persona_forward(adj, x, &ones, params, Aggregator::Mean, activation);
    xs.into_iter().next().unwrap()
}

pub fn params_as_rows(params: &[LayerParams]) -> Vec<(Rows, Vec<f64>)> {
    params.iter().map(|p| (to_rows(&p.w), p.b.row(0).to_vec())).collect()
}

/// Random graph with edge probability `p`.
pub fn random_graph(n: usize, p: f64, s: &mut RandomStream) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if s.next_f64() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, &edges).unwrap()
}

/// Random simplex rows; a third of them one-hot.
pub fn random_memberships(n: usize, k: usize, s: &mut RandomStream) -> Matrix {
    let mut m = Matrix::zeros(n, k);
    for v in 0..n {
        if s.below(3) == 0 {
            m.set(v, s.below(k), 1.0);
        } else {
            let raw: Vec<f64> = (0..k).map(|_| s.next_f64() + 0.01).collect();
            let t: f64 = raw.iter().sum();
            for (i, r) in raw.iter().enumerate() {
                m.set(v, i, r / t);
            }
        }
    }
    m
}

/// Random weights and biases (biases non-zero to exercise them).
pub fn random_params(cfg: &PersonaConfig, in_dim: usize, s: &mut RandomStream) -> Vec<LayerParams> {
    let dims = cfg.layer_dims(in_dim);
    dims.windows(2)
        .map(|d| LayerParams {
            w: rand_uniform(s, 2 * d[0], d[1], -1.0, 1.0).unwrap(),
            b: rand_uniform(s, 1, d[1], -0.5, 0.5).unwrap(),
        })
        .collect()
}

pub struct Instance {
    pub graph: Graph,
    pub features: Matrix,
    pub c0: Matrix,
    pub cfg: PersonaConfig,
    pub params: Vec<LayerParams>,
}

/// Instance with `n <= 6`, `K <= 3`, `L <= 2` drawn from `seed`.
pub fn small_instance(seed: u64) -> Instance {
    let mut s = RandomStream::new(seed);
    let n = 1 + s.below(6);
    let k = 1 + s.below(3);
    let layers = 1 + s.below(2);
    let f = 1 + s.below(3);
    let agg = [Aggregator::Mean, Aggregator::Sum, Aggregator::Max][s.below(3)];
    let activation = if s.below(2) == 0 { Activation::Relu } else { Activation::Sigmoid };
    let cfg = PersonaConfig {
        k,
        layers,
        hidden_dim: 1 + s.below(3),
        out_dim: 1 + s.below(3),
        aggregator: agg,
        activation,
        ..PersonaConfig::default()
    };
    let graph = random_graph(n, 0.5, &mut s);
    let features = rand_uniform(&mut s, n, f, -1.0, 1.0).unwrap();
    let c0 = random_memberships(n, k, &mut s);
    let params = random_params(&cfg, f, &mut s);
    Instance {
        graph,
        features,
        c0,
        cfg,
        params,
    }
}

/// Path graph `0 - 1 - ... - (n-1)`.
pub fn path_graph(n: usize) -> Graph {
    let edges: Vec<(usize, usize)> = (1..n).map(|v| (v - 1, v)).collect();
    Graph::new(n, &edges).unwrap()
}

/// Nodes reachable from `v` in at most `hops` steps, `v` included.
pub fn ball(adj: &[Vec<bool>], v: usize, hops: usize) -> Vec<usize> {
    let n = adj.len();
    let mut dist = vec![usize::MAX; n];
    dist[v] = 0;
    let mut frontier = vec![v];
    for h in 1..=hops {
        let mut next = Vec::new();
        for &a in &frontier {
            for b in 0..n {
                if adj[a][b] && dist[b] == usize::MAX {
                    dist[b] = h;
                    next.push(b);
                }
            }
        }
        frontier = next;
    }
    (0..n).filter(|&u| dist[u] != usize::MAX).collect()
}

/// Within-cluster sum of squared distances to the cluster mean.
pub fn sse(points: &Rows, members: &[usize]) -> f64 {
    if members.is_empty() {
        return 0.0;
    }
    let d = points[0].len();
    let mut mean = vec![0.0; d];
    for &m in members {
        for j in 0..d {
            mean[j] += points[m][j];
        }
    }
    for mj in mean.iter_mut() {
        *mj /= members.len() as f64;
    }
    members
        .iter()
        .map(|&m| (0..d).map(|j| (points[m][j] - mean[j]).powi(2)).sum::<f64>())
        .sum()
}

/// Greedy agglomeration that recomputes every candidate merge cost from
/// scratch; returns clusters as sorted member lists, sorted.
pub fn greedy_ward(points: &Rows, k: usize) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = (0..points.len()).map(|i| vec![i]).collect();
    while clusters.len() > k {
        let mut best = (f64::INFINITY, 0, 0);
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let merged: Vec<usize> = clusters[a].iter().chain(&clusters[b]).copied().collect();
                let cost = sse(points, &merged) - sse(points, &clusters[a]) - sse(points, &clusters[b]);
                if cost < best.0 {
                    best = (cost, a, b);
                }
            }
        }
        let (_, a, b) = best;
        let moved = clusters.remove(b);
        clusters[a].extend(moved);
        clusters[a].sort_unstable();
    }
    clusters.sort();
    clusters
}

pub fn groups(labels: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut g = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        g[l].push(i);
    }
    g.retain(|c| !c.is_empty());
    g.sort();
    g
}

/// Largest absolute gap between the library forward pass and the naive
/// evaluator, over embeddings and final memberships of every instance.
pub fn naive_oracle_deviation(seeds: std::ops::Range<u64>) -> f64 {
    let mut worst = 0.0f64;
    for seed in seeds {
        let inst = small_instance(seed);
        let state = persona_forward(&inst.graph, &inst.features, &inst.c0, &inst.params, &inst.cfg).unwrap();
        let (xs, cs) = naive_persona_forward(
            &adjacency(&inst.graph),
            &to_rows(&inst.features),
            &to_rows(&inst.c0),
            &params_as_rows(&inst.params),
            inst.cfg.aggregator,
            inst.cfg.activation,
        );
        for (i, x) in xs.iter().enumerate() {
            for (v, row) in x.iter().enumerate() {
                for (j, &want) in row.iter().enumerate() {
                    worst = worst.max((state.embeddings[i].get(v, j) - want).abs());
                }
            }
        }
        let c_last = cs.last().unwrap();
        for (v, row) in c_last.iter().enumerate() {
            for (i, &want) in row.iter().enumerate() {
                worst = worst.max((state.memberships.get(v, i) - want).abs());
            }
        }
    }
    worst
}

/// Seeds on which K=1 with all-ones memberships is not bit-identical to
/// GraphSAGE under the same weights.
pub fn k1_graphsage_mismatches(seeds: std::ops::Range<u64>) -> Vec<u64> {
    let mut bad = Vec::new();
    for seed in seeds {
        let mut s = RandomStream::new(1000 + seed);
        let n = 2 + s.below(30);
        let g = random_graph(n, 0.2, &mut s);
        let f = 1 + s.below(6);
        let x = rand_uniform(&mut s, n, f, 0.0, 1.0).unwrap();
        let cfg = PersonaConfig {
            k: 1,
            layers: 1 + s.below(3),
            hidden_dim: 1 + s.below(8),
            out_dim: 1 + s.below(8),
            aggregator: [Aggregator::Mean, Aggregator::Sum, Aggregator::Max][s.below(3)],
            ..PersonaConfig::default()
        };
        let params = init_layers(&cfg, f, &mut s).unwrap();
        let ones = Matrix::filled(n, 1, 1.0);
        let persona = persona_forward(&g, &x, &ones, &params, &cfg).unwrap();
        let sage = graphsage_forward(&g, &x, &params, &cfg).unwrap();
        if persona.embeddings[0] != sage || readout(&persona, ReadoutKind::Conditioned) != sage {
            bad.push(seed);
        }
    }
    bad
}

/// Persona-set sizes on the 9-node path with singleton clusters, one layer.
pub fn path_persona_set_sizes() -> Vec<usize> {
    let g = path_graph(9);
    let x = Matrix::filled(9, 2, 1.0);
    let c0 = Matrix::identity(9);
    let cfg = PersonaConfig {
        k: 9,
        layers: 1,
        hidden_dim: 2,
        out_dim: 2,
        ..PersonaConfig::default()
    };
    let params = init_layers(&cfg, 2, &mut RandomStream::new(0)).unwrap();
    let state = persona_forward(&g, &x, &c0, &params, &cfg).unwrap();
    persona_set(&state).iter().map(|p| p.len()).collect()
}

/// First violation of the simplex or hop-support invariants over three
/// propagation steps on random graphs.
pub fn membership_invariant_failure(seeds: std::ops::Range<u64>) -> Option<String> {
    for seed in seeds {
        let mut s = RandomStream::new(5000 + seed);
        let n = 1 + s.below(12);
        let k = 1 + s.below(4);
        let g = random_graph(n, 0.25, &mut s);
        let adj = adjacency(&g);
        let c0 = random_memberships(n, k, &mut s);
        let mut c = c0.clone();
        for l in 1..=3 {
            c = membership_propagate(&c, &g).unwrap();
            for v in 0..n {
                let row = c.row(v);
                let sum: f64 = row.iter().sum();
                if row.iter().any(|&x| x < 0.0) || (sum - 1.0).abs() > 1e-12 {
                    return Some(format!("seed {seed} node {v} layer {l}: {row:?}"));
                }
                let mut want = vec![false; k];
                for u in ball(&adj, v, l) {
                    for (i, w) in want.iter_mut().enumerate() {
                        *w |= c0.get(u, i) > 0.0;
                    }
                }
                let got: Vec<bool> = row.iter().map(|&x| x > 0.0).collect();
                if got != want {
                    return Some(format!("seed {seed} node {v} layer {l}: support {got:?}, expected {want:?}"));
                }
            }
        }
    }
    None
}

pub type PairSet = (Arc<Vec<usize>>, Arc<Vec<usize>>, Arc<Vec<f64>>);

/// Link-prediction loss of a persona model on the tape.
pub fn lp_loss(plan: &ForwardPlan, params: &[Matrix], pairs: &PairSet) -> (Tape, Vec<Var>, Var) {
    let mut t = Tape::new();
    let layers: Vec<LayerParams> = params
        .chunks(2)
        .map(|c| LayerParams {
            w: c[0].clone(),
            b: c[1].clone(),
        })
        .collect();
    let vars = plan.parameter_params(&mut t, &layers);
    let emb = plan.embeddings(&mut t, &vars).unwrap();
    let r = plan.readout(&mut t, &emb).unwrap();
    let a = t.gather(r, Arc::clone(&pairs.0)).unwrap();
    let b = t.gather(r, Arc::clone(&pairs.1)).unwrap();
    let z = t.row_dot(a, b).unwrap();
    let loss = t.bce_with_logits(z, Arc::clone(&pairs.2)).unwrap();
    let flat = vars.iter().flat_map(|&(w, b)| [w, b]).collect();
    (t, flat, loss)
}

/// An 8-node graph, K=2, D=3 model with six labelled pairs.
pub fn lp_instance(agg: Aggregator) -> (ForwardPlan, Vec<Matrix>, PairSet) {
    let mut s = RandomStream::new(11);
    let g = random_graph(8, 0.35, &mut s);
    let x = rand_uniform(&mut s, 8, 4, 0.0, 1.0).unwrap();
    let c0 = random_memberships(8, 2, &mut s);
    let cfg = PersonaConfig {
        k: 2,
        layers: 2,
        hidden_dim: 5,
        out_dim: 3,
        aggregator: agg,
        ..PersonaConfig::default()
    };
    let plan = ForwardPlan::persona(Arc::new(g), Arc::new(x), &c0, &cfg).unwrap();
    let params: Vec<Matrix> = random_params(&cfg, 4, &mut s)
        .into_iter()
        .flat_map(|p| [p.w, p.b])
        .collect();
    let pairs = (
        Arc::new(vec![0, 1, 2, 3, 4, 5]),
        Arc::new(vec![7, 6, 5, 4, 3, 2]),
        Arc::new(vec![1.0, 0.0, 1.0, 1.0, 0.0, 0.0]),
    );
    (plan, params, pairs)
}

/// Relative error of the tape gradient of [`lp_loss`] against central
/// differences.
pub fn lp_gradient_error(agg: Aggregator) -> f64 {
    let (plan, params, pairs) = lp_instance(agg);
    let (t, vars, loss) = lp_loss(&plan, &params, &pairs);
    let g = t.backward(loss).unwrap();
    let analytic: Vec<Matrix> = vars.iter().map(|&v| g.get(v)).collect();
    finite_difference_check(
        |p| {
            let (t, _, l) = lp_loss(&plan, p, &pairs);
            t.value(l).item().unwrap()
        },
        &params,
        &analytic,
        1e-5,
    )
}
