mod common;

use common::*;
use personasage::clustering::{kmeans, ward_cluster};
use personasage::model::{
    classify, graphsage_forward, init_layers, persona_forward, persona_set, readout,
    Activation, LayerParams, PersonaConfig, ReadoutKind,
};
use personasage::numeric::{matmul, rand_uniform, Matrix, RandomStream};
use personasage::{Aggregator, Graph};

#[test]
fn persona_forward_matches_naive_evaluator() {
    let worst = naive_oracle_deviation(0..200);
    assert!(worst <= 1e-10, "max deviation {worst}");
}

#[test]
fn two_node_path_hand_trace() {
    // Nodes 0 - 1, features [1] and [2], personas one-hot [1,0] and [0,1].
    // After propagation both nodes hold [0.5, 0.5].
    // W = [[2], [3]] (self, message), b = [1], identity output.
    // persona 0 at node 0: 2*1 + 3*(0.5*2) + 1 = 6
    // persona 0 at node 1: 2*2 + 3*(0.5*1) + 1 = 6.5
    // persona 1 is identical since both memberships are 0.5.
    let g = Graph::new(2, &[(0, 1)]).unwrap();
    let x = Matrix::from_rows(&[[1.0], [2.0]]).unwrap();
    let c0 = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]).unwrap();
    let cfg = PersonaConfig {
        k: 2,
        layers: 1,
        hidden_dim: 1,
        out_dim: 1,
        ..PersonaConfig::default()
    };
    let params = vec![LayerParams {
        w: Matrix::from_rows(&[[2.0], [3.0]]).unwrap(),
        b: Matrix::from_rows(&[[1.0]]).unwrap(),
    }];
    let s = persona_forward(&g, &x, &c0, &params, &cfg).unwrap();
    assert_eq!(s.embeddings[0].data(), &[6.0, 6.5]);
    assert_eq!(s.embeddings[1].data(), &[6.0, 6.5]);
    assert_eq!(s.memberships.data(), &[0.5, 0.5, 0.5, 0.5]);
}

#[test]
fn k1_uniform_membership_is_graphsage_bit_exact() {
    assert_eq!(k1_graphsage_mismatches(0..50), Vec::<u64>::new());
}

#[test]
fn graphsage_matches_naive_per_node() {
    let mut s = RandomStream::new(77);
    let g = Graph::new(4, &[(0, 1), (1, 2), (1, 3)]).unwrap();
    let x = rand_uniform(&mut s, 4, 3, -1.0, 1.0).unwrap();
    let cfg = PersonaConfig {
        layers: 2,
        hidden_dim: 5,
        out_dim: 2,
        ..PersonaConfig::default()
    };
    let params = random_params(&cfg, 3, &mut s);
    let got = graphsage_forward(&g, &x, &params, &cfg).unwrap();
    let want = naive_graphsage(&adjacency(&g), &to_rows(&x), &params_as_rows(&params), Activation::Relu);
    for v in 0..4 {
        for j in 0..2 {
            assert!((got.get(v, j) - want[v][j]).abs() < 1e-12);
        }
    }
}

#[test]
fn graphsage_isolated_node_sees_zero_message() {
    let g = Graph::new(3, &[(0, 1)]).unwrap();
    let x = Matrix::from_rows(&[[1.0], [2.0], [3.0]]).unwrap();
    let cfg = PersonaConfig {
        layers: 1,
        hidden_dim: 1,
        out_dim: 1,
        ..PersonaConfig::default()
    };
    let params = vec![LayerParams {
        w: Matrix::from_rows(&[[1.0], [100.0]]).unwrap(),
        b: Matrix::zeros(1, 1),
    }];
    let out = graphsage_forward(&g, &x, &params, &cfg).unwrap();
    assert_eq!(out.get(2, 0), 3.0);
}

#[test]
fn path_of_nine_has_two_or_three_personas() {
    assert_eq!(path_persona_set_sizes(), vec![2, 3, 3, 3, 3, 3, 3, 3, 2]);
}

#[test]
fn fully_mixed_memberships_activate_every_persona() {
    let g = Graph::new(3, &[(0, 1)]).unwrap();
    let x = Matrix::filled(3, 1, 1.0);
    let c0 = Matrix::filled(3, 4, 0.25);
    let cfg = PersonaConfig {
        k: 4,
        layers: 1,
        hidden_dim: 1,
        out_dim: 1,
        ..PersonaConfig::default()
    };
    let params = init_layers(&cfg, 1, &mut RandomStream::new(0)).unwrap();
    let state = persona_forward(&g, &x, &c0, &params, &cfg).unwrap();
    assert!(persona_set(&state).iter().all(|p| p.len() == 4));
}

#[test]
fn memberships_stay_on_simplex_and_follow_hop_support() {
    if let Some(failure) = membership_invariant_failure(0..100) {
        panic!("{failure}");
    }
}

#[test]
fn readout_block_norms_scale_with_membership() {
    let inst = small_instance(3);
    let state = persona_forward(&inst.graph, &inst.features, &inst.c0, &inst.params, &inst.cfg).unwrap();
    let r = readout(&state, ReadoutKind::Conditioned);
    let d = state.embeddings[0].cols();
    for v in 0..state.num_nodes() {
        for i in 0..state.k() {
            let block = &r.row(v)[i * d..(i + 1) * d];
            let norm = block.iter().map(|x| x * x).sum::<f64>().sqrt();
            let emb = state.embeddings[i].row(v).iter().map(|x| x * x).sum::<f64>().sqrt();
            let want = state.memberships.get(v, i) * emb;
            assert!((norm - want).abs() <= 1e-12 * (1.0 + want));
        }
    }
}

#[test]
fn classify_matches_dense_map() {
    let mut s = RandomStream::new(8);
    let r = rand_uniform(&mut s, 6, 4, -1.0, 1.0).unwrap();
    let head = LayerParams {
        w: rand_uniform(&mut s, 4, 3, -1.0, 1.0).unwrap(),
        b: rand_uniform(&mut s, 1, 3, -1.0, 1.0).unwrap(),
    };
    let got = classify(&r, &head).unwrap();
    let prod = matmul(&r, &head.w).unwrap();
    for v in 0..6 {
        for c in 0..3 {
            let mut want = head.b.get(0, c);
            for j in 0..4 {
                want += r.get(v, j) * head.w.get(j, c);
            }
            assert!((got.get(v, c) - want).abs() < 1e-12);
            assert_eq!(got.get(v, c), prod.get(v, c) + head.b.get(0, c));
        }
    }
}

#[test]
fn ward_matches_greedy_oracle() {
    for seed in 0..60 {
        let mut s = RandomStream::new(900 + seed);
        let n = 2 + s.below(7);
        let k = 1 + s.below(3.min(n));
        let x = rand_uniform(&mut s, n, 2, 0.0, 10.0).unwrap();
        let got = ward_cluster(&x, k).unwrap();
        assert_eq!(groups(got.labels(), k), greedy_ward(&to_rows(&x), k), "seed {seed}");
    }
}

fn two_blob_points() -> Matrix {
    Matrix::from_rows(&[
        [0.0, 0.0],
        [0.4, 0.1],
        [0.1, 0.3],
        [-0.2, 0.2],
        [0.2, -0.3],
        [10.0, 10.0],
        [10.3, 9.9],
        [9.8, 10.2],
        [10.1, 10.4],
        [9.7, 9.8],
    ])
    .unwrap()
}

fn best_two_partition(points: &Rows) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut best = (f64::INFINITY, Vec::new());
    for mask in 1..(1u32 << n) - 1 {
        let a: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let b: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) == 0).collect();
        let cost = sse(points, &a) + sse(points, &b);
        if cost < best.0 {
            let mut p = vec![a, b];
            p.sort();
            best = (cost, p);
        }
    }
    best.1
}

#[test]
fn two_blobs_match_brute_force_partition() {
    let x = two_blob_points();
    let want = best_two_partition(&to_rows(&x));
    assert_eq!(groups(ward_cluster(&x, 2).unwrap().labels(), 2), want);
    for seed in 0..5 {
        let l = kmeans(&x, 2, &mut RandomStream::new(seed), 100, 1e-9).unwrap();
        assert_eq!(groups(l.labels(), 2), want);
    }
}

#[test]
fn max_aggregation_permutation_tie_rule() {
    // Two neighbors with equal values: the result is the shared value.
    let g = Graph::new(3, &[(0, 1), (0, 2)]).unwrap();
    let c = Matrix::filled(3, 1, 1.0);
    let x = Matrix::from_rows(&[[0.0], [2.0], [2.0]]).unwrap();
    let m = personasage::model::aggregate_neighbors(Aggregator::Max, &c, &x, &g, 0);
    assert_eq!(m.get(0, 0), 2.0);
}

#[test]
fn forward_time_grows_roughly_linearly() {
    // Ring plus chords: every node has degree four.
    let time_for = |n: usize| {
        let edges: Vec<(usize, usize)> = (0..n).flat_map(|v| [(v, (v + 1) % n), (v, (v + 7) % n)]).collect();
        let g = Graph::new(n, &edges).unwrap();
        let mut s = RandomStream::new(n as u64);
        let x = rand_uniform(&mut s, n, 8, 0.0, 1.0).unwrap();
        let c0 = random_memberships(n, 3, &mut s);
        let cfg = PersonaConfig {
            k: 3,
            hidden_dim: 8,
            out_dim: 4,
            ..PersonaConfig::default()
        };
        let params = init_layers(&cfg, 8, &mut s).unwrap();
        (0..3)
            .map(|_| {
                let t = std::time::Instant::now();
                persona_forward(&g, &x, &c0, &params, &cfg).unwrap();
                t.elapsed().as_secs_f64()
            })
            .fold(f64::INFINITY, f64::min)
    };
    let small = time_for(4_000);
    let large = time_for(16_000);
    // Linear growth gives a ratio near 4, quadratic near 16.
    assert!(large / small < 10.0, "{small:.4}s -> {large:.4}s");
}
