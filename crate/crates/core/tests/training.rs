mod common;

use common::random_graph;
use personasage::clustering::Clusterer;
use personasage::datasets::{BundleMeta, GraphBundle};
use personasage::graph::{sample_negative_edges, EdgeSplit};
use personasage::model::{ModelKind, PersonaConfig};
use personasage::numeric::{rand_uniform, Matrix, RandomStream};
use personasage::train::{
    multi_seed_run, train_link_prediction, train_link_prediction_on_split, train_node_classification, FeatureSource,
    Task, TrainConfig,
};
use personasage::Graph;

fn bundle(graph: Graph, features: Matrix, labels: Vec<usize>, classes: usize) -> GraphBundle {
    GraphBundle {
        meta: BundleMeta {
            name: "synthetic".into(),
            num_nodes: graph.num_nodes(),
            num_edges: graph.num_edges(),
            num_features: features.cols(),
            num_classes: classes,
            num_source_edges: None,
        },
        graph,
        features,
        labels,
    }
}

fn small_config(k: usize, epochs: usize) -> TrainConfig {
    TrainConfig {
        persona: PersonaConfig {
            k,
            hidden_dim: 16,
            out_dim: 4,
            ..PersonaConfig::default()
        },
        epochs,
        ..TrainConfig::default()
    }
}

/// Two dense communities joined by a few bridges, with noisy features.
fn communities(seed: u64) -> GraphBundle {
    let mut s = RandomStream::new(seed);
    let n = 60;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let same = (u < n / 2) == (v < n / 2);
            if s.next_f64() < if same { 0.25 } else { 0.01 } {
                edges.push((u, v));
            }
        }
    }
    let labels: Vec<usize> = (0..n).map(|v| usize::from(v >= n / 2)).collect();
    let features = rand_uniform(&mut s, n, 6, 0.0, 1.0).unwrap();
    bundle(Graph::new(n, &edges).unwrap(), features, labels, 2)
}

#[test]
fn memorizes_training_edges() {
    let n = 30;
    let g = random_graph(n, 0.2, &mut RandomStream::new(4));
    let b = bundle(g.clone(), Matrix::identity(n), vec![0; n], 1);
    let pos = g.edges();
    let neg = sample_negative_edges(&g, pos.len(), &mut RandomStream::new(5), &Default::default()).unwrap();
    let split = EdgeSplit {
        train_pos: pos.clone(),
        val_pos: pos.clone(),
        test_pos: pos,
        train_neg: neg.clone(),
        val_neg: neg.clone(),
        test_neg: neg,
        message_graph: g,
    };
    let r = train_link_prediction_on_split(&b, &split, &small_config(2, 100), 0).unwrap();
    assert!(r.test_metric > 0.9, "{}", r.test_metric);
    let first = r.trace[0].train_loss;
    let last = r.trace.last().unwrap().train_loss;
    assert!(last < first, "{first} -> {last}");
}

#[test]
fn untrained_model_on_structureless_graph_is_chance() {
    let n = 300;
    let g = random_graph(n, 0.03, &mut RandomStream::new(9));
    let features = rand_uniform(&mut RandomStream::new(10), n, 8, 0.0, 1.0).unwrap();
    let b = bundle(g, features, vec![0; n], 1);
    let cfg = small_config(3, 0);
    let (runs, agg) = multi_seed_run(Task::LinkPrediction, &b, &cfg, &[0, 1, 2, 3, 4]).unwrap();
    assert!(runs.iter().all(|r| r.best_epoch == 0));
    assert!((agg.mean - 0.5).abs() < 0.06, "{agg:?}");
}

#[test]
fn label_revealing_features_give_perfect_classification() {
    let base = communities(1);
    let mut s = RandomStream::new(2);
    let mut f = rand_uniform(&mut s, base.num_nodes(), 4, 0.0, 0.1).unwrap();
    for (v, &l) in base.labels.iter().enumerate() {
        f.set(v, l, 1.0);
    }
    let b = bundle(base.graph, f, base.labels, 2);
    let r = train_node_classification(&b, &small_config(2, 60), 0).unwrap();
    assert!(r.test_metric >= 0.99, "{}", r.test_metric);
    assert!(r.val_metric >= 0.99);
}

#[test]
fn random_labels_give_chance_accuracy() {
    let n = 400;
    let classes = 4;
    let mut s = RandomStream::new(12);
    let g = random_graph(n, 0.01, &mut s);
    let features = rand_uniform(&mut s, n, 8, 0.0, 1.0).unwrap();
    let labels: Vec<usize> = (0..n).map(|_| s.below(classes)).collect();
    let b = bundle(g, features, labels, classes);
    let (_, agg) = multi_seed_run(Task::NodeClassification, &b, &small_config(2, 30), &[0, 1, 2]).unwrap();
    assert!((agg.mean - 0.25).abs() < 0.1, "{agg:?}");
}

#[test]
fn community_structure_is_learned() {
    let b = communities(3);
    // About 40% of the negatives fall inside a community, which caps the
    // attainable AUC near 0.8.
    let r = train_link_prediction(&b, &small_config(2, 60), 0).unwrap();
    assert!(r.test_metric > 0.65, "{}", r.test_metric);
}

#[test]
fn runs_are_deterministic_and_finite() {
    let b = communities(5);
    for (model, clusterer, features) in [
        (ModelKind::PersonaSage, Clusterer::Ward, FeatureSource::Raw),
        (ModelKind::PersonaSage, Clusterer::KMeans, FeatureSource::Random),
        (ModelKind::GraphSage, Clusterer::Ward, FeatureSource::Raw),
    ] {
        let cfg = TrainConfig {
            model,
            clusterer,
            features,
            ..small_config(3, 15)
        };
        for task in [Task::LinkPrediction, Task::NodeClassification] {
            let a = multi_seed_run(task, &b, &cfg, &[7]).unwrap();
            let c = multi_seed_run(task, &b, &cfg, &[7]).unwrap();
            assert_eq!(a, c);
            let run = &a.0[0];
            assert_eq!(run.trace.len(), 16);
            assert!(run.trace.iter().all(|e| e.train_loss.is_finite()));
            assert!((1..=15).contains(&run.best_epoch));
            assert_eq!(run.test_metric, run.trace[run.best_epoch].test_metric);
            assert_eq!(a.1.std, 0.0);
            assert_eq!(a.1.mean, run.test_metric);
        }
    }
}

#[test]
fn seeds_change_the_outcome() {
    let b = communities(6);
    let cfg = small_config(2, 5);
    let a = train_link_prediction(&b, &cfg, 0).unwrap();
    let c = train_link_prediction(&b, &cfg, 1).unwrap();
    assert_ne!(a.trace, c.trace);
}

#[test]
fn k1_variant_matches_graphsage_training() {
    let b = communities(8);
    let mut cfg = small_config(1, 10);
    cfg.model = ModelKind::PersonaSageK1;
    let k1 = train_link_prediction(&b, &cfg, 2).unwrap();
    cfg.model = ModelKind::GraphSage;
    let gs = train_link_prediction(&b, &cfg, 2).unwrap();
    assert_eq!(k1.trace, gs.trace);
}
