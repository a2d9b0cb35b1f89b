//! Losses, optimizer, metrics and the seeded training protocols.
//!
//! Both protocols run full-batch gradient steps and evaluate every parameter
//! state they pass through: state `e` is the model after `e` updates, for
//! `e` in `0..=epochs`. The reported test metric belongs to the state with
//! the best validation metric among `1..=epochs`, first one winning ties.
//!
//! A run draws from four independent sub-streams of its seed: the data
//! split, random features, clustering and weight initialisation. Changing
//! e.g. the clusterer therefore leaves the split untouched.

mod adam;
mod metrics;

pub use adam::{AdamConfig, AdamState};
pub use metrics::{accuracy, argmax_rows, bce_with_logits, roc_auc, softmax_cross_entropy};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::autodiff::{Tape, Var};
use crate::clustering::{labels_to_one_hot, Clusterer};
use crate::datasets::{min_max_normalize, random_features, GraphBundle};
use crate::error::{Error, Result};
use crate::graph::{split_edges, Edge, EdgeSplit, Graph};
use crate::model::{init_layers, ForwardPlan, LayerParams, ModelKind, PersonaConfig};
use crate::numeric::{Matrix, RandomStream};

const STREAM_SPLIT: u64 = 1;
const STREAM_FEATURES: u64 = 2;
const STREAM_CLUSTER: u64 = 3;
const STREAM_INIT: u64 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Task {
    LinkPrediction,
    NodeClassification,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::LinkPrediction => "lp",
            Task::NodeClassification => "nc",
        }
    }
}

/// Node features fed to the model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureSource {
    /// The bundle's features after min-max normalization.
    Raw,
    /// Uniform `[0, 1)` noise with the raw feature width.
    Random,
}

impl FeatureSource {
    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSource::Raw => "raw",
            FeatureSource::Random => "random",
        }
    }
}

/// Features the initial clustering sees.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClusterSource {
    /// Whatever the model is fed.
    Model,
    /// Normalized raw features, even when the model is fed noise.
    Raw,
}

impl ClusterSource {
    pub fn as_str(self) -> &'static str {
        match self {
            ClusterSource::Model => "model",
            ClusterSource::Raw => "raw",
        }
    }
}

macro_rules! parse_enum {
    ($t:ty, $what:literal, $($name:literal => $v:expr),+) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $t {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($v),)+
                    other => Err(Error::invalid(format!(
                        concat!("unknown ", $what, " {:?} (expected ", $($name, " ",)+ ")"),
                        other
                    ))),
                }
            }
        }
    };
}

parse_enum!(Task, "task", "lp" => Task::LinkPrediction, "nc" => Task::NodeClassification);
parse_enum!(FeatureSource, "feature source", "raw" => FeatureSource::Raw, "random" => FeatureSource::Random);
parse_enum!(ClusterSource, "cluster feature source", "model" => ClusterSource::Model, "raw" => ClusterSource::Raw);

/// Everything a single training run needs besides the data and the seed.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub model: ModelKind,
    pub features: FeatureSource,
    pub cluster_features: ClusterSource,
    pub clusterer: Clusterer,
    pub persona: PersonaConfig,
    pub epochs: usize,
    pub adam: AdamConfig,
    pub test_frac: f64,
    pub val_frac: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::PersonaSage,
            features: FeatureSource::Raw,
            cluster_features: ClusterSource::Model,
            clusterer: Clusterer::Ward,
            persona: PersonaConfig::default(),
            epochs: 100,
            adam: AdamConfig::default(),
            test_frac: 0.15,
            val_frac: 0.15,
        }
    }
}

impl TrainConfig {
    /// Number of personas the model actually uses.
    pub fn effective_k(&self) -> usize {
        match self.model {
            ModelKind::PersonaSage => self.persona.k,
            ModelKind::GraphSage | ModelKind::PersonaSageK1 => 1,
        }
    }
}

/// Metrics of one parameter state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_metric: f64,
    pub test_metric: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub best_epoch: usize,
    pub val_metric: f64,
    pub test_metric: f64,
    pub config: TrainConfig,
    pub trace: Vec<EpochRecord>,
}

/// Mean and population standard deviation of test metrics over seeds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AggregateResult {
    pub mean: f64,
    pub std: f64,
    pub runs: usize,
}

impl AggregateResult {
    pub fn from_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("cannot aggregate zero runs"));
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Ok(Self {
            mean,
            std: var.sqrt(),
            runs: values.len(),
        })
    }
}

/// Feature matrices for the model and for clustering.
fn prepare_features(bundle: &GraphBundle, cfg: &TrainConfig, root: &RandomStream) -> Result<(Arc<Matrix>, Arc<Matrix>)> {
    let raw = Arc::new(min_max_normalize(&bundle.features));
    let model = match cfg.features {
        FeatureSource::Raw => Arc::clone(&raw),
        FeatureSource::Random => {
            let mut s = root.fork(STREAM_FEATURES);
            Arc::new(random_features(bundle.num_nodes(), bundle.features.cols(), &mut s)?)
        }
    };
    let cluster = match cfg.cluster_features {
        ClusterSource::Model => Arc::clone(&model),
        ClusterSource::Raw => raw,
    };
    Ok((model, cluster))
}

/// Builds the forward plan (including the initial clustering) for `graph`.
pub fn build_plan(
    graph: Arc<Graph>,
    features: Arc<Matrix>,
    cluster_features: &Matrix,
    cfg: &TrainConfig,
    stream: &mut RandomStream,
) -> Result<ForwardPlan> {
    match cfg.model {
        ModelKind::GraphSage => ForwardPlan::graphsage(graph, features, &cfg.persona),
        ModelKind::PersonaSageK1 => {
            let pc = PersonaConfig {
                k: 1,
                ..cfg.persona.clone()
            };
            let c0 = Matrix::filled(graph.num_nodes(), 1, 1.0);
            ForwardPlan::persona(graph, features, &c0, &pc)
        }
        ModelKind::PersonaSage => {
            let labels = cfg.clusterer.cluster(cluster_features, cfg.persona.k, stream)?;
            let c0 = labels_to_one_hot(&labels);
            ForwardPlan::persona(graph, features, &c0, &cfg.persona)
        }
    }
}

fn flatten(layers: &[LayerParams], head: Option<&LayerParams>) -> Vec<Matrix> {
    layers
        .iter()
        .chain(head)
        .flat_map(|p| [p.w.clone(), p.b.clone()])
        .collect()
}

fn unflatten(values: &[Matrix]) -> Vec<LayerParams> {
    values
        .chunks(2)
        .map(|c| LayerParams {
            w: c[0].clone(),
            b: c[1].clone(),
        })
        .collect()
}

fn check_finite(loss: f64, params: &[Matrix], epoch: usize) -> Result<()> {
    if !loss.is_finite() {
        return Err(Error::NonFinite(format!("training loss at epoch {epoch} is {loss}")));
    }
    if params.iter().any(|p| !p.is_finite()) {
        return Err(Error::NonFinite(format!("parameters after epoch {epoch}")));
    }
    Ok(())
}

fn select_best(trace: &[EpochRecord]) -> (usize, f64, f64) {
    let candidates = if trace.len() > 1 { &trace[1..] } else { trace };
    let mut best = candidates[0];
    for r in &candidates[1..] {
        if r.val_metric > best.val_metric {
            best = *r;
        }
    }
    (best.epoch, best.val_metric, best.test_metric)
}

/// Labeled node pairs as gather indices.
struct Pairs {
    us: Arc<Vec<usize>>,
    vs: Arc<Vec<usize>>,
    labels: Vec<bool>,
}

impl Pairs {
    fn new(pos: &[Edge], neg: &[Edge]) -> Self {
        let all: Vec<Edge> = pos.iter().chain(neg).copied().collect();
        Self {
            us: Arc::new(all.iter().map(|e| e.0).collect()),
            vs: Arc::new(all.iter().map(|e| e.1).collect()),
            labels: (0..all.len()).map(|i| i < pos.len()).collect(),
        }
    }

    fn targets(&self) -> Arc<Vec<f64>> {
        Arc::new(self.labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect())
    }

    fn scores(&self, readout: &Matrix) -> Vec<f64> {
        self.us
            .iter()
            .zip(self.vs.iter())
            .map(|(&u, &v)| crate::model::link_score(readout, u, v))
            .collect()
    }

    fn logits(&self, tape: &mut Tape, readout: Var) -> Result<Var> {
        let a = tape.gather(readout, Arc::clone(&self.us))?;
        let b = tape.gather(readout, Arc::clone(&self.vs))?;
        tape.row_dot(a, b)
    }
}

/// Link prediction on a 15/15 held-out edge split; the metric is ROC AUC.
pub fn train_link_prediction(bundle: &GraphBundle, cfg: &TrainConfig, seed: u64) -> Result<RunResult> {
    let root = RandomStream::new(seed);
    let split = split_edges(&bundle.graph, cfg.test_frac, cfg.val_frac, &mut root.fork(STREAM_SPLIT))?;
    train_link_prediction_on_split(bundle, &split, cfg, seed)
}

/// As [`train_link_prediction`] but with a caller-supplied split.
pub fn train_link_prediction_on_split(
    bundle: &GraphBundle,
    split: &EdgeSplit,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<RunResult> {
    let root = RandomStream::new(seed);
    let (features, cluster) = prepare_features(bundle, cfg, &root)?;
    let graph = Arc::new(split.message_graph.clone());
    let plan = build_plan(graph, features, &cluster, cfg, &mut root.fork(STREAM_CLUSTER))?;
    let layers = init_layers(plan.config(), bundle.features.cols(), &mut root.fork(STREAM_INIT))?;

    let train = Pairs::new(&split.train_pos, &split.train_neg);
    let val = Pairs::new(&split.val_pos, &split.val_neg);
    let test = Pairs::new(&split.test_pos, &split.test_neg);
    let targets = train.targets();

    let mut params = flatten(&layers, None);
    let mut adam = AdamState::new(cfg.adam, &params);
    let mut trace = Vec::with_capacity(cfg.epochs + 1);
    for epoch in 0..=cfg.epochs {
        let mut tape = Tape::new();
        let vars = plan.parameter_params(&mut tape, &unflatten(&params));
        let emb = plan.embeddings(&mut tape, &vars)?;
        let readout = plan.readout(&mut tape, &emb)?;
        let r = tape.shared_value(readout);
        let val_auc = roc_auc(&val.scores(&r), &val.labels)?;
        let test_auc = roc_auc(&test.scores(&r), &test.labels)?;
        let logits = train.logits(&mut tape, readout)?;
        let loss = tape.bce_with_logits(logits, Arc::clone(&targets))?;
        let loss_value = tape.value(loss).item()?;
        check_finite(loss_value, &params, epoch)?;
        trace.push(EpochRecord {
            epoch,
            train_loss: loss_value,
            val_metric: val_auc,
            test_metric: test_auc,
        });
        if epoch < cfg.epochs {
            let mut grads = tape.backward(loss)?;
            let g: Vec<Matrix> = vars.iter().flat_map(|&(w, b)| [grads.take(w), grads.take(b)]).collect();
            adam.step(&mut params, &g)?;
        }
    }
    let (best_epoch, val_metric, test_metric) = select_best(&trace);
    Ok(RunResult {
        seed,
        best_epoch,
        val_metric,
        test_metric,
        config: cfg.clone(),
        trace,
    })
}

/// Node ids split into (train, val, test) by a seeded shuffle.
pub fn split_nodes(n: usize, test_frac: f64, val_frac: f64, stream: &mut RandomStream) -> Result<(Vec<usize>, Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&test_frac) || !(0.0..1.0).contains(&val_frac) || test_frac + val_frac >= 1.0 {
        return Err(Error::invalid(format!(
            "holdout fractions {test_frac} + {val_frac} must be non-negative and sum below 1"
        )));
    }
    let mut ids: Vec<usize> = (0..n).collect();
    stream.shuffle(&mut ids);
    let n_test = crate::graph::fraction_count(test_frac, n);
    let n_val = crate::graph::fraction_count(val_frac, n);
    let test = ids[..n_test].to_vec();
    let val = ids[n_test..n_test + n_val].to_vec();
    let train = ids[n_test + n_val..].to_vec();
    Ok((train, val, test))
}

/// Node classification on a 70/15/15 node split; the metric is accuracy.
pub fn train_node_classification(bundle: &GraphBundle, cfg: &TrainConfig, seed: u64) -> Result<RunResult> {
    let root = RandomStream::new(seed);
    let (train_ids, val_ids, test_ids) =
        split_nodes(bundle.num_nodes(), cfg.test_frac, cfg.val_frac, &mut root.fork(STREAM_SPLIT))?;
    if train_ids.is_empty() || val_ids.is_empty() || test_ids.is_empty() {
        return Err(Error::invalid("node split leaves an empty partition"));
    }
    let (features, cluster) = prepare_features(bundle, cfg, &root)?;
    let graph = Arc::new(bundle.graph.clone());
    let plan = build_plan(graph, features, &cluster, cfg, &mut root.fork(STREAM_CLUSTER))?;
    let mut init = root.fork(STREAM_INIT);
    let layers = init_layers(plan.config(), bundle.features.cols(), &mut init)?;
    let head = LayerParams::glorot(plan.readout_dim(), bundle.num_classes(), &mut init)?;

    let train_idx = Arc::new(train_ids);
    let train_labels = Arc::new(train_idx.iter().map(|&v| bundle.labels[v]).collect::<Vec<_>>());
    let val_labels: Vec<usize> = val_ids.iter().map(|&v| bundle.labels[v]).collect();
    let test_labels: Vec<usize> = test_ids.iter().map(|&v| bundle.labels[v]).collect();

    let mut params = flatten(&layers, Some(&head));
    let mut adam = AdamState::new(cfg.adam, &params);
    let mut trace = Vec::with_capacity(cfg.epochs + 1);
    for epoch in 0..=cfg.epochs {
        let mut tape = Tape::new();
        let all = unflatten(&params);
        let (layer_params, head_params) = all.split_at(all.len() - 1);
        let vars = plan.parameter_params(&mut tape, layer_params);
        let hw = tape.parameter(head_params[0].w.clone());
        let hb = tape.parameter(head_params[0].b.clone());
        let emb = plan.embeddings(&mut tape, &vars)?;
        let readout = plan.readout(&mut tape, &emb)?;
        let logits = tape.matmul(readout, hw)?;
        let logits = tape.add_row(logits, hb)?;

        let pred = argmax_rows(tape.value(logits));
        let val_acc = accuracy(&val_ids.iter().map(|&v| pred[v]).collect::<Vec<_>>(), &val_labels)?;
        let test_acc = accuracy(&test_ids.iter().map(|&v| pred[v]).collect::<Vec<_>>(), &test_labels)?;

        let train_logits = tape.gather(logits, Arc::clone(&train_idx))?;
        let loss = tape.softmax_cross_entropy(train_logits, Arc::clone(&train_labels))?;
        let loss_value = tape.value(loss).item()?;
        check_finite(loss_value, &params, epoch)?;
        trace.push(EpochRecord {
            epoch,
            train_loss: loss_value,
            val_metric: val_acc,
            test_metric: test_acc,
        });
        if epoch < cfg.epochs {
            let mut grads = tape.backward(loss)?;
            let mut g: Vec<Matrix> = vars.iter().flat_map(|&(w, b)| [grads.take(w), grads.take(b)]).collect();
            g.push(grads.take(hw));
            g.push(grads.take(hb));
            adam.step(&mut params, &g)?;
        }
    }
    let (best_epoch, val_metric, test_metric) = select_best(&trace);
    Ok(RunResult {
        seed,
        best_epoch,
        val_metric,
        test_metric,
        config: cfg.clone(),
        trace,
    })
}

pub fn train_once(task: Task, bundle: &GraphBundle, cfg: &TrainConfig, seed: u64) -> Result<RunResult> {
    match task {
        Task::LinkPrediction => train_link_prediction(bundle, cfg, seed),
        Task::NodeClassification => train_node_classification(bundle, cfg, seed),
    }
}

/// Independent runs per seed, in the order given.
pub fn multi_seed_run(
    task: Task,
    bundle: &GraphBundle,
    cfg: &TrainConfig,
    seeds: &[u64],
) -> Result<(Vec<RunResult>, AggregateResult)> {
    if seeds.is_empty() {
        return Err(Error::invalid("at least one seed is required"));
    }
    let runs = seeds
        .iter()
        .map(|&s| train_once(task, bundle, cfg, s))
        .collect::<Result<Vec<_>>>()?;
    let agg = AggregateResult::from_values(&runs.iter().map(|r| r.test_metric).collect::<Vec<_>>())?;
    Ok((runs, agg))
}
