use std::path::PathBuf;

use crate::aggregate::Aggregator;
use crate::clustering::Clusterer;
use crate::datasets::GraphBundle;
use crate::error::{Error, Result};
use crate::model::{Activation, ModelKind, PersonaConfig, ReadoutKind};
use crate::train::{AdamConfig, ClusterSource, FeatureSource, Task, TrainConfig};

/// Everything a command needs, with unresolved presets left as `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub task: Task,
    pub dataset: PathBuf,
    pub features: FeatureSource,
    pub cluster_features: ClusterSource,
    pub model: ModelKind,
    pub clusterer: Clusterer,
    pub aggregator: Aggregator,
    /// Persona count; defaults to the class count.
    pub k: Option<usize>,
    /// Per-persona output width; defaults to `total_dim / K`.
    pub d: Option<usize>,
    /// Readout width to aim for; defaults to the dataset preset.
    pub total_dim: Option<usize>,
    pub hidden_dim: usize,
    pub layers: usize,
    pub epochs: usize,
    pub lr: f64,
    pub seeds: Vec<u64>,
    pub activation: Activation,
    pub readout: ReadoutKind,
    pub output: Option<PathBuf>,
    pub trace: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            task: Task::LinkPrediction,
            dataset: PathBuf::from("data/cora"),
            features: FeatureSource::Raw,
            cluster_features: ClusterSource::Model,
            model: ModelKind::PersonaSage,
            clusterer: Clusterer::Ward,
            aggregator: Aggregator::Mean,
            k: None,
            d: None,
            total_dim: None,
            hidden_dim: 128,
            layers: 2,
            epochs: 100,
            lr: 0.01,
            seeds: (0..5).collect(),
            activation: Activation::Relu,
            readout: ReadoutKind::Conditioned,
            output: None,
            trace: None,
        }
    }
}

/// Readout width used when none is given: 70, 60 and 30 for the three
/// citation graphs, ten per class otherwise.
pub fn preset_total_dim(name: &str, num_classes: usize) -> usize {
    match name.to_ascii_lowercase().as_str() {
        "cora" => 70,
        "citeseer" => 60,
        "pubmed" => 30,
        _ => 10 * num_classes.max(1),
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::invalid("at least one seed is required"));
        }
        if self.k == Some(0) {
            return Err(Error::invalid("--k must be at least 1"));
        }
        if self.d == Some(0) || self.total_dim == Some(0) || self.hidden_dim == 0 {
            return Err(Error::invalid("dimensions must be at least 1"));
        }
        if self.layers == 0 {
            return Err(Error::invalid("--layers must be at least 1"));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::invalid("--lr must be a positive number"));
        }
        if self.k.is_some_and(|k| k > 1) && self.model != ModelKind::PersonaSage {
            return Err(Error::invalid(format!("--k applies only to personasage, not {}", self.model)));
        }
        Ok(())
    }

    /// `(K, D)` after applying presets.
    pub fn resolve_dims(&self, bundle: &GraphBundle) -> Result<(usize, usize)> {
        let total = self
            .total_dim
            .unwrap_or_else(|| preset_total_dim(&bundle.meta.name, bundle.num_classes()));
        let k = match self.model {
            ModelKind::PersonaSage => self.k.unwrap_or(bundle.num_classes().max(1)),
            ModelKind::GraphSage | ModelKind::PersonaSageK1 => 1,
        };
        let d = self.d.unwrap_or(total / k);
        if d == 0 {
            return Err(Error::invalid(format!("readout width {total} leaves no room for {k} personas")));
        }
        Ok((k, d))
    }

    pub fn train_config(&self, bundle: &GraphBundle) -> Result<TrainConfig> {
        self.validate()?;
        let (k, d) = self.resolve_dims(bundle)?;
        Ok(TrainConfig {
            model: self.model,
            features: self.features,
            cluster_features: self.cluster_features,
            clusterer: self.clusterer,
            persona: PersonaConfig {
                k,
                layers: self.layers,
                hidden_dim: self.hidden_dim,
                out_dim: d,
                aggregator: self.aggregator,
                activation: self.activation,
                readout: self.readout,
            },
            epochs: self.epochs,
            adam: AdamConfig {
                lr: self.lr,
                ..AdamConfig::default()
            },
            ..TrainConfig::default()
        })
    }
}

/// Per-persona widths for a K sweep at fixed readout width.
pub fn sweep_dims(total_dim: usize, ks: &[usize]) -> Vec<usize> {
    ks.iter().map(|&k| total_dim.checked_div(k).unwrap_or(0)).collect()
}
