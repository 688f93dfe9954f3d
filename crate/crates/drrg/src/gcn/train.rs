//! Training loop over labeled local graphs: seeded shuffling, mini-batches
//! with pooled batch-norm statistics, masked one-hop loss, and per-epoch
//! metrics.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{DrrgError, Result};
use crate::features::{assemble_feature_matrix, EmbeddingConfig, FeatureProvider};
use crate::gcn::laplacian::normalized_laplacian;
use crate::gcn::model::{masked_ce_loss, BnMode, GcnModel, GraphInput};
use crate::gcn::optimizer::{Optimizer, OptimizerKind};
use crate::geometry::TextComponent;
use crate::local_graph::LocalGraph;

/// One labeled local graph prepared for the network: normalized features,
/// propagation operator, one-hop row indices, and their labels.
#[derive(Debug, Clone)]
pub struct TrainGraph {
    pub input: GraphInput,
    pub one_hop: Vec<usize>,
    pub labels: Vec<u8>,
}

impl TrainGraph {
    pub fn from_local(
        g: &LocalGraph,
        comps: &[TextComponent],
        provider: &FeatureProvider,
        cfg: &EmbeddingConfig,
    ) -> Result<Self> {
        let labels = g.labels.clone().ok_or_else(|| {
            DrrgError::InvalidArgument(format!("graph for pivot {} carries no labels", g.pivot))
        })?;
        if labels.len() != g.one_hop.len() {
            return Err(DrrgError::InvalidArgument(
                "labels must parallel the one-hop set".into(),
            ));
        }
        let features = assemble_feature_matrix(g, comps, provider, cfg)?;
        let lap = normalized_laplacian(&g.adjacency, g.nodes.len());
        Ok(Self {
            input: GraphInput {
                features: features.mat,
                laplacian: lap.g,
            },
            one_hop: g.one_hop.clone(),
            labels,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerKind,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 32,
            optimizer: OptimizerKind::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub loss: f64,
    pub accuracy: f64,
}

/// Everything produced by a training run.
#[derive(Debug)]
pub struct TrainState {
    pub model: GcnModel,
    pub optimizer: Optimizer,
    pub epoch: usize,
    pub seed: u64,
    pub history: Vec<EpochMetrics>,
    pub degenerate_labels: bool,
}

/// Train the model in place over the dataset. Deterministic for a fixed
/// seed and data order.
pub fn train(model: GcnModel, data: &[TrainGraph], cfg: &TrainConfig) -> Result<TrainState> {
    if data.is_empty() {
        return Err(DrrgError::InvalidArgument("empty training dataset".into()));
    }
    let mut model = model;
    let positives: usize = data
        .iter()
        .map(|g| g.labels.iter().filter(|&&l| l == 1).count())
        .sum();
    let totals: usize = data.iter().map(|g| g.labels.len()).sum();
    let degenerate = positives == 0 || positives == totals;
    if degenerate {
        log::warn!(
            "degenerate training labels: {positives} positive of {totals} one-hop nodes"
        );
    }

    let mut optimizer = Optimizer::new(cfg.optimizer, &model);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for _epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        let mut epoch_nodes = 0usize;
        let mut epoch_correct = 0usize;
        let mut batches = 0usize;

        for chunk in order.chunks(cfg.batch_size.max(1)) {
            let inputs: Vec<GraphInput> =
                chunk.iter().map(|&i| data[i].input.clone()).collect();
            let fwd = model.forward_batch(&inputs, BnMode::Train)?;

            let scale = 1.0 / chunk.len() as f64;
            let mut batch_loss = 0.0;
            let mut dlogits = Vec::with_capacity(chunk.len());
            for (slot, &gi) in chunk.iter().enumerate() {
                let g = &data[gi];
                let masked = masked_ce_loss(&fwd.probs[slot], &g.labels, &g.one_hop);
                batch_loss += masked.loss * scale;
                let mut dl = masked.dlogits;
                dl.scale(scale);
                dlogits.push(dl);

                for (&row, &label) in g.one_hop.iter().zip(&g.labels) {
                    let p1 = fwd.probs[slot][(row, 1)];
                    let predicted = u8::from(p1 >= 0.5);
                    if predicted == label {
                        epoch_correct += 1;
                    }
                    epoch_nodes += 1;
                }
            }

            let grads = model.backward_batch(&fwd.cache, &dlogits)?;
            optimizer.step(&mut model, &grads)?;
            model.update_running_stats(&fwd.cache);
            epoch_loss += batch_loss;
            batches += 1;
        }

        history.push(EpochMetrics {
            loss: epoch_loss / batches.max(1) as f64,
            accuracy: epoch_correct as f64 / epoch_nodes.max(1) as f64,
        });
    }

    Ok(TrainState {
        model,
        optimizer,
        epoch: cfg.epochs,
        seed: cfg.seed,
        history,
        degenerate_labels: degenerate,
    })
}

/// Inference-mode loss and one-hop accuracy over a dataset.
pub fn evaluate(model: &GcnModel, data: &[TrainGraph]) -> Result<EpochMetrics> {
    let mut loss = 0.0;
    let mut graphs = 0usize;
    let mut nodes = 0usize;
    let mut correct = 0usize;
    for g in data {
        let probs = model.forward(&g.input, BnMode::Inference)?;
        let masked = masked_ce_loss(&probs, &g.labels, &g.one_hop);
        loss += masked.loss;
        graphs += 1;
        for (&row, &label) in g.one_hop.iter().zip(&g.labels) {
            let predicted = u8::from(probs[(row, 1)] >= 0.5);
            if predicted == label {
                correct += 1;
            }
            nodes += 1;
        }
    }
    Ok(EpochMetrics {
        loss: loss / graphs.max(1) as f64,
        accuracy: correct as f64 / nodes.max(1) as f64,
    })
}
