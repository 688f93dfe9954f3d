//! Finite-difference verification of the hand-derived gradients.
//!
//! Each case builds a random batch of small graphs, computes analytic
//! parameter gradients, then compares every coordinate against a central
//! difference of the loss. Cases whose pre-activations sit close to a ReLU
//! kink are resampled so the difference quotient stays meaningful.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gcn::laplacian::normalized_laplacian;
use crate::gcn::model::{masked_ce_loss, BnMode, GcnDims, GcnModel, GraphInput};
use crate::geometry::TextComponent;
use crate::linalg::Mat;
use crate::local_graph::adjacency_matrix;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradcheckConfig {
    pub cases: usize,
    pub graphs_per_case: usize,
    pub max_nodes: usize,
    pub feature_dim: usize,
    pub hidden: Vec<usize>,
    pub step: f64,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for GradcheckConfig {
    fn default() -> Self {
        Self {
            cases: 20,
            graphs_per_case: 2,
            max_nodes: 10,
            feature_dim: 6,
            hidden: vec![8, 6, 5, 4],
            step: 1e-3,
            tolerance: 1e-4,
            seed: 20,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradcheckCase {
    pub case: usize,
    pub max_rel_err: f64,
    pub worst_param: String,
    pub checked: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradcheckReport {
    pub cases: Vec<GradcheckCase>,
    pub tolerance: f64,
    pub max_rel_err: f64,
    pub passed: bool,
}

struct Case {
    inputs: Vec<GraphInput>,
    one_hops: Vec<Vec<usize>>,
    labels: Vec<Vec<u8>>,
}

fn sample_case(rng: &mut ChaCha8Rng, cfg: &GradcheckConfig) -> Case {
    let mut inputs = Vec::with_capacity(cfg.graphs_per_case);
    let mut one_hops = Vec::with_capacity(cfg.graphs_per_case);
    let mut labels = Vec::with_capacity(cfg.graphs_per_case);
    for _ in 0..cfg.graphs_per_case {
        let n = rng.random_range(3..=cfg.max_nodes);
        // scatter components and take the top-3 adjacency, as in the pipeline
        let comps: Vec<TextComponent> = (0..n)
            .map(|_| {
                TextComponent::new(
                    rng.random_range(0.0..120.0),
                    rng.random_range(0.0..120.0),
                    20.0,
                    10.0,
                    0.0,
                )
                .unwrap()
            })
            .collect();
        let nodes: Vec<usize> = (0..n).collect();
        let adj = adjacency_matrix(&nodes, &comps, 3);
        let lap = normalized_laplacian(&adj, n);
        let data: Vec<f64> = (0..n * cfg.feature_dim)
            .map(|_| rng.random_range(-1.5..1.5))
            .collect();
        inputs.push(GraphInput {
            features: Mat::from_vec(n, cfg.feature_dim, data),
            laplacian: lap.g,
        });
        let k = rng.random_range(1..n);
        let one_hop: Vec<usize> = (1..=k).collect();
        let lbl: Vec<u8> = one_hop.iter().map(|_| rng.random_range(0..2u8)).collect();
        one_hops.push(one_hop);
        labels.push(lbl);
    }
    Case {
        inputs,
        one_hops,
        labels,
    }
}

fn batch_loss(model: &GcnModel, case: &Case) -> Result<(f64, f64)> {
    let fwd = model.forward_batch(&case.inputs, BnMode::Train)?;
    let scale = 1.0 / case.inputs.len() as f64;
    let mut loss = 0.0;
    for (slot, (oh, lbl)) in case.one_hops.iter().zip(&case.labels).enumerate() {
        loss += masked_ce_loss(&fwd.probs[slot], lbl, oh).loss * scale;
    }
    Ok((loss, fwd.cache.min_abs_preactivation()))
}

/// Analytic parameter gradients of the mean masked loss over the case.
fn analytic_grads(model: &GcnModel, case: &Case) -> Result<crate::gcn::model::GcnGrads> {
    let fwd = model.forward_batch(&case.inputs, BnMode::Train)?;
    let scale = 1.0 / case.inputs.len() as f64;
    let mut dlogits = Vec::with_capacity(case.inputs.len());
    for (slot, (oh, lbl)) in case.one_hops.iter().zip(&case.labels).enumerate() {
        let mut dl = masked_ce_loss(&fwd.probs[slot], lbl, oh).dlogits;
        dl.scale(scale);
        dlogits.push(dl);
    }
    model.backward_batch(&fwd.cache, &dlogits)
}

/// Run the finite-difference suite. Relative error uses a floor of 0.01 in
/// the denominator so that near-zero gradients are compared absolutely at
/// the accuracy a 1e-3 central difference can deliver.
pub fn run_gradcheck(cfg: &GradcheckConfig) -> Result<GradcheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut cases = Vec::with_capacity(cfg.cases);
    let mut overall_max = 0.0f64;

    for case_idx in 0..cfg.cases {
        let model_seed = rng.random::<u64>();
        let mut model = GcnModel::new(
            GcnDims::new(cfg.feature_dim, cfg.hidden.clone()),
            2,
            0,
            model_seed,
        );
        // randomize the normalization parameters too
        for g in &mut model.bn.gamma {
            *g = rng.random_range(0.5..1.5);
        }
        for b in &mut model.bn.beta {
            *b = rng.random_range(-0.3..0.3);
        }

        // resample until safely away from ReLU kinks: a +-step parameter
        // perturbation moves pre-activations by at most a few multiples of
        // the step here
        let mut case = sample_case(&mut rng, cfg);
        for _ in 0..200 {
            let (_, min_abs_z) = batch_loss(&model, &case)?;
            if min_abs_z > 10.0 * cfg.step {
                break;
            }
            case = sample_case(&mut rng, cfg);
        }

        let grads = analytic_grads(&model, &case)?;
        let names = model.param_names();
        let mut max_rel = 0.0f64;
        let mut worst = String::new();
        let mut checked = 0usize;

        let param_count = model.params().len();
        for p_idx in 0..param_count {
            let len = model.params()[p_idx].len();
            for k in 0..len {
                let original = model.params()[p_idx][k];
                model.params_mut()[p_idx][k] = original + cfg.step;
                let (loss_plus, _) = batch_loss(&model, &case)?;
                model.params_mut()[p_idx][k] = original - cfg.step;
                let (loss_minus, _) = batch_loss(&model, &case)?;
                model.params_mut()[p_idx][k] = original;

                let numeric = (loss_plus - loss_minus) / (2.0 * cfg.step);
                let analytic = grads.slices()[p_idx][k];
                let denom = analytic.abs().max(numeric.abs()).max(1e-2);
                let rel = (analytic - numeric).abs() / denom;
                checked += 1;
                if rel > max_rel {
                    max_rel = rel;
                    worst = format!("{}[{k}]", names[p_idx]);
                }
            }
        }

        overall_max = overall_max.max(max_rel);
        cases.push(GradcheckCase {
            case: case_idx,
            max_rel_err: max_rel,
            worst_param: worst,
            checked,
        });
    }

    Ok(GradcheckReport {
        passed: overall_max < cfg.tolerance,
        tolerance: cfg.tolerance,
        max_rel_err: overall_max,
        cases,
    })
}
