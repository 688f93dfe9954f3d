//! Model checkpointing as versioned JSON with full-precision floats.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{DrrgError, Result};
use crate::gcn::model::{BatchNorm, GcnDims, GcnModel};
use crate::linalg::Mat;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct BnBlock {
    gamma: Vec<f64>,
    beta: Vec<f64>,
    running_mean: Vec<f64>,
    running_var: Vec<f64>,
    momentum: f64,
    eps: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ClassifierBlock {
    w: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Checkpoint {
    format_version: u32,
    dims: GcnDims,
    c_eps: usize,
    provider_dim: usize,
    bn: BnBlock,
    layers: Vec<Vec<f64>>,
    classifier: ClassifierBlock,
}

pub fn model_to_json(model: &GcnModel) -> Result<String> {
    let ckpt = Checkpoint {
        format_version: CHECKPOINT_VERSION,
        dims: model.dims.clone(),
        c_eps: model.c_eps,
        provider_dim: model.provider_dim,
        bn: BnBlock {
            gamma: model.bn.gamma.clone(),
            beta: model.bn.beta.clone(),
            running_mean: model.bn.running_mean.clone(),
            running_var: model.bn.running_var.clone(),
            momentum: model.bn.momentum,
            eps: model.bn.eps,
        },
        layers: model.layers.iter().map(|w| w.data().to_vec()).collect(),
        classifier: ClassifierBlock {
            w: model.classifier_w.data().to_vec(),
            b: model.classifier_b.clone(),
        },
    };
    Ok(serde_json::to_string(&ckpt)?)
}

pub fn model_from_json(json: &str) -> Result<GcnModel> {
    let ckpt: Checkpoint = serde_json::from_str(json)
        .map_err(|e| DrrgError::Checkpoint(format!("unreadable checkpoint: {e}")))?;
    if ckpt.format_version != CHECKPOINT_VERSION {
        return Err(DrrgError::Checkpoint(format!(
            "unsupported checkpoint version {} (expected {CHECKPOINT_VERSION})",
            ckpt.format_version
        )));
    }
    let dims = ckpt.dims;
    let input = dims.input;
    if ckpt.bn.gamma.len() != input
        || ckpt.bn.beta.len() != input
        || ckpt.bn.running_mean.len() != input
        || ckpt.bn.running_var.len() != input
    {
        return Err(DrrgError::Checkpoint(
            "batch-norm widths do not match the input dimension".into(),
        ));
    }
    if ckpt.layers.len() != dims.hidden.len() {
        return Err(DrrgError::Checkpoint(format!(
            "expected {} layers, found {}",
            dims.hidden.len(),
            ckpt.layers.len()
        )));
    }
    let mut layers = Vec::with_capacity(ckpt.layers.len());
    let mut d_in = input;
    for (l, (flat, &d_out)) in ckpt.layers.into_iter().zip(&dims.hidden).enumerate() {
        let expected = 2 * d_in * d_out;
        if flat.len() != expected {
            return Err(DrrgError::Checkpoint(format!(
                "layer {l} has {} values, expected {expected}",
                flat.len()
            )));
        }
        layers.push(Mat::from_vec(2 * d_in, d_out, flat));
        d_in = d_out;
    }
    let out_dim = dims.output_dim();
    if ckpt.classifier.w.len() != out_dim * 2 || ckpt.classifier.b.len() != 2 {
        return Err(DrrgError::Checkpoint("classifier shape mismatch".into()));
    }
    let model = GcnModel {
        bn: BatchNorm {
            gamma: ckpt.bn.gamma,
            beta: ckpt.bn.beta,
            running_mean: ckpt.bn.running_mean,
            running_var: ckpt.bn.running_var,
            momentum: ckpt.bn.momentum,
            eps: ckpt.bn.eps,
        },
        layers,
        classifier_w: Mat::from_vec(out_dim, 2, ckpt.classifier.w),
        classifier_b: ckpt.classifier.b,
        dims,
        c_eps: ckpt.c_eps,
        provider_dim: ckpt.provider_dim,
    };
    if !model.is_finite() {
        return Err(DrrgError::Checkpoint(
            "checkpoint contains non-finite parameters".into(),
        ));
    }
    Ok(model)
}

pub fn save_model(model: &GcnModel, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, model_to_json(model)?)?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<GcnModel> {
    let json = std::fs::read_to_string(path)?;
    model_from_json(&json)
}
