//! Trainable relational-reasoning network over local graphs.

pub mod checkpoint;
pub mod gradcheck;
pub mod laplacian;
pub mod model;
pub mod optimizer;
pub mod train;

pub use checkpoint::{load_model, model_from_json, model_to_json, save_model};
pub use gradcheck::{run_gradcheck, GradcheckConfig, GradcheckReport};
pub use laplacian::{normalized_laplacian, LaplacianOperator};
pub use model::{
    masked_ce_loss, row_softmax, BatchNorm, BnMode, GcnDims, GcnGrads, GcnModel, GraphInput,
    MaskedLoss,
};
pub use optimizer::{Optimizer, OptimizerKind};
pub use train::{evaluate, train, EpochMetrics, TrainConfig, TrainGraph, TrainState};
