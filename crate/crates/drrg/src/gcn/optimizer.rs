//! Parameter updates: SGD with momentum (the default) and an
//! adaptive-moment variant, both deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{DrrgError, Result};
use crate::gcn::model::{GcnGrads, GcnModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd { lr: f64, momentum: f64 },
    Adam { lr: f64, beta1: f64, beta2: f64, eps: f64 },
}

impl Default for OptimizerKind {
    fn default() -> Self {
        OptimizerKind::Sgd {
            lr: 0.01,
            momentum: 0.9,
        }
    }
}

impl OptimizerKind {
    pub fn adam(lr: f64) -> Self {
        OptimizerKind::Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Optimizer {
    pub kind: OptimizerKind,
    velocity: GcnGrads,
    second_moment: GcnGrads,
    step_count: u64,
}

impl Optimizer {
    pub fn new(kind: OptimizerKind, model: &GcnModel) -> Self {
        Self {
            kind,
            velocity: GcnGrads::zeros_like(model),
            second_moment: GcnGrads::zeros_like(model),
            step_count: 0,
        }
    }

    pub fn step(&mut self, model: &mut GcnModel, grads: &GcnGrads) -> Result<()> {
        if !grads.is_finite() {
            return Err(DrrgError::Training(
                "non-finite gradient encountered; aborting".into(),
            ));
        }
        self.step_count += 1;
        match self.kind {
            OptimizerKind::Sgd { lr, momentum } => {
                for ((param, grad), vel) in model
                    .params_mut()
                    .into_iter()
                    .zip(grads.slices())
                    .zip(self.velocity.slices_mut())
                {
                    for ((p, &g), v) in param.iter_mut().zip(grad).zip(vel) {
                        *v = momentum * *v + g;
                        *p -= lr * *v;
                    }
                }
            }
            OptimizerKind::Adam { lr, beta1, beta2, eps } => {
                let t = self.step_count as f64;
                let bc1 = 1.0 - beta1.powf(t);
                let bc2 = 1.0 - beta2.powf(t);
                for (((param, grad), m), v) in model
                    .params_mut()
                    .into_iter()
                    .zip(grads.slices())
                    .zip(self.velocity.slices_mut())
                    .zip(self.second_moment.slices_mut())
                {
                    for (((p, &g), m1), m2) in param.iter_mut().zip(grad).zip(m).zip(v) {
                        *m1 = beta1 * *m1 + (1.0 - beta1) * g;
                        *m2 = beta2 * *m2 + (1.0 - beta2) * g * g;
                        let m_hat = *m1 / bc1;
                        let v_hat = *m2 / bc2;
                        *p -= lr * m_hat / (v_hat.sqrt() + eps);
                    }
                }
            }
        }
        Ok(())
    }
}
