use crate::nn::ModelParams;

use super::{TrainConfig, TrainError};

/// First and second moment estimates mirroring the parameter arrays.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub m: ModelParams,
    pub v: ModelParams,
    pub step: u64,
}

impl OptimizerState {
    pub fn new(params: &ModelParams) -> OptimizerState {
        OptimizerState {
            m: params.zeros_like(),
            v: params.zeros_like(),
            step: 0,
        }
    }
}

/// One bias-corrected Adam update. A non-finite gradient aborts before any
/// array is touched.
pub fn adam_step(
    params: &mut ModelParams,
    grads: &ModelParams,
    state: &mut OptimizerState,
    config: &TrainConfig,
) -> Result<(), TrainError> {
    if let Some(name) = grads.first_non_finite() {
        return Err(TrainError::NonFiniteGradient {
            array: name,
            step: state.step + 1,
        });
    }
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (config.beta1, config.beta2);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    let lr = config.learning_rate;
    let eps = config.epsilon;
    let arrays = params
        .named_mut()
        .into_iter()
        .zip(grads.named())
        .zip(state.m.named_mut().into_iter().zip(state.v.named_mut()));
    for (((_, p), (_, g)), ((_, m), (_, v))) in arrays {
        let iter = p.data_mut().iter_mut().zip(g.data()).zip(m.data_mut().iter_mut().zip(v.data_mut()));
        for ((p, &g), (m, v)) in iter {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            *p -= lr * (*m / c1) / ((*v / c2).sqrt() + eps);
        }
    }
    Ok(())
}
