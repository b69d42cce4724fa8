use crate::error::{check_len, Result};

/// Adam moments and hyperparameters for one flat parameter vector.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub first_moment: Vec<f64>,
    pub second_moment: Vec<f64>,
    pub step_count: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// L2 penalty coefficient applied through the loss gradient.
    pub l2_lambda: f64,
}

pub const DEFAULT_LEARNING_RATE: f64 = 1e-3;
pub const DEFAULT_L2_LAMBDA: f64 = 1e-4;

impl AdamState {
    pub fn new(n_params: usize, learning_rate: f64) -> Self {
        AdamState {
            first_moment: vec![0.0; n_params],
            second_moment: vec![0.0; n_params],
            step_count: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            l2_lambda: DEFAULT_L2_LAMBDA,
        }
    }

    pub fn with_l2(mut self, l2_lambda: f64) -> Self {
        self.l2_lambda = l2_lambda;
        self
    }
}

/// One bias-corrected Adam update of `params` in place.
pub fn adam_step(params: &mut [f64], grads: &[f64], state: &mut AdamState) -> Result<()> {
    check_len("gradient", params.len(), grads.len())?;
    check_len("first moment", params.len(), state.first_moment.len())?;
    check_len("second moment", params.len(), state.second_moment.len())?;
    state.step_count += 1;
    let t = state.step_count as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        let m = b1 * state.first_moment[i] + (1.0 - b1) * g;
        let v = b2 * state.second_moment[i] + (1.0 - b2) * g * g;
        state.first_moment[i] = m;
        state.second_moment[i] = v;
        params[i] -= state.learning_rate * (m / c1) / ((v / c2).sqrt() + state.epsilon);
    }
    Ok(())
}
