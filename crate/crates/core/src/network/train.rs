//! Offline joint training and frozen-head online retraining.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::adam::{adam_step, AdamState, DEFAULT_L2_LAMBDA, DEFAULT_LEARNING_RATE};
use super::batch::TrainBatch;
use super::grad::{backprop, mse};
use super::net::{OutputLayer, RegressorNet};
use crate::error::{check_len, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    /// Fraction of samples used for training; the rest is held out.
    pub train_fraction: f64,
    pub learning_rate: f64,
    pub l2_lambda: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 5,
            batch_size: 256,
            train_fraction: 0.8,
            learning_rate: DEFAULT_LEARNING_RATE,
            l2_lambda: DEFAULT_L2_LAMBDA,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_mse: f64,
    pub test_mse: f64,
}

/// Loss history of an offline run. Entry 0 is the untrained network.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub history: Vec<EpochLoss>,
    pub train_len: usize,
    pub test_len: usize,
}

impl TrainReport {
    pub fn initial(&self) -> EpochLoss {
        self.history[0]
    }

    pub fn last(&self) -> EpochLoss {
        *self
            .history
            .last()
            .expect("history always has the initial entry")
    }
}

fn joint_params(net: &RegressorNet, out: &OutputLayer) -> Vec<f64> {
    let mut p = net.flatten_params();
    p.extend_from_slice(out.a_hat.as_slice());
    p
}

fn set_joint_params(net: &mut RegressorNet, out: &mut OutputLayer, p: &[f64]) -> Result<()> {
    let split = net.param_count();
    net.set_params(&p[..split])?;
    out.a_hat.as_mut_slice().copy_from_slice(&p[split..]);
    Ok(())
}

/// Trains regressor and output layer jointly with Adam on random minibatches.
///
/// Samples are shuffled once with `cfg.seed` and split into train/test sets;
/// input standardization is fitted on the training part. The history holds
/// plain MSE (no penalty) on both parts before training and after every epoch.
pub fn train_offline(
    net: &mut RegressorNet,
    out: &mut OutputLayer,
    data: &TrainBatch,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    if data.is_empty() {
        return Err(Error::Empty("training dataset"));
    }
    check_len("dataset joints", net.n_joints(), data.n_joints())?;
    check_len("output layer", net.basis_dim(), out.len())?;
    if cfg.batch_size == 0 || !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
        return Err(Error::Config(
            "batch_size must be > 0 and train_fraction in (0, 1)".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.shuffle(&mut rng);
    let n_train = ((data.len() as f64) * cfg.train_fraction).round() as usize;
    if n_train == 0 || n_train == data.len() {
        return Err(Error::Config(format!(
            "dataset of {} samples cannot be split {}",
            data.len(),
            cfg.train_fraction
        )));
    }
    let train = data.select(&order[..n_train]);
    let test = data.select(&order[n_train..]);
    net.fit_normalization(&train.inputs)?;

    let evaluate = |net: &RegressorNet, out: &OutputLayer, epoch| -> Result<EpochLoss> {
        Ok(EpochLoss {
            epoch,
            train_mse: mse(&net.predict_batch(out, &train.inputs)?, &train.targets)?,
            test_mse: mse(&net.predict_batch(out, &test.inputs)?, &test.targets)?,
        })
    };

    let mut history = vec![evaluate(net, out, 0)?];
    let mut params = joint_params(net, out);
    let mut adam = AdamState::new(params.len(), cfg.learning_rate).with_l2(cfg.l2_lambda);
    let mut idx: Vec<usize> = (0..train.len()).collect();
    for epoch in 1..=cfg.epochs {
        idx.shuffle(&mut rng);
        for chunk in idx.chunks(cfg.batch_size) {
            let mini = train.select(chunk);
            let g = backprop(net, out, &mini, false, adam.l2_lambda)?;
            let mut flat = g.flatten();
            flat.extend_from_slice(g.a_hat.as_ref().expect("unfrozen head").as_slice());
            adam_step(&mut params, &flat, &mut adam)?;
            set_joint_params(net, out, &params)?;
        }
        history.push(evaluate(net, out, epoch)?);
    }
    Ok(TrainReport {
        history,
        train_len: train.len(),
        test_len: test.len(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RetrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub l2_lambda: f64,
    pub seed: u64,
}

impl Default for RetrainConfig {
    fn default() -> Self {
        RetrainConfig {
            batch_size: 256,
            learning_rate: DEFAULT_LEARNING_RATE,
            l2_lambda: DEFAULT_L2_LAMBDA,
            seed: 0,
        }
    }
}

/// Backpropagation through the whole network with `â` held fixed.
///
/// Runs `passes` shuffled sweeps of minibatches over `buffer` with a fresh
/// Adam state and returns the updated regressor; `net` and `out` are left
/// untouched so the caller can swap the result in between control ticks.
pub fn retrain_online(
    net: &RegressorNet,
    out: &OutputLayer,
    buffer: &TrainBatch,
    passes: usize,
    cfg: &RetrainConfig,
) -> Result<RegressorNet> {
    if buffer.is_empty() {
        return Err(Error::Empty("retraining buffer"));
    }
    if cfg.batch_size == 0 {
        return Err(Error::Config("batch_size must be > 0".into()));
    }
    let mut updated = net.clone();
    if passes == 0 {
        return Ok(updated);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = updated.flatten_params();
    let mut adam = AdamState::new(params.len(), cfg.learning_rate).with_l2(cfg.l2_lambda);
    let mut idx: Vec<usize> = (0..buffer.len()).collect();
    for _ in 0..passes {
        idx.shuffle(&mut rng);
        for chunk in idx.chunks(cfg.batch_size) {
            let g = backprop(&updated, out, &buffer.select(chunk), true, adam.l2_lambda)?;
            adam_step(&mut params, &g.flatten(), &mut adam)?;
            updated.set_params(&params)?;
        }
    }
    if !updated.all_finite() {
        return Err(Error::NonFinite("retrained regressor weights"));
    }
    Ok(updated)
}
