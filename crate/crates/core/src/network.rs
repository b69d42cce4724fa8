//! Regressor network, output layer, gradients and training.

mod adam;
mod batch;
mod grad;
mod io;
mod net;
mod train;

pub use adam::{adam_step, AdamState, DEFAULT_L2_LAMBDA, DEFAULT_LEARNING_RATE};
pub use batch::TrainBatch;
pub use grad::{backprop, loss_mse_l2, mse, Gradients};
pub use io::{
    load_weights, save_weights, weights_from_str, weights_to_string, write_loss_history,
    WEIGHTS_MAGIC, WEIGHTS_VERSION,
};
pub use net::{
    default_architecture, flatten_regressor, forward_regressor, predict, reshape_regressor,
    Activation, Dense, LayerSpec, OutputLayer, RegressorNet,
};
pub use train::{
    retrain_online, train_offline, EpochLoss, RetrainConfig, TrainConfig, TrainReport,
};
