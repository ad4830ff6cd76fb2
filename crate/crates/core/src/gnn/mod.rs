//! Graph neural network `x_ℓ = σ_ℓ(H_ℓ(S) x_{ℓ−1})` with a single-node linear
//! readout, its gradients, and penalty-regularized ADAM training.

mod adam;
mod checkpoint;
mod forward;
mod loss;
mod model;
mod penalty;
mod train;

pub use adam::{Adam, AdamConfig};
pub use checkpoint::Checkpoint;
pub use forward::{
    backward, backward_from_output, features, forward, predict, predict_many, Forward,
    ForwardCache, Gradients,
};
pub use loss::{smooth_l1, smooth_l1_grad, SMOOTH_L1_BETA};
pub use model::{Activation, GnnModel, LayerShape, LayerSpec};
pub use penalty::{filter_penalty, penalty, PenaltyGrid, PenaltyValue};
pub use train::{
    spectral_interval, train, write_trace_csv, Dataset, EpochStats, Sample, TrainConfig,
    TrainOutcome,
};
