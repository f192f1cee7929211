//! Trainable score model: a tanh MLP with exact reverse-mode gradients,
//! trained by denoising score matching on sampled Brownian paths.

mod dt;
mod mlp;
mod potential;
mod provider;
mod train;

pub use dt::{dt_log_p_from_score, dt_log_p_from_score_batch};
pub use mlp::{Adam, Mlp, MlpGrads};
pub use potential::{potential_dsm_grads, potential_input_gradients};
pub use provider::NetProvider;
pub use train::{
    compile_training_pairs, default_embedded, default_hidden, dsm_loss_and_grads, lr_schedule,
    train, DsmMode, NetKind, TrainConfig, TrainOutcome, TrainingPairs,
};

use crate::manifold::ManifoldId;
use serde::{Deserialize, Serialize};

/// Serialized network state plus training metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub manifold: ManifoldId,
    /// `[input, hidden..., output]`.
    pub layer_dims: Vec<usize>,
    /// Per layer: weight matrix row-major, then bias.
    pub params: Vec<f64>,
    pub seed: u64,
    /// Epochs actually run.
    pub epochs: usize,
    pub final_loss: f64,
    /// Inputs/outputs in the ambient embedding (spheres) instead of chart
    /// coordinates.
    pub embedded: bool,
    /// Denoising target convention the model was trained with.
    pub dsm_mode: DsmMode,
    /// First-order score net or scalar potential net.
    pub kind: NetKind,
    /// Diffusion-time interval covered by the training data.
    pub t_range: (f64, f64),
}

impl Checkpoint {
    pub fn parameter_count(dims: &[usize]) -> usize {
        dims.windows(2).map(|w| w[1] * w[0] + w[1]).sum()
    }
}
