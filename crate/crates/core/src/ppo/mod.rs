//! PPO training loop with GAE, a large-batch short-episode regime, optional
//! timeout bootstrapping (off by default), and exploration-reward gating.

mod buffer;
mod gae;
mod train;
mod update;

use thiserror::Error;

pub use buffer::RolloutBuffer;
pub use gae::{compute_gae, normalize_advantages};
pub use train::{
    train, IterationMetrics, NetConfig, TerrainSetup, TrainEvent, TrainOutput, TrainParams,
    TrainSnapshot,
};
pub use update::{ppo_update, MinibatchStats, PpoConfig, PpoOptimizer, UpdateStats};

#[derive(Debug, Error)]
pub enum PpoError {
    #[error("non-finite loss at iteration {iteration}, minibatch {minibatch} (max |advantage| = {max_abs_advantage})")]
    NonFiniteLoss { iteration: usize, minibatch: usize, max_abs_advantage: f64 },
    #[error("network: {0}")]
    Net(#[from] crate::net::NetError),
    #[error("environment: {0}")]
    Env(#[from] crate::env::EnvError),
    #[error("terrain: {0}")]
    Terrain(#[from] crate::terrain::TerrainError),
    #[error("metrics sink: {0}")]
    Sink(String),
}

/// Theoretical per-episode integral of the raw task reward at zero distance.
pub const TASK_SUM_MAX: f64 = 1.0;

/// Gating threshold: the exploration bias is dropped once the mean episode
/// task-reward sum reaches half its maximum.
pub const GATE_FRACTION: f64 = 0.5;

/// Trainer-side state the gate and metrics depend on.
#[derive(Debug, Clone)]
pub struct TrainState {
    pub iteration: usize,
    pub bias_gate: bool,
    /// Running mean of completed-episode task-reward sums.
    pub mean_task_sum: f64,
}

impl Default for TrainState {
    fn default() -> Self {
        TrainState { iteration: 0, bias_gate: true, mean_task_sum: 0.0 }
    }
}

/// Flip the exploration gate off (permanently) once the mean episode
/// task-reward sum reaches half its theoretical maximum. Returns the gate
/// value after the check.
pub fn gate_exploration(state: &mut TrainState, mean_episode_task_sum: f64) -> bool {
    state.mean_task_sum = mean_episode_task_sum;
    if state.bias_gate && mean_episode_task_sum >= GATE_FRACTION * TASK_SUM_MAX {
        state.bias_gate = false;
    }
    state.bias_gate
}
