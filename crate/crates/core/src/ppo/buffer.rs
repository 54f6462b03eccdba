//! Fixed-horizon rollout storage, laid out `[step * num_envs + env]`.

use crate::net::Mat;

/// One rollout batch: `horizon` steps for `num_envs` robots, filled in step
/// order. Stores everything the update and the reproducibility contract
/// need: observations, actions, the action means, the sampling noise, log
/// probabilities, values, rewards, and termination flags.
#[derive(Debug, Clone)]
pub struct RolloutBuffer {
    pub horizon: usize,
    pub num_envs: usize,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub obs: Vec<f64>,
    pub actions: Vec<f64>,
    pub means: Vec<f64>,
    pub eps: Vec<f64>,
    pub log_probs: Vec<f64>,
    pub values: Vec<f64>,
    pub rewards: Vec<f64>,
    pub dones: Vec<bool>,
    pub timeouts: Vec<bool>,
    /// Critic value of the terminal observation, populated only at timeout
    /// steps (used when timeout bootstrapping is enabled).
    pub timeout_values: Vec<f64>,
    /// Log standard deviation of the policy at collection time.
    pub collection_log_std: Vec<f64>,
    cursor: usize,
}

impl RolloutBuffer {
    pub fn new(horizon: usize, num_envs: usize, obs_dim: usize, act_dim: usize) -> Self {
        let n = horizon * num_envs;
        RolloutBuffer {
            horizon,
            num_envs,
            obs_dim,
            act_dim,
            obs: vec![0.0; n * obs_dim],
            actions: vec![0.0; n * act_dim],
            means: vec![0.0; n * act_dim],
            eps: vec![0.0; n * act_dim],
            log_probs: vec![0.0; n],
            values: vec![0.0; n],
            rewards: vec![0.0; n],
            dones: vec![false; n],
            timeouts: vec![false; n],
            timeout_values: vec![0.0; n],
            collection_log_std: vec![0.0; act_dim],
            cursor: 0,
        }
    }

    pub fn batch_len(&self) -> usize {
        self.horizon * self.num_envs
    }

    pub fn is_full(&self) -> bool {
        self.cursor == self.horizon
    }

    pub fn clear(&mut self) {
        self.cursor = 0;
    }

    /// Index of `(step, env)` in the flat layout.
    pub fn idx(&self, step: usize, env: usize) -> usize {
        step * self.num_envs + env
    }

    /// Store one environment's transition at the current step row.
    #[allow(clippy::too_many_arguments)]
    pub fn put(
        &mut self,
        env: usize,
        obs: &[f64],
        action: &[f64],
        mean: &[f64],
        eps: &[f64],
        log_prob: f64,
        value: f64,
        reward: f64,
        done: bool,
        timeout: bool,
        timeout_value: f64,
    ) {
        debug_assert!(self.cursor < self.horizon, "buffer already full");
        let i = self.idx(self.cursor, env);
        self.obs[i * self.obs_dim..(i + 1) * self.obs_dim].copy_from_slice(obs);
        self.actions[i * self.act_dim..(i + 1) * self.act_dim].copy_from_slice(action);
        self.means[i * self.act_dim..(i + 1) * self.act_dim].copy_from_slice(mean);
        self.eps[i * self.act_dim..(i + 1) * self.act_dim].copy_from_slice(eps);
        self.log_probs[i] = log_prob;
        self.values[i] = value;
        self.rewards[i] = reward;
        self.dones[i] = done;
        self.timeouts[i] = timeout;
        self.timeout_values[i] = timeout_value;
    }

    /// Seal the current step row after every env has been written.
    pub fn advance_step(&mut self) {
        self.cursor += 1;
    }

    pub fn obs_row(&self, flat: usize) -> &[f64] {
        &self.obs[flat * self.obs_dim..(flat + 1) * self.obs_dim]
    }

    pub fn action_row(&self, flat: usize) -> &[f64] {
        &self.actions[flat * self.act_dim..(flat + 1) * self.act_dim]
    }

    pub fn mean_row(&self, flat: usize) -> &[f64] {
        &self.means[flat * self.act_dim..(flat + 1) * self.act_dim]
    }

    pub fn eps_row(&self, flat: usize) -> &[f64] {
        &self.eps[flat * self.act_dim..(flat + 1) * self.act_dim]
    }

    /// Gather rows into a dense matrix for a minibatch forward pass.
    pub fn gather_obs(&self, indices: &[usize]) -> Mat {
        let mut m = Mat::zeros(indices.len(), self.obs_dim);
        for (r, &i) in indices.iter().enumerate() {
            m.row_mut(r).copy_from_slice(self.obs_row(i));
        }
        m
    }
}
