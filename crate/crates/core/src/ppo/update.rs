//! Clipped-surrogate PPO update with adaptive learning rate under a KL
//! target, entropy bonus, value regression, and global gradient clipping.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::net::{gaussian_kl, Adam, GaussianPolicy, Mat, Mlp};

use super::buffer::RolloutBuffer;
use super::PpoError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub gamma: f64,
    pub lam: f64,
    pub clip_ratio: f64,
    pub epochs: usize,
    pub minibatches: usize,
    /// Initial learning rate; adapted online toward `desired_kl`.
    pub learning_rate: f64,
    pub desired_kl: f64,
    pub lr_min: f64,
    pub lr_max: f64,
    pub value_loss_coef: f64,
    pub entropy_coef: f64,
    pub max_grad_norm: f64,
    /// Add `gamma * V(terminal)` at timeouts. Off by default: the remaining
    /// time is part of the observation, so timeouts are true terminals.
    pub bootstrap_timeouts: bool,
    pub total_iterations: usize,
    pub horizon: usize,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            gamma: 0.99,
            lam: 0.95,
            clip_ratio: 0.2,
            epochs: 5,
            minibatches: 4,
            learning_rate: 1e-3,
            desired_kl: 0.01,
            lr_min: 1e-5,
            lr_max: 1e-2,
            value_loss_coef: 1.0,
            entropy_coef: 0.005,
            max_grad_norm: 1.0,
            bootstrap_timeouts: false,
            total_iterations: 2000,
            horizon: 48,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(format!("gamma must be in (0,1), got {}", self.gamma));
        }
        if !(self.clip_ratio > 0.0) {
            return Err(format!("clip_ratio must be positive, got {}", self.clip_ratio));
        }
        if self.epochs == 0 || self.minibatches == 0 || self.horizon == 0 {
            return Err("epochs, minibatches, horizon must be nonzero".into());
        }
        Ok(())
    }
}

/// Optimizer state kept across updates.
pub struct PpoOptimizer {
    pub actor_opt: Adam,
    pub critic_opt: Adam,
    pub lr: f64,
}

impl PpoOptimizer {
    pub fn new(policy: &GaussianPolicy, critic: &Mlp, cfg: &PpoConfig) -> Self {
        PpoOptimizer {
            actor_opt: Adam::new(policy.mean_net.num_params() + policy.log_std.len()),
            critic_opt: Adam::new(critic.num_params()),
            lr: cfg.learning_rate,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct MinibatchStats {
    pub surrogate_loss: f64,
    pub value_loss: f64,
    pub clip_fraction: f64,
    pub kl: f64,
}

#[derive(Debug, Clone, Default)]
pub struct UpdateStats {
    pub surrogate_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub kl: f64,
    pub clip_fraction: f64,
    pub lr: f64,
    pub minibatches: Vec<MinibatchStats>,
}

/// Deterministic Fisher-Yates shuffle driven by the update stream.
fn shuffled_indices<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        idx.swap(i, j);
    }
    idx
}

fn clip_grad_norm(grads: &mut crate::net::MlpGrads, extra: &mut [f64], max_norm: f64) {
    let norm_sq = grads.norm_sq() + extra.iter().map(|v| v * v).sum::<f64>();
    let norm = norm_sq.sqrt();
    if norm > max_norm {
        let s = max_norm / norm;
        grads.scale(s);
        for v in extra.iter_mut() {
            *v *= s;
        }
    }
}

/// One PPO update over a full buffer. `advantages` must already be
/// normalized per batch. Returns per-minibatch and aggregate statistics.
#[allow(clippy::too_many_arguments)]
pub fn ppo_update<R: Rng>(
    buffer: &RolloutBuffer,
    advantages: &[f64],
    returns: &[f64],
    policy: &mut GaussianPolicy,
    critic: &mut Mlp,
    opt: &mut PpoOptimizer,
    cfg: &PpoConfig,
    iteration: usize,
    rng: &mut R,
) -> Result<UpdateStats, PpoError> {
    let batch = buffer.batch_len();
    debug_assert_eq!(advantages.len(), batch);
    let mb_size = batch / cfg.minibatches;
    let act_dim = buffer.act_dim;
    let eps_clip = cfg.clip_ratio;

    let mut stats = UpdateStats { lr: opt.lr, ..Default::default() };
    let mut n_mb = 0.0;

    for _epoch in 0..cfg.epochs {
        let order = shuffled_indices(batch, rng);
        for mb in 0..cfg.minibatches {
            let indices = &order[mb * mb_size..(mb + 1) * mb_size];
            let n = indices.len();
            let obs = buffer.gather_obs(indices);

            // actor forward and per-sample loss gradients
            let (means_new, actor_cache) =
                policy.mean_net.forward_cached(&obs).map_err(PpoError::Net)?;
            let mut d_mean = Mat::zeros(n, act_dim);
            let mut d_log_std = vec![0.0; act_dim];
            let mut surrogate = 0.0;
            let mut clipped = 0usize;
            let mut kl_sum = 0.0;
            for (r, &i) in indices.iter().enumerate() {
                let mean_new = means_new.row(r);
                let action = buffer.action_row(i);
                let lp_new = policy.log_prob(mean_new, action);
                let ratio = (lp_new - buffer.log_probs[i]).exp();
                let adv = advantages[i];
                let surr1 = ratio * adv;
                let surr2 = ratio.clamp(1.0 - eps_clip, 1.0 + eps_clip) * adv;
                surrogate += -surr1.min(surr2);
                if (ratio - 1.0).abs() > eps_clip {
                    clipped += 1;
                }
                // gradient flows only through the unclipped branch
                if surr1 <= surr2 {
                    let d_lp = -adv * ratio / n as f64;
                    for j in 0..act_dim {
                        let sigma = policy.log_std[j].exp();
                        let z = (action[j] - mean_new[j]) / sigma;
                        d_mean.row_mut(r)[j] = d_lp * z / sigma; // d logp / d mean = z / sigma
                        d_log_std[j] += d_lp * (z * z - 1.0);
                    }
                }
                kl_sum += gaussian_kl(
                    buffer.mean_row(i),
                    &buffer.collection_log_std,
                    mean_new,
                    &policy.log_std,
                );
            }
            let surrogate_loss = surrogate / n as f64;
            let kl_mean = kl_sum / n as f64;
            // entropy bonus: d(-c_ent * H)/d log_std_j = -c_ent
            for v in d_log_std.iter_mut() {
                *v -= cfg.entropy_coef;
            }

            // critic forward and MSE loss
            let (v_pred, critic_cache) = critic.forward_cached(&obs).map_err(PpoError::Net)?;
            let mut d_v = Mat::zeros(n, 1);
            let mut value_loss = 0.0;
            for (r, &i) in indices.iter().enumerate() {
                let err = v_pred.row(r)[0] - returns[i];
                value_loss += err * err;
                d_v.row_mut(r)[0] = cfg.value_loss_coef * 2.0 * err / n as f64;
            }
            value_loss /= n as f64;

            if !surrogate_loss.is_finite() || !value_loss.is_finite() || !kl_mean.is_finite() {
                let max_adv =
                    advantages.iter().fold(0.0f64, |m, a| m.max(a.abs()));
                return Err(PpoError::NonFiniteLoss {
                    iteration,
                    minibatch: mb,
                    max_abs_advantage: max_adv,
                });
            }

            // adapt the learning rate toward the KL target before stepping
            if cfg.desired_kl > 0.0 {
                if kl_mean > 2.0 * cfg.desired_kl {
                    opt.lr = (opt.lr / 1.5).max(cfg.lr_min);
                } else if kl_mean < 0.5 * cfg.desired_kl && kl_mean >= 0.0 {
                    opt.lr = (opt.lr * 1.5).min(cfg.lr_max);
                }
            }

            // backprop and parameter steps
            let (mut actor_grads, _) = policy.mean_net.backward(&actor_cache, &d_mean);
            clip_grad_norm(&mut actor_grads, &mut d_log_std, cfg.max_grad_norm);
            opt.actor_opt.begin_step();
            let mut off = 0;
            for (layer, g) in policy.mean_net.layers.iter_mut().zip(actor_grads.layers.iter()) {
                opt.actor_opt.update_slice(off, opt.lr, &mut layer.w.data, &g.dw.data);
                off += g.dw.data.len();
                opt.actor_opt.update_slice(off, opt.lr, &mut layer.b, &g.db);
                off += g.db.len();
            }
            opt.actor_opt.update_slice(off, opt.lr, &mut policy.log_std, &d_log_std);
            policy.clamp_log_std();

            let (mut critic_grads, _) = critic.backward(&critic_cache, &d_v);
            clip_grad_norm(&mut critic_grads, &mut [], cfg.max_grad_norm);
            opt.critic_opt.begin_step();
            let mut off = 0;
            for (layer, g) in critic.layers.iter_mut().zip(critic_grads.layers.iter()) {
                opt.critic_opt.update_slice(off, opt.lr, &mut layer.w.data, &g.dw.data);
                off += g.dw.data.len();
                opt.critic_opt.update_slice(off, opt.lr, &mut layer.b, &g.db);
                off += g.db.len();
            }

            let clip_fraction = clipped as f64 / n as f64;
            stats.minibatches.push(MinibatchStats {
                surrogate_loss,
                value_loss,
                clip_fraction,
                kl: kl_mean,
            });
            stats.surrogate_loss += surrogate_loss;
            stats.value_loss += value_loss;
            stats.kl += kl_mean;
            stats.clip_fraction += clip_fraction;
            n_mb += 1.0;
        }
    }
    stats.surrogate_loss /= n_mb;
    stats.value_loss /= n_mb;
    stats.kl /= n_mb;
    stats.clip_fraction /= n_mb;
    stats.entropy = policy.entropy();
    stats.lr = opt.lr;
    Ok(stats)
}
