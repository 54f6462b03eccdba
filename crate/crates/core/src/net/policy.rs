//! Diagonal-Gaussian policy head over the actor MLP with a learnable,
//! state-independent log standard deviation.

use rand::Rng;

use super::matrix::Mat;
use super::mlp::{gaussian, Mlp, NetError};

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;

const HALF_LOG_TAU: f64 = 0.9189385332046727; // 0.5 * ln(2*pi)

#[derive(Debug, Clone)]
pub struct GaussianPolicy {
    pub mean_net: Mlp,
    pub log_std: Vec<f64>,
}

impl GaussianPolicy {
    pub fn new<R: Rng>(dims: &[usize], init_log_std: f64, rng: &mut R) -> GaussianPolicy {
        let mean_net = Mlp::new(dims, 0.01, rng);
        let act_dim = mean_net.output_dim();
        GaussianPolicy { mean_net, log_std: vec![init_log_std; act_dim] }
    }

    pub fn obs_dim(&self) -> usize {
        self.mean_net.input_dim()
    }

    pub fn act_dim(&self) -> usize {
        self.mean_net.output_dim()
    }

    /// Deterministic action means for a batch of observations.
    pub fn forward_actor(&self, obs: &Mat) -> Result<Mat, NetError> {
        self.mean_net.forward(obs)
    }

    pub fn clamp_log_std(&mut self) {
        for v in self.log_std.iter_mut() {
            *v = v.clamp(LOG_STD_MIN, LOG_STD_MAX);
        }
    }

    /// Reparameterized sample `a = mu + sigma * eps`; logging `eps` makes the
    /// rollout replayable bit for bit.
    pub fn sample_with_eps(&self, mean: &[f64], eps: &[f64]) -> Vec<f64> {
        mean.iter()
            .zip(eps.iter())
            .zip(self.log_std.iter())
            .map(|((m, e), ls)| m + ls.exp() * e)
            .collect()
    }

    pub fn draw_eps<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.act_dim()).map(|_| gaussian(rng)).collect()
    }

    /// Log density of `action` under the diagonal Gaussian at `mean`.
    pub fn log_prob(&self, mean: &[f64], action: &[f64]) -> f64 {
        let mut lp = 0.0;
        for j in 0..mean.len() {
            let sigma = self.log_std[j].exp();
            let z = (action[j] - mean[j]) / sigma;
            lp += -0.5 * z * z - self.log_std[j] - HALF_LOG_TAU;
        }
        lp
    }

    /// Differential entropy, independent of the state.
    pub fn entropy(&self) -> f64 {
        self.log_std.iter().map(|ls| ls + 0.5 + HALF_LOG_TAU).sum()
    }
}

/// Analytic KL divergence between two diagonal Gaussians sharing the policy
/// parameterization, averaged later over a minibatch by the caller.
pub fn gaussian_kl(
    mean_old: &[f64],
    log_std_old: &[f64],
    mean_new: &[f64],
    log_std_new: &[f64],
) -> f64 {
    let mut kl = 0.0;
    for j in 0..mean_old.len() {
        let var_old = (2.0 * log_std_old[j]).exp();
        let var_new = (2.0 * log_std_new[j]).exp();
        let dm = mean_new[j] - mean_old[j];
        kl += log_std_new[j] - log_std_old[j] + (var_old + dm * dm) / (2.0 * var_new) - 0.5;
    }
    kl
}
