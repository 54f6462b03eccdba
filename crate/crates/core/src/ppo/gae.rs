//! Generalized advantage estimation with optional timeout bootstrapping.
//!
//! With `bootstrap_timeouts` off (the default) a timeout is treated as a
//! true terminal: no terminal-value contribution leaks past the episode
//! end. With it on, timeout steps add `gamma * V(s_terminal)` to their
//! reward, mimicking an infinite-horizon objective.

/// Arrays are laid out `[step * num_envs + env]`; `last_values` holds the
/// critic bootstrap at the post-rollout state (used only when the rollout
/// was truncated mid-episode); `timeout_values` holds the critic value of
/// the terminal observation, read only at timeout steps.
#[allow(clippy::too_many_arguments)]
pub fn compute_gae(
    rewards: &[f64],
    values: &[f64],
    dones: &[bool],
    timeouts: &[bool],
    timeout_values: &[f64],
    last_values: &[f64],
    num_envs: usize,
    gamma: f64,
    lam: f64,
    bootstrap_timeouts: bool,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    debug_assert_eq!(n % num_envs, 0);
    let horizon = n / num_envs;
    let mut advantages = vec![0.0; n];
    let mut returns = vec![0.0; n];
    for env in 0..num_envs {
        let mut tail = 0.0;
        for step in (0..horizon).rev() {
            let i = step * num_envs + env;
            let mut reward = rewards[i];
            if bootstrap_timeouts && timeouts[i] {
                reward += gamma * timeout_values[i];
            }
            let next_value = if dones[i] {
                0.0
            } else if step + 1 == horizon {
                last_values[env]
            } else {
                values[(step + 1) * num_envs + env]
            };
            let delta = reward + gamma * next_value - values[i];
            tail = delta + gamma * lam * if dones[i] { 0.0 } else { tail };
            advantages[i] = tail;
            returns[i] = tail + values[i];
        }
    }
    (advantages, returns)
}

/// Normalize advantages to zero mean, unit standard deviation.
pub fn normalize_advantages(advantages: &mut [f64]) {
    let n = advantages.len() as f64;
    let mean = advantages.iter().sum::<f64>() / n;
    let var = advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let std = var.sqrt().max(1e-8);
    for a in advantages.iter_mut() {
        *a = (*a - mean) / std;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Explicit O(T^2) oracle: A_t = sum_k (gamma*lam)^k delta_{t+k}, the sum
    /// stopping after the first terminal.
    #[allow(clippy::too_many_arguments)]
    fn gae_oracle(
        rewards: &[f64],
        values: &[f64],
        dones: &[bool],
        timeouts: &[bool],
        timeout_values: &[f64],
        last_value: f64,
        gamma: f64,
        lam: f64,
        bootstrap_timeouts: bool,
    ) -> Vec<f64> {
        let horizon = rewards.len();
        let delta = |t: usize| -> f64 {
            let mut r = rewards[t];
            if bootstrap_timeouts && timeouts[t] {
                r += gamma * timeout_values[t];
            }
            let next_v = if dones[t] {
                0.0
            } else if t + 1 == horizon {
                last_value
            } else {
                values[t + 1]
            };
            r + gamma * next_v - values[t]
        };
        (0..horizon)
            .map(|t| {
                let mut acc = 0.0;
                let mut w = 1.0;
                for k in t..horizon {
                    acc += w * delta(k);
                    if dones[k] {
                        break;
                    }
                    w *= gamma * lam;
                }
                acc
            })
            .collect()
    }

    #[test]
    fn one_step_episode_unit_reward() {
        let (adv, ret) = compute_gae(
            &[1.0],
            &[0.0],
            &[true],
            &[false],
            &[0.0],
            &[0.0],
            1,
            0.99,
            0.95,
            false,
        );
        assert_eq!(adv, vec![1.0]);
        assert_eq!(ret, vec![1.0]);
    }

    #[test]
    fn undiscounted_advantage_telescopes_to_reward_sum() {
        // gamma = 1, lam = 1, zero values, no terminals: A_t = sum_{k>=t} r_k
        let rewards = [1.0, 2.0, 3.0, 4.0];
        let (adv, _) = compute_gae(
            &rewards,
            &[0.0; 4],
            &[false; 4],
            &[false; 4],
            &[0.0; 4],
            &[0.0],
            1,
            1.0,
            1.0,
            false,
        );
        assert_eq!(adv, vec![10.0, 9.0, 7.0, 4.0]);
    }

    #[test]
    fn recursion_matches_oracle_on_random_episodes() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for trial in 0..1000 {
            let horizon = rng.gen_range(1..=8);
            let mut rewards = Vec::new();
            let mut values = Vec::new();
            let mut dones = vec![false; horizon];
            let mut timeouts = vec![false; horizon];
            let mut timeout_values = vec![0.0; horizon];
            for t in 0..horizon {
                rewards.push(rng.gen_range(-2.0..2.0));
                values.push(rng.gen_range(-2.0..2.0));
                if rng.gen_bool(0.25) {
                    dones[t] = true;
                    if rng.gen_bool(0.5) {
                        timeouts[t] = true;
                        timeout_values[t] = rng.gen_range(-2.0..2.0);
                    }
                }
            }
            let last_value = rng.gen_range(-2.0..2.0);
            let bootstrap = trial % 2 == 0;
            let (adv, ret) = compute_gae(
                &rewards,
                &values,
                &dones,
                &timeouts,
                &timeout_values,
                &[last_value],
                1,
                0.99,
                0.95,
                bootstrap,
            );
            let oracle = gae_oracle(
                &rewards,
                &values,
                &dones,
                &timeouts,
                &timeout_values,
                last_value,
                0.99,
                0.95,
                bootstrap,
            );
            for t in 0..horizon {
                assert!(
                    (adv[t] - oracle[t]).abs() < 1e-6,
                    "trial {trial} t {t}: {} vs {}",
                    adv[t],
                    oracle[t]
                );
                assert!((ret[t] - (oracle[t] + values[t])).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn timeout_without_bootstrap_carries_no_terminal_value() {
        // single step that times out: the return target must equal the raw
        // reward exactly, regardless of the stored terminal value
        let (adv, ret) = compute_gae(
            &[0.7],
            &[0.3],
            &[true],
            &[true],
            &[123.0],
            &[55.0],
            1,
            0.99,
            0.95,
            false,
        );
        assert_eq!(ret, vec![0.7]);
        assert_eq!(adv, vec![0.7 - 0.3]);
    }

    #[test]
    fn timeout_with_bootstrap_adds_terminal_value() {
        let (_, ret) = compute_gae(
            &[0.7],
            &[0.3],
            &[true],
            &[true],
            &[2.0],
            &[0.0],
            1,
            0.99,
            0.95,
            true,
        );
        assert!((ret[0] - (0.7 + 0.99 * 2.0)).abs() < 1e-12);
    }

    #[test]
    fn multi_env_layout_is_independent_per_env() {
        // two envs with different data: env layouts must not leak
        let rewards = [1.0, -1.0, 2.0, -2.0]; // steps: [e0, e1], [e0, e1]
        let values = [0.0; 4];
        let dones = [false, true, true, false];
        let (adv, _) = compute_gae(
            &rewards,
            &values,
            &dones,
            &[false; 4],
            &[0.0; 4],
            &[0.5, 0.25],
            2,
            1.0,
            1.0,
            false,
        );
        // env0: A_1 = 2 + 0 (done), A_0 = 1 + A_1
        assert_eq!(adv[2], 2.0);
        assert_eq!(adv[0], 3.0);
        // env1: A_0 done at step 0 -> -1; A_1 bootstraps last value 0.25
        assert_eq!(adv[1], -1.0);
        assert_eq!(adv[3], -2.0 + 0.25);
    }

    #[test]
    fn normalization_invariant() {
        let mut adv: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin() * 5.0 + 1.0).collect();
        normalize_advantages(&mut adv);
        let n = adv.len() as f64;
        let mean = adv.iter().sum::<f64>() / n;
        let std = (adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n).sqrt();
        assert!(mean.abs() < 1e-6);
        assert!((std - 1.0).abs() < 1e-6);
    }
}
