//! Reward terms: the time-gated position task reward, the velocity-tracking
//! baseline reward, motion penalties, the exploration bias, and the stall
//! penalty.

use serde::{Deserialize, Serialize};

use crate::math::Vec3;
use crate::physics::NUM_JOINTS;

/// Gaussian width of the velocity-tracking reward.
pub const TRACKING_SIGMA: f64 = 0.25;

/// Speed floor below which the exploration bias is undefined and returns 0.
pub const BIAS_SPEED_GUARD: f64 = 0.05;
/// Distance floor below which the exploration bias is undefined and returns 0.
pub const BIAS_DIST_GUARD: f64 = 0.05;

/// Stall: slower than this...
pub const STALL_SPEED: f64 = 0.1;
/// ...while farther than this from the target.
pub const STALL_DISTANCE: f64 = 0.5;

/// Task reward paid only during the final `t_r` seconds of a `t_max`-second
/// episode; inverse-quadratic in the 3D distance to the target and scaled so
/// its episode-time integral is at most 1.
pub fn task_reward_final(x_b: Vec3, x_b_star: Vec3, t: f64, t_max: f64, t_r: f64) -> f64 {
    if t > t_max - t_r {
        (1.0 / t_r) * (1.0 / (1.0 + (x_b - x_b_star).norm_sq()))
    } else {
        0.0
    }
}

/// Continuous-position baseline: the same reward paid at every step
/// (reward window spanning the whole episode).
pub fn task_reward_continuous(x_b: Vec3, x_b_star: Vec3, t: f64, t_max: f64) -> f64 {
    task_reward_final(x_b, x_b_star, t, t_max, t_max)
}

/// Velocity-tracking baseline reward over forward speed and yaw rate;
/// sideways velocity is not commanded and not tracked.
pub fn tracking_reward_velocity(v_cmd: (f64, f64), v_actual: (f64, f64)) -> f64 {
    let dv = v_cmd.0 - v_actual.0;
    let dw = v_cmd.1 - v_actual.1;
    (-(dv * dv) / TRACKING_SIGMA).exp() + (-(dw * dw) / TRACKING_SIGMA).exp()
}

/// Weights for the motion penalties and the reward composition.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardWeights {
    /// Joint acceleration penalty.
    pub c1: f64,
    /// Joint torque penalty.
    pub c2: f64,
    /// Collision count penalty.
    pub c3: f64,
    /// Action rate penalty.
    pub c4: f64,
    /// Feet acceleration penalty.
    pub c5: f64,
    /// Task reward weight (position modes).
    pub w_task: f64,
    /// Exploration bias weight (pre-gate).
    pub w_bias: f64,
    /// Stall penalty weight.
    pub w_stall: f64,
    /// Velocity-tracking reward weight (velocity mode).
    pub w_tracking: f64,
    /// Feet air-time reward weight (velocity mode).
    pub w_air_time: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            c1: 2.5e-7,
            c2: 2e-4,
            c3: 1.0,
            c4: 0.01,
            c5: 2.5e-7,
            w_task: 10.0,
            w_bias: 1.0,
            w_stall: 0.1,
            w_tracking: 1.0,
            w_air_time: 1.0,
        }
    }
}

/// Motion penalties, always <= 0: joint accelerations, joint torques,
/// collision count, action rate, and feet accelerations.
pub fn penalties(
    qdd: &[f64; NUM_JOINTS],
    tau: &[f64; NUM_JOINTS],
    n_c: u32,
    a: &[f64; NUM_JOINTS],
    a_prev: &[f64; NUM_JOINTS],
    feet_acc: &[Vec3; 4],
    w: &RewardWeights,
) -> f64 {
    let qdd_sq: f64 = qdd.iter().map(|v| v * v).sum();
    let tau_sq: f64 = tau.iter().map(|v| v * v).sum();
    let da_sq: f64 = a.iter().zip(a_prev.iter()).map(|(x, y)| (x - y) * (x - y)).sum();
    let feet_sq: f64 = feet_acc.iter().map(|f| f.norm_sq()).sum();
    -w.c1 * qdd_sq - w.c2 * tau_sq - w.c3 * n_c as f64 - w.c4 * da_sq - w.c5 * feet_sq
}

/// Cosine of the angle between the base velocity and the direction to the
/// target, in [-1, 1]. Returns 0 inside the zero-norm guards where the
/// cosine is undefined.
pub fn exploration_bias(xdot_b: Vec3, x_b: Vec3, x_b_star: Vec3) -> f64 {
    let to_target = x_b_star - x_b;
    let speed = xdot_b.norm();
    let dist = to_target.norm();
    if speed < BIAS_SPEED_GUARD || dist < BIAS_DIST_GUARD {
        return 0.0;
    }
    xdot_b.dot(to_target) / (speed * dist)
}

/// -1 while nearly stationary far from the target, 0 otherwise.
pub fn stall_penalty(xdot_b: Vec3, x_b: Vec3, x_b_star: Vec3) -> f64 {
    if xdot_b.norm() < STALL_SPEED && (x_b - x_b_star).norm() > STALL_DISTANCE {
        -1.0
    } else {
        0.0
    }
}

/// Per-step reward decomposition. `task`, `bias`, `stall`, and `air_time`
/// hold raw values (pre-weight, pre-gate, pre-dt); `penalties` already
/// carries its c-coefficients; `total` is the weighted, gated, dt-integrated
/// sum fed to the learner.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RewardTerms {
    pub task: f64,
    pub penalties: f64,
    pub bias: f64,
    pub stall: f64,
    pub air_time: f64,
    pub total: f64,
}

impl RewardTerms {
    /// Compose the total for the position modes.
    pub fn position_total(&mut self, w: &RewardWeights, bias_gate: bool, dt: f64) {
        let gate = if bias_gate { 1.0 } else { 0.0 };
        self.total = (w.w_task * self.task
            + self.penalties
            + gate * w.w_bias * self.bias
            + w.w_stall * self.stall)
            * dt;
    }

    /// Compose the total for the velocity-tracking mode.
    pub fn velocity_total(&mut self, w: &RewardWeights, dt: f64) {
        self.total =
            (w.w_tracking * self.task + self.penalties + w.w_air_time * self.air_time) * dt;
    }
}
