//! Goal-conditioned episode lifecycle: spawning, control-rate stepping with
//! physics substeps, reward composition per task mode, and termination.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::Vec3;
use crate::physics::{step, PhysicsError, RobotModel, RobotState, NUM_JOINTS};
use crate::terrain::{sample_target, Ground, HeightField, TerrainError};

use super::observation::{
    compute_observation, position_command, CommandBlock, ObsConfig,
};
use super::rewards::{
    exploration_bias, penalties, stall_penalty, task_reward_continuous, task_reward_final,
    tracking_reward_velocity, RewardTerms, RewardWeights,
};

/// Episode success radius around the target (m).
pub const SUCCESS_RADIUS: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskMode {
    FinalPosition,
    ContinuousPosition,
    VelocityTracking,
}

impl TaskMode {
    pub fn name(self) -> &'static str {
        match self {
            TaskMode::FinalPosition => "final_position",
            TaskMode::ContinuousPosition => "continuous_position",
            TaskMode::VelocityTracking => "velocity_tracking",
        }
    }

    pub fn is_position(self) -> bool {
        !matches!(self, TaskMode::VelocityTracking)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrashKind {
    BaseContact,
    KillHeight,
    Tilt,
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("non-finite action")]
    NonFiniteAction,
    #[error("physics: {0}")]
    Physics(#[from] PhysicsError),
    #[error("terrain: {0}")]
    Terrain(#[from] TerrainError),
    #[error("invalid spawn: {0}")]
    SpawnInvalid(String),
    #[error("step called on a finished episode")]
    EpisodeOver,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvConfig {
    pub mode: TaskMode,
    /// Episode length T (s).
    pub episode_duration: f64,
    /// Task reward window T_r (s), position modes.
    pub reward_window: f64,
    pub substep_dt: f64,
    /// Physics substeps per control step.
    pub decimation: u32,
    /// Joint target = default pose + action * action_scale.
    pub action_scale: f64,
    pub action_clip: f64,
    /// Uniform joint perturbation at spawn (rad).
    pub spawn_q_noise: f64,
    /// Crash when the base falls this far below the lowest valid terrain (m).
    pub kill_depth: f64,
    /// Crash when tilted beyond this angle for longer than the grace time.
    pub tilt_limit_deg: f64,
    pub tilt_crash_time: f64,
    /// Command ranges for the velocity-tracking mode.
    pub vx_command: (f64, f64),
    pub yaw_command: (f64, f64),
    /// Air-time reward target per step (s), velocity mode.
    pub air_time_target: f64,
    pub obs: ObsConfig,
    pub weights: RewardWeights,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            mode: TaskMode::FinalPosition,
            episode_duration: 6.0,
            reward_window: 1.0,
            substep_dt: 0.005,
            decimation: 4,
            action_scale: 0.5,
            action_clip: 6.0,
            spawn_q_noise: 0.05,
            kill_depth: 1.0,
            tilt_limit_deg: 60.0,
            tilt_crash_time: 0.2,
            vx_command: (-1.0, 1.5),
            yaw_command: (-1.0, 1.0),
            air_time_target: 0.5,
            obs: ObsConfig::default(),
            weights: RewardWeights::default(),
        }
    }
}

impl EnvConfig {
    pub fn control_dt(&self) -> f64 {
        self.substep_dt * self.decimation as f64
    }

    pub fn max_steps(&self) -> usize {
        (self.episode_duration / self.control_dt()).round() as usize
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.episode_duration > 0.0) {
            return Err("episode_duration must be positive".into());
        }
        if !(self.reward_window > 0.0 && self.reward_window <= self.episode_duration) {
            return Err("reward_window must satisfy 0 < T_r <= T".into());
        }
        if !(self.substep_dt > 0.0) || self.decimation == 0 {
            return Err("substep_dt must be positive and decimation nonzero".into());
        }
        Ok(())
    }
}

/// Outcome flags and diagnostics for one control step.
#[derive(Debug, Clone)]
pub struct StepInfo {
    pub done: bool,
    pub timeout: bool,
    pub crashed: Option<CrashKind>,
    /// Present only when the episode just ended.
    pub success: Option<bool>,
    pub progress_fraction: Option<f64>,
    pub distance_to_target: f64,
    pub speed: f64,
    /// Episode time after this step (s).
    pub time: f64,
    /// Torques applied during each physics substep, for energy accounting.
    pub substep_taus: Vec<[f64; NUM_JOINTS]>,
    /// Feet in contact at the end of the step.
    pub feet_contact: [bool; 4],
    /// Raw unweighted task-reward time integral accumulated this episode.
    pub episode_task_sum: f64,
}

/// `true` iff the robot finished within the success radius and never
/// crashed. The boundary is exclusive.
pub fn check_success(final_base_pos: Vec3, target: Vec3, crashed: bool) -> bool {
    !crashed && (final_base_pos - target).norm() < SUCCESS_RADIUS
}

/// One robot's environment. Instances share terrain read-only; every stream
/// of randomness is private to the instance, so stepping order across a
/// batch cannot change results.
pub struct Env {
    cfg: EnvConfig,
    model: Arc<RobotModel>,
    field: Arc<HeightField>,
    state: RobotState,
    target_world: Vec3,
    vel_cmd: (f64, f64),
    episode_step: usize,
    initial_distance: f64,
    prev_action: [f64; NUM_JOINTS],
    feet_air_time: [f64; 4],
    crashed: Option<CrashKind>,
    tilt_time: f64,
    done: bool,
    bias_gate: bool,
    kill_z: f64,
    episode_task_sum: f64,
    stall_steps: usize,
    noise_rng: ChaCha8Rng,
    reset_rng: ChaCha8Rng,
}

impl Env {
    /// Streams are derived from `(global_seed, env_index)` so a batch of
    /// environments is reproducible regardless of stepping order.
    pub fn new(
        cfg: EnvConfig,
        model: Arc<RobotModel>,
        field: Arc<HeightField>,
        env_index: u64,
        global_seed: u64,
    ) -> Self {
        let mut noise_rng = ChaCha8Rng::seed_from_u64(global_seed);
        noise_rng.set_stream(env_index * 4);
        let mut reset_rng = ChaCha8Rng::seed_from_u64(global_seed);
        reset_rng.set_stream(env_index * 4 + 1);
        let state = model.spawn_state(Vec3::ZERO, 0.0);
        let kill_z = field.min_valid_height() - cfg.kill_depth;
        Env {
            cfg,
            model,
            field,
            state,
            target_world: Vec3::ZERO,
            vel_cmd: (0.0, 0.0),
            episode_step: 0,
            initial_distance: 1.0,
            prev_action: [0.0; NUM_JOINTS],
            feet_air_time: [0.0; 4],
            crashed: None,
            tilt_time: 0.0,
            done: true,
            bias_gate: true,
            kill_z,
            episode_task_sum: 0.0,
            stall_steps: 0,
            noise_rng,
            reset_rng,
        }
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn state(&self) -> &RobotState {
        &self.state
    }

    pub fn target(&self) -> Vec3 {
        self.target_world
    }

    pub fn remaining_time(&self) -> f64 {
        (self.cfg.episode_duration - self.episode_step as f64 * self.cfg.control_dt()).max(0.0)
    }

    pub fn field(&self) -> &HeightField {
        &self.field
    }

    /// Replace the assigned terrain (curriculum move); takes effect at the
    /// next reset.
    pub fn set_field(&mut self, field: Arc<HeightField>) {
        self.kill_z = field.min_valid_height() - self.cfg.kill_depth;
        self.field = field;
    }

    /// Exploration-bias gate, flipped off once by the trainer.
    pub fn set_bias_gate(&mut self, active: bool) {
        self.bias_gate = active;
    }

    /// Fraction of steps this episode that triggered the stall penalty.
    pub fn stall_fraction(&self) -> f64 {
        if self.episode_step == 0 {
            0.0
        } else {
            self.stall_steps as f64 / self.episode_step as f64
        }
    }

    /// Spawn at the field center with the default pose (plus joint noise)
    /// and draw a fresh task. Returns the initial observation.
    pub fn reset(&mut self) -> Result<Vec<f64>, EnvError> {
        self.reset_with(None, None, None)
    }

    /// Reset with optional overrides used by the evaluation protocols.
    pub fn reset_with(
        &mut self,
        spawn_xy: Option<(f64, f64)>,
        target: Option<Vec3>,
        yaw: Option<f64>,
    ) -> Result<Vec<f64>, EnvError> {
        let (sx, sy) = spawn_xy.unwrap_or_else(|| self.field.center());
        let ground = match self.field.height_at(sx, sy) {
            Ground::Height(h) => h,
            Ground::Hole => {
                return Err(EnvError::SpawnInvalid(format!("spawn ({sx:.2}, {sy:.2}) over hole")))
            }
        };
        // spawn with the feet at static penetration depth so the robot
        // starts resting on the ground instead of dropping into it
        let settle =
            self.model.base_mass * self.model.gravity / (4.0 * self.model.material.stiffness);
        let base = Vec3::new(sx, sy, ground + self.model.stand_height() - settle);
        let mut q = self.model.default_q;
        if self.cfg.spawn_q_noise > 0.0 {
            for j in 0..NUM_JOINTS {
                q[j] += self.reset_rng.gen_range(-self.cfg.spawn_q_noise..=self.cfg.spawn_q_noise);
                q[j] = q[j].clamp(self.model.q_lower[j], self.model.q_upper[j]);
            }
        }
        self.state = self.model.spawn_state_with_q(base, yaw.unwrap_or(0.0), q);

        match self.cfg.mode {
            TaskMode::VelocityTracking => {
                self.vel_cmd = (
                    self.reset_rng.gen_range(self.cfg.vx_command.0..=self.cfg.vx_command.1),
                    self.reset_rng.gen_range(self.cfg.yaw_command.0..=self.cfg.yaw_command.1),
                );
                self.target_world = base;
            }
            _ => {
                self.target_world = match target {
                    Some(t) => t,
                    None => sample_target(&self.field, base, &mut self.reset_rng)?,
                };
            }
        }
        self.episode_step = 0;
        self.initial_distance = (self.state.base_pos - self.target_world).norm().max(1e-9);
        self.prev_action = [0.0; NUM_JOINTS];
        self.feet_air_time = [0.0; 4];
        self.crashed = None;
        self.tilt_time = 0.0;
        self.done = false;
        self.episode_task_sum = 0.0;
        self.stall_steps = 0;
        Ok(self.observe())
    }

    fn command_block(&self) -> CommandBlock {
        match self.cfg.mode {
            TaskMode::VelocityTracking => {
                CommandBlock::Velocity { vx: self.vel_cmd.0, yaw_rate: self.vel_cmd.1 }
            }
            _ => CommandBlock::Position(position_command(
                &self.state,
                self.target_world,
                self.remaining_time(),
            )),
        }
    }

    fn observe(&mut self) -> Vec<f64> {
        compute_observation(
            &self.state,
            &self.model,
            self.command_block(),
            &self.prev_action,
            &self.field,
            &self.cfg.obs,
            &mut self.noise_rng,
        )
    }

    /// Apply one control step: `decimation` physics substeps with PD targets
    /// `default pose + clipped action * action_scale`, then rewards,
    /// termination checks, and the next observation.
    pub fn step_env(
        &mut self,
        action: &[f64; NUM_JOINTS],
    ) -> Result<(Vec<f64>, RewardTerms, StepInfo), EnvError> {
        if self.done {
            return Err(EnvError::EpisodeOver);
        }
        if action.iter().any(|a| !a.is_finite()) {
            return Err(EnvError::NonFiniteAction);
        }
        let mut a = *action;
        for v in a.iter_mut() {
            *v = v.clamp(-self.cfg.action_clip, self.cfg.action_clip);
        }
        let mut q_des = self.model.default_q;
        for j in 0..NUM_JOINTS {
            q_des[j] += a[j] * self.cfg.action_scale;
        }

        let control_dt = self.cfg.control_dt();
        let feet_vel_before = self.state.feet_vel;
        let mut base_contact = false;
        let mut substep_taus = Vec::with_capacity(self.cfg.decimation as usize);
        let mut last_report = None;
        for _ in 0..self.cfg.decimation {
            let r = step(&self.model, &self.state, &q_des, &self.field, self.cfg.substep_dt)?;
            base_contact |= r.state.contact_flags.base();
            substep_taus.push(r.tau_applied);
            self.state = r.state;
            last_report = Some(r.report);
        }
        let report = last_report.expect("decimation >= 1");
        for leg in 0..4 {
            self.state.feet_acc[leg] =
                (self.state.feet_vel[leg] - feet_vel_before[leg]).scale(1.0 / control_dt);
        }

        self.episode_step += 1;
        let t = self.episode_step as f64 * control_dt;
        let pos = self.state.base_pos;
        let vel = self.state.base_linvel;
        let dist = (pos - self.target_world).norm();
        let speed = vel.norm();
        let w = self.cfg.weights;

        let pen = penalties(
            &self.state.qdd_last,
            substep_taus.last().expect("nonempty"),
            report.n_collisions,
            &a,
            &self.prev_action,
            &self.state.feet_acc,
            &w,
        );

        let mut terms = RewardTerms { penalties: pen, ..Default::default() };
        match self.cfg.mode {
            TaskMode::FinalPosition => {
                terms.task = task_reward_final(
                    pos,
                    self.target_world,
                    t,
                    self.cfg.episode_duration,
                    self.cfg.reward_window,
                );
                terms.bias = exploration_bias(vel, pos, self.target_world);
                terms.stall = stall_penalty(vel, pos, self.target_world);
                terms.position_total(&w, self.bias_gate, control_dt);
            }
            TaskMode::ContinuousPosition => {
                terms.task =
                    task_reward_continuous(pos, self.target_world, t, self.cfg.episode_duration);
                terms.bias = exploration_bias(vel, pos, self.target_world);
                terms.stall = stall_penalty(vel, pos, self.target_world);
                terms.position_total(&w, self.bias_gate, control_dt);
            }
            TaskMode::VelocityTracking => {
                let linvel_b = self.state.base_quat.rotate_inv(vel);
                terms.task = tracking_reward_velocity(
                    self.vel_cmd,
                    (linvel_b.x, self.state.base_angvel.z),
                );
                terms.air_time = self.update_air_time(control_dt);
                terms.velocity_total(&w, control_dt);
            }
        }
        self.episode_task_sum += terms.task * control_dt;
        if terms.stall < 0.0 {
            self.stall_steps += 1;
        }

        // termination
        if self.crashed.is_none() {
            if base_contact {
                self.crashed = Some(CrashKind::BaseContact);
            } else if pos.z < self.kill_z {
                self.crashed = Some(CrashKind::KillHeight);
            } else {
                let g_b = self.state.base_quat.rotate_inv(Vec3::new(0.0, 0.0, -1.0));
                let tilt_cos = -self.cfg.tilt_limit_deg.to_radians().cos();
                if g_b.z > tilt_cos {
                    self.tilt_time += control_dt;
                    if self.tilt_time > self.cfg.tilt_crash_time {
                        self.crashed = Some(CrashKind::Tilt);
                    }
                } else {
                    self.tilt_time = 0.0;
                }
            }
        }
        let timeout = self.crashed.is_none() && self.episode_step >= self.cfg.max_steps();
        let done = self.crashed.is_some() || timeout;
        self.done = done;

        let (success, progress) = if done {
            let progress = match self.cfg.mode {
                TaskMode::VelocityTracking => {
                    let commanded = self.vel_cmd.0.abs() * self.cfg.episode_duration;
                    if commanded < 0.1 {
                        1.0
                    } else {
                        let start = self.target_world; // spawn recorded here
                        let moved = (pos - start).norm_xy();
                        (moved / commanded).clamp(0.0, 1.0)
                    }
                }
                _ => ((self.initial_distance - dist) / self.initial_distance).clamp(0.0, 1.0),
            };
            let success = match self.cfg.mode {
                TaskMode::VelocityTracking => timeout && progress >= 0.8,
                _ => timeout && check_success(pos, self.target_world, self.crashed.is_some()),
            };
            (Some(success), Some(progress))
        } else {
            (None, None)
        };

        let feet_contact = [
            self.state.contact_flags.foot(0),
            self.state.contact_flags.foot(1),
            self.state.contact_flags.foot(2),
            self.state.contact_flags.foot(3),
        ];
        let info = StepInfo {
            done,
            timeout,
            crashed: self.crashed,
            success,
            progress_fraction: progress,
            distance_to_target: dist,
            speed,
            time: t,
            substep_taus,
            feet_contact,
            episode_task_sum: self.episode_task_sum,
        };
        self.prev_action = a;
        let obs = self.observe();
        Ok((obs, terms, info))
    }

    fn update_air_time(&mut self, dt: f64) -> f64 {
        let cmd_active = self.vel_cmd.0.abs() > 0.1;
        let mut reward = 0.0;
        for leg in 0..4 {
            if self.state.contact_flags.foot(leg) {
                if self.feet_air_time[leg] > 0.0 && cmd_active {
                    reward += self.feet_air_time[leg] - self.cfg.air_time_target;
                }
                self.feet_air_time[leg] = 0.0;
            } else {
                self.feet_air_time[leg] += dt;
            }
        }
        reward
    }
}
