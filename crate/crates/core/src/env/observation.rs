//! Observation assembly: base velocities, projected gravity, joint state,
//! the command block, previous action, and yaw-aligned terrain samples, with
//! per-group sensor noise.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::math::Vec3;
use crate::physics::{RobotModel, RobotState, NUM_JOINTS};
use crate::terrain::{Ground, HeightField};

/// Task input. For position modes this is the target expressed in the base
/// frame plus the remaining episode time; both are recomputed every control
/// step from the world-frame target and the current base pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Command {
    pub target_base_frame: Vec3,
    pub time_left: f64,
}

/// The four command slots by task mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CommandBlock {
    Position(Command),
    Velocity { vx: f64, yaw_rate: f64 },
}

/// Additive uniform noise amplitudes per sensor group (physical units).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseScales {
    pub linvel: f64,
    pub angvel: f64,
    pub gravity: f64,
    pub q: f64,
    pub qd: f64,
    pub terrain: f64,
}

impl Default for NoiseScales {
    fn default() -> Self {
        NoiseScales { linvel: 0.1, angvel: 0.2, gravity: 0.05, q: 0.01, qd: 1.5, terrain: 0.05 }
    }
}

/// Multiplicative normalization per observation group, applied after noise.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObsScales {
    pub linvel: f64,
    pub angvel: f64,
    pub q: f64,
    pub qd: f64,
    pub cmd_pos: f64,
    pub cmd_time: f64,
    pub terrain: f64,
}

impl Default for ObsScales {
    fn default() -> Self {
        ObsScales {
            linvel: 2.0,
            angvel: 0.25,
            q: 1.0,
            qd: 0.05,
            cmd_pos: 0.2,
            cmd_time: 0.2,
            terrain: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ObsConfig {
    /// Projected gravity gives the policy its orientation; removable to
    /// match a strict sensor list.
    pub include_gravity: bool,
    /// Terrain sample grid is `grid x grid` points at `spacing` meters,
    /// rotated with the base yaw. Disabled grids contribute no entries.
    pub terrain_enabled: bool,
    pub terrain_grid: usize,
    pub terrain_spacing: f64,
    /// Samples over holes are clamped to this depth below the base (m).
    pub hole_clamp_depth: f64,
    /// Global noise multiplier; 0 disables observation noise.
    pub noise_level: f64,
    pub noise: NoiseScales,
    pub scales: ObsScales,
}

impl Default for ObsConfig {
    fn default() -> Self {
        ObsConfig {
            include_gravity: true,
            terrain_enabled: true,
            terrain_grid: 11,
            terrain_spacing: 0.15,
            hole_clamp_depth: 1.0,
            noise_level: 1.0,
            noise: NoiseScales::default(),
            scales: ObsScales::default(),
        }
    }
}

impl ObsConfig {
    pub fn terrain_k(&self) -> usize {
        if self.terrain_enabled {
            self.terrain_grid * self.terrain_grid
        } else {
            0
        }
    }

    /// Total observation dimension: 3 + 3 (+3) + 12 + 12 + 4 + 12 + K.
    pub fn dim(&self) -> usize {
        let base = if self.include_gravity { 49 } else { 46 };
        base + self.terrain_k()
    }
}

/// Build one observation vector. Noise is drawn from `rng` in a fixed order,
/// so a fixed stream reproduces the observation bit for bit.
pub fn compute_observation<R: Rng>(
    state: &RobotState,
    model: &RobotModel,
    command: CommandBlock,
    prev_action: &[f64; NUM_JOINTS],
    field: &HeightField,
    cfg: &ObsConfig,
    rng: &mut R,
) -> Vec<f64> {
    let mut obs = Vec::with_capacity(cfg.dim());
    let quat = state.base_quat;
    let s = &cfg.scales;
    let n = &cfg.noise;
    let mut noise = |amp: f64, rng: &mut R| -> f64 {
        if cfg.noise_level > 0.0 && amp > 0.0 {
            rng.gen_range(-1.0..=1.0) * amp * cfg.noise_level
        } else {
            0.0
        }
    };

    let linvel_b = quat.rotate_inv(state.base_linvel);
    for v in [linvel_b.x, linvel_b.y, linvel_b.z] {
        let nz = noise(n.linvel, rng);
        obs.push((v + nz) * s.linvel);
    }
    for v in [state.base_angvel.x, state.base_angvel.y, state.base_angvel.z] {
        let nz = noise(n.angvel, rng);
        obs.push((v + nz) * s.angvel);
    }
    if cfg.include_gravity {
        let g = quat.rotate_inv(Vec3::new(0.0, 0.0, -1.0));
        for v in [g.x, g.y, g.z] {
            let nz = noise(n.gravity, rng);
            obs.push(v + nz);
        }
    }
    for j in 0..NUM_JOINTS {
        let nz = noise(n.q, rng);
        obs.push((state.q[j] - model.default_q[j] + nz) * s.q);
    }
    for j in 0..NUM_JOINTS {
        let nz = noise(n.qd, rng);
        obs.push((state.qd[j] + nz) * s.qd);
    }
    match command {
        CommandBlock::Position(cmd) => {
            obs.push(cmd.target_base_frame.x * s.cmd_pos);
            obs.push(cmd.target_base_frame.y * s.cmd_pos);
            obs.push(cmd.target_base_frame.z * s.cmd_pos);
            obs.push(cmd.time_left * s.cmd_time);
        }
        CommandBlock::Velocity { vx, yaw_rate } => {
            obs.push(vx * s.linvel);
            obs.push(yaw_rate * s.angvel);
            obs.push(0.0);
            obs.push(0.0);
        }
    }
    obs.extend_from_slice(prev_action);

    if cfg.terrain_enabled {
        let yaw = quat.yaw();
        let (sy, cy) = yaw.sin_cos();
        let half = (cfg.terrain_grid as f64 - 1.0) / 2.0;
        for ix in 0..cfg.terrain_grid {
            for iy in 0..cfg.terrain_grid {
                let lx = (ix as f64 - half) * cfg.terrain_spacing;
                let ly = (iy as f64 - half) * cfg.terrain_spacing;
                let wx = state.base_pos.x + cy * lx - sy * ly;
                let wy = state.base_pos.y + sy * lx + cy * ly;
                let rel = match field.height_at(wx, wy) {
                    Ground::Height(h) => h - state.base_pos.z,
                    Ground::Hole => -cfg.hole_clamp_depth,
                };
                let nz = noise(n.terrain, rng);
                obs.push((rel + nz) * s.terrain);
            }
        }
    }
    debug_assert_eq!(obs.len(), cfg.dim());
    obs
}

/// World-frame target expressed in the base frame plus remaining time.
pub fn position_command(
    state: &RobotState,
    target_world: Vec3,
    time_left: f64,
) -> Command {
    Command {
        target_base_frame: state.base_quat.rotate_inv(target_world - state.base_pos),
        time_left,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Quat;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn flat_field() -> HeightField {
        HeightField::new((0.0, 0.0), 0.05, 161, 161).unwrap()
    }

    fn noiseless() -> ObsConfig {
        ObsConfig { noise_level: 0.0, ..Default::default() }
    }

    #[test]
    fn dimension_is_49_plus_k() {
        let cfg = ObsConfig::default();
        assert_eq!(cfg.terrain_k(), 121);
        assert_eq!(cfg.dim(), 170);
        let flat_cfg = ObsConfig { terrain_enabled: false, ..Default::default() };
        assert_eq!(flat_cfg.dim(), 49);
        let no_grav = ObsConfig { include_gravity: false, ..Default::default() };
        assert_eq!(no_grav.dim(), 167);
    }

    #[test]
    fn command_block_from_pure_frame_arithmetic() {
        // robot at the target, identity orientation: the base-frame target is
        // just the height offset
        let model = RobotModel::default();
        let base = Vec3::new(4.0, 4.0, 0.38);
        let state = model.spawn_state(base, 0.0);
        let target = Vec3::new(4.0, 4.0, 0.5);
        let cmd = position_command(&state, target, 3.4);
        assert!((cmd.target_base_frame - Vec3::new(0.0, 0.0, 0.5 - 0.38)).norm() < 1e-12);
        assert_eq!(cmd.time_left, 3.4);

        // quarter-turn yaw: a target ahead in x appears along -y in base frame
        let state_yaw = model.spawn_state(base, std::f64::consts::FRAC_PI_2);
        let cmd2 = position_command(&state_yaw, base + Vec3::new(2.0, 0.0, 0.0), 1.0);
        assert!((cmd2.target_base_frame.x - 0.0).abs() < 1e-12);
        assert!((cmd2.target_base_frame.y + 2.0).abs() < 1e-12);
    }

    #[test]
    fn noiseless_obs_matches_layout() {
        let model = RobotModel::default();
        let mut state = model.spawn_state(Vec3::new(4.0, 4.0, 0.4), 0.0);
        state.base_linvel = Vec3::new(0.5, 0.0, 0.0);
        let field = flat_field();
        let cfg = noiseless();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cmd = CommandBlock::Position(position_command(&state, Vec3::new(6.0, 4.0, 0.5), 6.0));
        let obs =
            compute_observation(&state, &model, cmd, &[0.0; NUM_JOINTS], &field, &cfg, &mut rng);
        assert_eq!(obs.len(), cfg.dim());
        // scaled base-frame forward velocity
        assert!((obs[0] - 0.5 * 2.0).abs() < 1e-12);
        // projected gravity points down
        assert!((obs[8] + 1.0).abs() < 1e-12);
        // joint offsets from default are zero
        for k in 9..21 {
            assert_eq!(obs[k], 0.0);
        }
        // command block: 2 m ahead scaled by 0.2, time scaled by 0.2
        assert!((obs[33] - 2.0 * 0.2).abs() < 1e-12);
        assert!((obs[36] - 6.0 * 0.2).abs() < 1e-12);
        // flat terrain samples sit one base height below
        let last = *obs.last().unwrap();
        assert!((last + 0.4).abs() < 1e-12);
    }

    #[test]
    fn same_rng_seed_gives_identical_noisy_observation() {
        let model = RobotModel::default();
        let state = model.spawn_state(Vec3::new(4.0, 4.0, 0.4), 0.2);
        let field = flat_field();
        let cfg = ObsConfig::default();
        let cmd = CommandBlock::Position(position_command(&state, Vec3::new(6.0, 4.0, 0.5), 6.0));
        let a = compute_observation(
            &state,
            &model,
            cmd,
            &[0.0; NUM_JOINTS],
            &field,
            &cfg,
            &mut ChaCha8Rng::seed_from_u64(77),
        );
        let b = compute_observation(
            &state,
            &model,
            cmd,
            &[0.0; NUM_JOINTS],
            &field,
            &cfg,
            &mut ChaCha8Rng::seed_from_u64(77),
        );
        assert_eq!(a, b);
        let c = compute_observation(
            &state,
            &model,
            cmd,
            &[0.0; NUM_JOINTS],
            &field,
            &cfg,
            &mut ChaCha8Rng::seed_from_u64(78),
        );
        assert_ne!(a, c);
    }

    #[test]
    fn hole_samples_clamp_to_configured_depth() {
        let model = RobotModel::default();
        let state = model.spawn_state(Vec3::new(4.0, 4.0, 0.4), 0.0);
        let mut field = flat_field();
        for i in 0..field.rows() {
            for j in 0..field.cols() {
                field.set_node(i, j, 0.0, crate::terrain::NodeKind::Hole);
            }
        }
        let cfg = noiseless();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let cmd = CommandBlock::Position(position_command(&state, Vec3::new(6.0, 4.0, 0.5), 6.0));
        let obs =
            compute_observation(&state, &model, cmd, &[0.0; NUM_JOINTS], &field, &cfg, &mut rng);
        let first_terrain = obs[49];
        assert_eq!(first_terrain, -1.0);
    }

    #[test]
    fn terrain_grid_rotates_with_yaw() {
        // raise terrain ahead in world x; a robot yawed 90deg samples it on
        // its right side (negative local y ... encoded at the same index as a
        // forward sample for an unharmed robot)
        let model = RobotModel::default();
        let mut field = flat_field();
        for i in 0..field.rows() {
            for j in 0..field.cols() {
                let x = j as f64 * 0.05;
                if x > 4.4 {
                    field.set_node(i, j, 0.3, crate::terrain::NodeKind::Valid);
                }
            }
        }
        let cfg = noiseless();
        let cmd_target = Vec3::new(6.0, 4.0, 0.5);
        let state0 = model.spawn_state(Vec3::new(4.0, 4.0, 0.4), 0.0);
        let cmd0 = CommandBlock::Position(position_command(&state0, cmd_target, 6.0));
        let obs0 = compute_observation(
            &state0,
            &model,
            cmd0,
            &[0.0; NUM_JOINTS],
            &field,
            &cfg,
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        // the sample grid is x-major: the last rows sample ahead (+x local)
        let ahead0 = obs0[49 + 10 * 11 + 5];
        assert!((ahead0 - (0.3 - 0.4)).abs() < 1e-9, "ahead sample {ahead0}");

        let state90 = model.spawn_state(Vec3::new(4.0, 4.0, 0.4), std::f64::consts::FRAC_PI_2);
        let obs90 = compute_observation(
            &state90,
            &model,
            CommandBlock::Position(position_command(&state90, cmd_target, 6.0)),
            &[0.0; NUM_JOINTS],
            &field,
            &cfg,
            &mut ChaCha8Rng::seed_from_u64(0),
        );
        // now local +x points along world +y (flat); the ridge lies at local -y
        let ahead90 = obs90[49 + 10 * 11 + 5];
        assert!((ahead90 + 0.4).abs() < 1e-9);
        let right90 = obs90[49 + 5 * 11];
        assert!((right90 - (0.3 - 0.4)).abs() < 1e-9, "right sample {right90}");
    }

    #[test]
    fn velocity_command_block_fills_first_two_slots() {
        let model = RobotModel::default();
        let state = model.spawn_state(Vec3::new(4.0, 4.0, 0.4), 0.0);
        let field = flat_field();
        let cfg = ObsConfig { terrain_enabled: false, noise_level: 0.0, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let obs = compute_observation(
            &state,
            &model,
            CommandBlock::Velocity { vx: 1.0, yaw_rate: -0.5 },
            &[0.0; NUM_JOINTS],
            &field,
            &cfg,
            &mut rng,
        );
        assert!((obs[33] - 2.0).abs() < 1e-12);
        assert!((obs[34] + 0.5 * 0.25).abs() < 1e-12);
        assert_eq!(obs[35], 0.0);
        assert_eq!(obs[36], 0.0);
        let _ = Quat::IDENTITY;
    }
}
