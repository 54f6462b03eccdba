//! Simplified quadruped model: a 6-DoF rigid base with four three-joint
//! legs. Limbs are massless; joints carry a reflected motor inertia; contact
//! bodies are the feet, knees, thigh midpoints, and a base sphere.

use serde::{Deserialize, Serialize};

use crate::math::{Quat, Vec3};

use super::actuator::{ActuatorModel, NUM_JOINTS};
use super::contact::ContactMaterial;

pub const NUM_LEGS: usize = 4;

/// Leg order: left-front, right-front, left-hind, right-hind.
/// Joint order within a leg: hip abduction (x axis), hip flexion (y axis),
/// knee flexion (y axis).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leg {
    LeftFront = 0,
    RightFront = 1,
    LeftHind = 2,
    RightHind = 3,
}

impl Leg {
    pub const ALL: [Leg; 4] = [Leg::LeftFront, Leg::RightFront, Leg::LeftHind, Leg::RightHind];

    pub fn short_name(self) -> &'static str {
        match self {
            Leg::LeftFront => "LF",
            Leg::RightFront => "RF",
            Leg::LeftHind => "LH",
            Leg::RightHind => "RH",
        }
    }
}

/// Contact body identifiers packed into a bitmask: 4 feet, 4 knees,
/// 4 thigh midpoints, and the base sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ContactFlags(pub u16);

impl ContactFlags {
    pub fn set_foot(&mut self, leg: usize) {
        self.0 |= 1 << leg;
    }
    pub fn set_knee(&mut self, leg: usize) {
        self.0 |= 1 << (4 + leg);
    }
    pub fn set_thigh(&mut self, leg: usize) {
        self.0 |= 1 << (8 + leg);
    }
    pub fn set_base(&mut self) {
        self.0 |= 1 << 12;
    }
    pub fn foot(self, leg: usize) -> bool {
        self.0 & (1 << leg) != 0
    }
    pub fn knee(self, leg: usize) -> bool {
        self.0 & (1 << (4 + leg)) != 0
    }
    pub fn thigh(self, leg: usize) -> bool {
        self.0 & (1 << (8 + leg)) != 0
    }
    pub fn base(self) -> bool {
        self.0 & (1 << 12) != 0
    }
}

/// Full simulated state of one robot.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    /// Base center of mass, world frame (m).
    pub base_pos: Vec3,
    /// Orientation, world <- base.
    pub base_quat: Quat,
    /// Base linear velocity, world frame (m/s).
    pub base_linvel: Vec3,
    /// Base angular velocity, base frame (rad/s).
    pub base_angvel: Vec3,
    /// Joint angles (rad), leg-major order.
    pub q: [f64; NUM_JOINTS],
    /// Joint velocities (rad/s).
    pub qd: [f64; NUM_JOINTS],
    /// Joint accelerations realized over the previous step (rad/s^2).
    pub qdd_last: [f64; NUM_JOINTS],
    /// Foot positions, world frame (m).
    pub feet_pos: [Vec3; NUM_LEGS],
    /// Foot velocities, world frame (m/s).
    pub feet_vel: [Vec3; NUM_LEGS],
    /// Foot accelerations, finite-differenced per control step (m/s^2).
    /// Owned by the environment, not the substep integrator.
    pub feet_acc: [Vec3; NUM_LEGS],
    /// Bodies in contact during the last step.
    pub contact_flags: ContactFlags,
}

impl RobotState {
    pub fn all_finite(&self) -> bool {
        self.base_pos.is_finite()
            && self.base_quat.is_finite()
            && self.base_linvel.is_finite()
            && self.base_angvel.is_finite()
            && self.q.iter().all(|v| v.is_finite())
            && self.qd.iter().all(|v| v.is_finite())
            && self.qdd_last.iter().all(|v| v.is_finite())
            && self.feet_pos.iter().all(|v| v.is_finite())
            && self.feet_vel.iter().all(|v| v.is_finite())
            && self.feet_acc.iter().all(|v| v.is_finite())
    }
}

/// Geometry, mass, and material parameters of the simulated robot.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RobotModel {
    /// Base mass (kg); limbs are massless.
    pub base_mass: f64,
    /// Diagonal base inertia in the base frame (kg*m^2).
    pub base_inertia: [f64; 3],
    /// Hip attachment points in the base frame, leg order LF, RF, LH, RH.
    pub hip_offsets: [[f64; 3]; NUM_LEGS],
    /// Thigh (hip to knee) length (m).
    pub thigh_length: f64,
    /// Shank (knee to foot) length (m).
    pub shank_length: f64,
    /// Reflected motor inertia per joint (kg*m^2).
    pub joint_inertia: f64,
    /// Passive viscous joint friction (N*m*s/rad). Mechanical, so it is not
    /// subject to the actuator torque-speed envelope and keeps back-driven
    /// joints from running away past the zero-torque speed.
    pub joint_damping: f64,
    /// Default joint angles (stance pose), leg-major.
    pub default_q: [f64; NUM_JOINTS],
    /// Joint limits.
    pub q_lower: [f64; NUM_JOINTS],
    pub q_upper: [f64; NUM_JOINTS],
    /// Contact sphere radii (m).
    pub knee_radius: f64,
    pub thigh_radius: f64,
    pub base_radius: f64,
    /// Knee contacts count toward the collision penalty when set. Off by
    /// default so climbing on the knees stays unpenalized.
    pub penalize_knees: bool,
    pub gravity: f64,
    pub actuator: ActuatorModel,
    pub material: ContactMaterial,
}

impl Default for RobotModel {
    fn default() -> Self {
        let haa = 0.0;
        let front = [haa, 0.6, -1.2];
        let hind = [haa, -0.6, 1.2];
        let mut default_q = [0.0; NUM_JOINTS];
        default_q[0..3].copy_from_slice(&front);
        default_q[3..6].copy_from_slice(&front);
        default_q[6..9].copy_from_slice(&hind);
        default_q[9..12].copy_from_slice(&hind);
        RobotModel {
            base_mass: 25.0,
            base_inertia: [0.42, 0.85, 1.1],
            hip_offsets: [
                [0.3, 0.19, 0.0],
                [0.3, -0.19, 0.0],
                [-0.3, 0.19, 0.0],
                [-0.3, -0.19, 0.0],
            ],
            thigh_length: 0.25,
            shank_length: 0.25,
            joint_inertia: 0.1,
            joint_damping: 2.0,
            default_q,
            q_lower: [
                -0.8, -2.6, -2.8, -0.8, -2.6, -2.8, -0.8, -2.6, -2.8, -0.8, -2.6, -2.8,
            ],
            q_upper: [0.8, 2.6, 2.8, 0.8, 2.6, 2.8, 0.8, 2.6, 2.8, 0.8, 2.6, 2.8],
            knee_radius: 0.03,
            thigh_radius: 0.05,
            base_radius: 0.12,
            penalize_knees: false,
            gravity: 9.81,
            actuator: ActuatorModel::default(),
            material: ContactMaterial::default(),
        }
    }
}

/// Base-frame kinematics of one leg at a given joint configuration.
#[derive(Debug, Clone, Copy)]
pub struct LegKinematics {
    pub hip: Vec3,
    pub knee: Vec3,
    pub foot: Vec3,
    /// Columns of d(foot)/d(q_leg), base frame.
    pub jacobian: [Vec3; 3],
    /// Columns of d(knee)/d(q_leg), base frame (third column is zero).
    pub knee_jacobian: [Vec3; 3],
}

impl RobotModel {
    pub fn validate(&self) -> Result<(), super::PhysicsError> {
        self.actuator.validate()?;
        if !(self.base_mass > 0.0 && self.joint_inertia > 0.0) {
            return Err(super::PhysicsError::InvalidModel(
                "mass and joint inertia must be positive".into(),
            ));
        }
        if !(self.thigh_length > 0.0 && self.shank_length > 0.0) {
            return Err(super::PhysicsError::InvalidModel("link lengths must be positive".into()));
        }
        for j in 0..NUM_JOINTS {
            if self.q_lower[j] >= self.q_upper[j] {
                return Err(super::PhysicsError::InvalidModel(format!(
                    "joint {j} limits inverted"
                )));
            }
        }
        Ok(())
    }

    pub fn hip(&self, leg: usize) -> Vec3 {
        let h = self.hip_offsets[leg];
        Vec3::new(h[0], h[1], h[2])
    }

    /// Forward kinematics of one leg in the base frame.
    pub fn leg_kinematics(&self, leg: usize, q_leg: &[f64; 3]) -> LegKinematics {
        let hip = self.hip(leg);
        let (s1, c1) = q_leg[0].sin_cos();
        let (s2, c2) = q_leg[1].sin_cos();
        let q23 = q_leg[1] + q_leg[2];
        let (s23, c23) = q23.sin_cos();
        let lt = self.thigh_length;
        let ls = self.shank_length;

        // Rx(q1) applied to Ry(q2) * (0,0,-l)
        let thigh = Vec3::new(-lt * s2, s1 * lt * c2, -c1 * lt * c2);
        let shank = Vec3::new(-ls * s23, s1 * ls * c23, -c1 * ls * c23);
        let knee = hip + thigh;
        let foot = knee + shank;

        // revolute axes in the base frame
        let a1 = Vec3::new(1.0, 0.0, 0.0);
        let a23 = Vec3::new(0.0, c1, s1);
        let jacobian = [a1.cross(foot - hip), a23.cross(foot - hip), a23.cross(foot - knee)];
        let knee_jacobian = [a1.cross(knee - hip), a23.cross(knee - hip), Vec3::ZERO];
        LegKinematics { hip, knee, foot, jacobian, knee_jacobian }
    }

    pub fn leg_q(&self, q: &[f64; NUM_JOINTS], leg: usize) -> [f64; 3] {
        [q[3 * leg], q[3 * leg + 1], q[3 * leg + 2]]
    }

    /// Height of the base above the feet in the default stance.
    pub fn stand_height(&self) -> f64 {
        let k = self.leg_kinematics(0, &self.leg_q(&self.default_q, 0));
        -k.foot.z
    }

    /// Robot at rest in the default pose, base at `base_pos` with the given
    /// yaw, feet positions filled in from forward kinematics.
    pub fn spawn_state(&self, base_pos: Vec3, yaw: f64) -> RobotState {
        self.spawn_state_with_q(base_pos, yaw, self.default_q)
    }

    pub fn spawn_state_with_q(
        &self,
        base_pos: Vec3,
        yaw: f64,
        q: [f64; NUM_JOINTS],
    ) -> RobotState {
        let quat = Quat::from_yaw(yaw);
        let mut state = RobotState {
            base_pos,
            base_quat: quat,
            base_linvel: Vec3::ZERO,
            base_angvel: Vec3::ZERO,
            q,
            qd: [0.0; NUM_JOINTS],
            qdd_last: [0.0; NUM_JOINTS],
            feet_pos: [Vec3::ZERO; NUM_LEGS],
            feet_vel: [Vec3::ZERO; NUM_LEGS],
            feet_acc: [Vec3::ZERO; NUM_LEGS],
            contact_flags: ContactFlags::default(),
        };
        for leg in 0..NUM_LEGS {
            let k = self.leg_kinematics(leg, &self.leg_q(&q, leg));
            state.feet_pos[leg] = base_pos + quat.rotate(k.foot);
        }
        state
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_stance_puts_feet_under_hips() {
        let m = RobotModel::default();
        for leg in 0..NUM_LEGS {
            let k = m.leg_kinematics(leg, &m.leg_q(&m.default_q, leg));
            let hip = m.hip(leg);
            assert!((k.foot.x - hip.x).abs() < 1e-12, "leg {leg} foot x off hip");
            assert!((k.foot.y - hip.y).abs() < 1e-12);
            assert!(k.foot.z < -0.3, "foot should hang below the base");
        }
    }

    #[test]
    fn stand_height_matches_leg_geometry() {
        let m = RobotModel::default();
        let expect = 2.0 * 0.25 * 0.6f64.cos();
        assert!((m.stand_height() - expect).abs() < 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let m = RobotModel::default();
        let q0 = [0.2, 0.5, -1.1];
        let k0 = m.leg_kinematics(1, &q0);
        let h = 1e-7;
        for j in 0..3 {
            let mut qp = q0;
            qp[j] += h;
            let mut qm = q0;
            qm[j] -= h;
            let fp = m.leg_kinematics(1, &qp).foot;
            let fm = m.leg_kinematics(1, &qm).foot;
            let fd = (fp - fm).scale(1.0 / (2.0 * h));
            assert!((fd - k0.jacobian[j]).norm() < 1e-6, "column {j}");
        }
    }

    #[test]
    fn contact_flags_roundtrip() {
        let mut f = ContactFlags::default();
        f.set_foot(2);
        f.set_knee(3);
        f.set_thigh(0);
        f.set_base();
        assert!(f.foot(2) && !f.foot(0));
        assert!(f.knee(3) && !f.knee(1));
        assert!(f.thigh(0) && !f.thigh(2));
        assert!(f.base());
    }

    #[test]
    fn spawn_state_is_finite_and_at_rest() {
        let m = RobotModel::default();
        let s = m.spawn_state(Vec3::new(1.0, 2.0, 0.4), 0.3);
        assert!(s.all_finite());
        assert_eq!(s.base_linvel, Vec3::ZERO);
        assert!((s.base_quat.norm() - 1.0).abs() < 1e-12);
    }
}
