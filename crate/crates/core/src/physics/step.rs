//! Semi-implicit integration of the simplified quadruped dynamics.
//!
//! Contact forces act on the base as a wrench; foot forces additionally load
//! the leg joints through the limb Jacobian transpose. Knee, thigh, and base
//! contacts push on the base only.

use rayon::prelude::*;

use crate::math::Vec3;
use crate::terrain::HeightField;

use super::actuator::{clip_torque, pd_torque, NUM_JOINTS};
use super::contact::{point_contact_force_stabilized, InverseEffectiveMass, PointForce};
use super::model::{ContactFlags, RobotModel, RobotState, NUM_LEGS};
use super::PhysicsError;

/// Inverse effective mass at a contact point: base translation plus the
/// reflected joint inertia through the point's world-frame Jacobian columns.
fn inverse_mass(base_mass: f64, joint_inertia: f64, world_cols: &[Vec3]) -> InverseEffectiveMass {
    let mut a = [[0.0; 3]; 3];
    let inv_m = 1.0 / base_mass;
    for i in 0..3 {
        a[i][i] = inv_m;
    }
    for c in world_cols {
        let v = [c.x, c.y, c.z];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += v[i] * v[j] / joint_inertia;
            }
        }
    }
    InverseEffectiveMass(a)
}

/// Per-step contact summary. `n_collisions` counts contacts on penalized
/// bodies only (base and thighs; knees when `penalize_knees` is set; feet
/// never).
#[derive(Debug, Clone, Copy, Default)]
pub struct ContactReport {
    pub n_collisions: u32,
    pub foot_normal: [f64; NUM_LEGS],
    pub foot_tangential: [f64; NUM_LEGS],
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub state: RobotState,
    pub report: ContactReport,
    pub tau_applied: [f64; NUM_JOINTS],
}

// contact point layout inside the per-robot scratch arrays
const PT_FOOT: usize = 0; // 4 feet
const PT_KNEE: usize = 4; // 4 knees
const PT_THIGH: usize = 8; // 4 thigh midpoints
const PT_BASE: usize = 12;
const NUM_POINTS: usize = 13;

/// Advance one robot by one physics substep.
pub fn step(
    model: &RobotModel,
    state: &RobotState,
    q_des: &[f64; NUM_JOINTS],
    field: &HeightField,
    dt: f64,
) -> Result<StepResult, PhysicsError> {
    if !(dt > 0.0) {
        return Err(PhysicsError::InvalidModel(format!("dt must be positive, got {dt}")));
    }
    if !state.all_finite() {
        return Err(PhysicsError::NonFiniteInput("step: state"));
    }

    let quat = state.base_quat;
    let omega_world = quat.rotate(state.base_angvel);

    // kinematics and contact points at the current state
    let mut legs = Vec::with_capacity(NUM_LEGS);
    let mut points = [Vec3::ZERO; NUM_POINTS];
    let mut vels = [Vec3::ZERO; NUM_POINTS];
    let mut inv_masses = [inverse_mass(model.base_mass, model.joint_inertia, &[]); NUM_POINTS];
    for leg in 0..NUM_LEGS {
        let q_leg = model.leg_q(&state.q, leg);
        let qd_leg = model.leg_q(&state.qd, leg);
        let k = model.leg_kinematics(leg, &q_leg);

        let foot_w = state.base_pos + quat.rotate(k.foot);
        let mut foot_joint_vel = Vec3::ZERO;
        for j in 0..3 {
            foot_joint_vel += k.jacobian[j].scale(qd_leg[j]);
        }
        let foot_vel =
            state.base_linvel + omega_world.cross(quat.rotate(k.foot)) + quat.rotate(foot_joint_vel);
        points[PT_FOOT + leg] = foot_w;
        vels[PT_FOOT + leg] = foot_vel;
        let foot_cols = [
            quat.rotate(k.jacobian[0]),
            quat.rotate(k.jacobian[1]),
            quat.rotate(k.jacobian[2]),
        ];
        inv_masses[PT_FOOT + leg] =
            inverse_mass(model.base_mass, model.joint_inertia, &foot_cols);

        let knee_w = state.base_pos + quat.rotate(k.knee);
        let mut knee_joint_vel = Vec3::ZERO;
        for j in 0..3 {
            knee_joint_vel += k.knee_jacobian[j].scale(qd_leg[j]);
        }
        let knee_vel =
            state.base_linvel + omega_world.cross(quat.rotate(k.knee)) + quat.rotate(knee_joint_vel);
        points[PT_KNEE + leg] = knee_w - Vec3::new(0.0, 0.0, model.knee_radius);
        vels[PT_KNEE + leg] = knee_vel;
        let knee_cols =
            [quat.rotate(k.knee_jacobian[0]), quat.rotate(k.knee_jacobian[1])];
        inv_masses[PT_KNEE + leg] =
            inverse_mass(model.base_mass, model.joint_inertia, &knee_cols);

        let mid = (k.hip + k.knee).scale(0.5);
        let mid_w = state.base_pos + quat.rotate(mid);
        let mid_vel = state.base_linvel
            + omega_world.cross(quat.rotate(mid))
            + quat.rotate(knee_joint_vel.scale(0.5));
        points[PT_THIGH + leg] = mid_w - Vec3::new(0.0, 0.0, model.thigh_radius);
        vels[PT_THIGH + leg] = mid_vel;
        let thigh_cols =
            [quat.rotate(k.knee_jacobian[0].scale(0.5)), quat.rotate(k.knee_jacobian[1].scale(0.5))];
        inv_masses[PT_THIGH + leg] =
            inverse_mass(model.base_mass, model.joint_inertia, &thigh_cols);

        legs.push(k);
    }
    points[PT_BASE] = state.base_pos - Vec3::new(0.0, 0.0, model.base_radius);
    vels[PT_BASE] = state.base_linvel;

    let forces: Vec<PointForce> = (0..NUM_POINTS)
        .map(|i| {
            point_contact_force_stabilized(
                points[i],
                vels[i],
                field,
                &model.material,
                &inv_masses[i],
                dt,
            )
        })
        .collect();

    let mut flags = ContactFlags::default();
    let mut report = ContactReport::default();
    let mut force_sum = Vec3::ZERO;
    let mut torque_world = Vec3::ZERO;
    for (i, pf) in forces.iter().enumerate() {
        if !pf.in_contact() {
            continue;
        }
        force_sum += pf.force;
        torque_world += (points[i] - state.base_pos).cross(pf.force);
        match i {
            i if i < PT_KNEE => {
                let leg = i - PT_FOOT;
                flags.set_foot(leg);
                report.foot_normal[leg] = pf.normal_magnitude;
                report.foot_tangential[leg] = pf.tangential_magnitude;
            }
            i if i < PT_THIGH => {
                flags.set_knee(i - PT_KNEE);
                if model.penalize_knees {
                    report.n_collisions += 1;
                }
            }
            i if i < PT_BASE => {
                flags.set_thigh(i - PT_THIGH);
                report.n_collisions += 1;
            }
            _ => {
                flags.set_base();
                report.n_collisions += 1;
            }
        }
    }

    // actuation
    let tau_raw = pd_torque(q_des, &state.q, &state.qd, &model.actuator)?;
    let tau_applied = clip_torque(&tau_raw, &state.qd, &model.actuator);

    // joint dynamics: reflected inertia driven by actuator torque plus the
    // foot contact load mapped through the leg Jacobian transpose. The
    // reaction of spinning up each rotor is a counter-torque on the base
    // about that joint's axis.
    let mut q_new = state.q;
    let mut qd_new = state.qd;
    let mut qdd_last = [0.0; NUM_JOINTS];
    let mut rotor_reaction_b = Vec3::ZERO;
    for leg in 0..NUM_LEGS {
        let pf: &PointForce = &forces[PT_FOOT + leg];
        let f_base = quat.rotate_inv(pf.force);
        let (s1, c1) = state.q[3 * leg].sin_cos();
        let axes = [Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, c1, s1), Vec3::new(0.0, c1, s1)];
        for j in 0..3 {
            let idx = 3 * leg + j;
            let tau_contact = legs[leg].jacobian[j].dot(f_base);
            let friction = -model.joint_damping * state.qd[idx];
            let qdd = (tau_applied[idx] + tau_contact + friction) / model.joint_inertia;
            let mut qd_j = state.qd[idx] + qdd * dt;
            let mut q_j = state.q[idx] + qd_j * dt;
            if q_j < model.q_lower[idx] {
                q_j = model.q_lower[idx];
                if qd_j < 0.0 {
                    qd_j = 0.0;
                }
            } else if q_j > model.q_upper[idx] {
                q_j = model.q_upper[idx];
                if qd_j > 0.0 {
                    qd_j = 0.0;
                }
            }
            qdd_last[idx] = (qd_j - state.qd[idx]) / dt;
            q_new[idx] = q_j;
            qd_new[idx] = qd_j;
            rotor_reaction_b += axes[j].scale(model.joint_inertia * qdd_last[idx]);
        }
    }

    // base dynamics
    let accel = Vec3::new(0.0, 0.0, -model.gravity) + force_sum.scale(1.0 / model.base_mass);
    let linvel_new = state.base_linvel + accel.scale(dt);
    let pos_new = state.base_pos + linvel_new.scale(dt);

    let inertia = Vec3::new(model.base_inertia[0], model.base_inertia[1], model.base_inertia[2]);
    let torque_base = quat.rotate_inv(torque_world) - rotor_reaction_b;
    let i_omega = Vec3::new(
        inertia.x * state.base_angvel.x,
        inertia.y * state.base_angvel.y,
        inertia.z * state.base_angvel.z,
    );
    let gyro = state.base_angvel.cross(i_omega);
    let ang_accel = Vec3::new(
        (torque_base.x - gyro.x) / inertia.x,
        (torque_base.y - gyro.y) / inertia.y,
        (torque_base.z - gyro.z) / inertia.z,
    );
    let angvel_new = state.base_angvel + ang_accel.scale(dt);
    let omega_world_new = quat.rotate(angvel_new);
    let quat_new =
        crate::math::Quat::from_scaled_axis(omega_world_new.scale(dt)).mul_quat(quat).normalized();

    // refresh foot kinematics at the new state
    let mut feet_pos = [Vec3::ZERO; NUM_LEGS];
    let mut feet_vel = [Vec3::ZERO; NUM_LEGS];
    let omega_world_after = quat_new.rotate(angvel_new);
    for leg in 0..NUM_LEGS {
        let k = model.leg_kinematics(leg, &model.leg_q(&q_new, leg));
        let qd_leg = model.leg_q(&qd_new, leg);
        let mut joint_vel = Vec3::ZERO;
        for j in 0..3 {
            joint_vel += k.jacobian[j].scale(qd_leg[j]);
        }
        feet_pos[leg] = pos_new + quat_new.rotate(k.foot);
        feet_vel[leg] = linvel_new
            + omega_world_after.cross(quat_new.rotate(k.foot))
            + quat_new.rotate(joint_vel);
    }

    let next = RobotState {
        base_pos: pos_new,
        base_quat: quat_new,
        base_linvel: linvel_new,
        base_angvel: angvel_new,
        q: q_new,
        qd: qd_new,
        qdd_last,
        feet_pos,
        feet_vel,
        feet_acc: state.feet_acc,
        contact_flags: flags,
    };
    if !next.all_finite() {
        return Err(PhysicsError::NonFiniteState);
    }
    Ok(StepResult { state: next, report, tau_applied })
}

/// Step a batch of independent robots. Each robot references its assigned
/// terrain; robots never interact, so the batch result is identical to
/// applying [`step`] robot by robot, for any worker count.
pub fn batch_step(
    model: &RobotModel,
    states: &[RobotState],
    q_des: &[[f64; NUM_JOINTS]],
    fields: &[&HeightField],
    dt: f64,
) -> Result<Vec<StepResult>, PhysicsError> {
    assert_eq!(states.len(), q_des.len());
    assert_eq!(states.len(), fields.len());
    let results: Vec<Result<StepResult, PhysicsError>> = states
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            step(model, s, &q_des[i], fields[i], dt)
                .map_err(|e| PhysicsError::Robot { index: i, source: Box::new(e) })
        })
        .collect();
    results.into_iter().collect()
}
