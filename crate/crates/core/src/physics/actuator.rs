//! Joint-level PD actuation with a speed-dependent torque envelope.

use serde::{Deserialize, Serialize};

use super::PhysicsError;

pub const NUM_JOINTS: usize = 12;

/// PD servo gains plus the torque-speed envelope: available torque falls
/// affinely from `tau_0` at stall to zero at `omega_max`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ActuatorModel {
    /// Proportional gain (N*m/rad).
    pub kp: f64,
    /// Derivative gain (N*m*s/rad).
    pub kd: f64,
    /// Stall torque (N*m).
    pub tau_0: f64,
    /// Zero-torque speed (rad/s).
    pub omega_max: f64,
}

impl Default for ActuatorModel {
    fn default() -> Self {
        ActuatorModel { kp: 80.0, kd: 2.0, tau_0: 35.0, omega_max: 10.0 }
    }
}

impl ActuatorModel {
    pub fn validate(&self) -> Result<(), PhysicsError> {
        if !(self.kp > 0.0 && self.kd >= 0.0 && self.tau_0 > 0.0 && self.omega_max > 0.0) {
            return Err(PhysicsError::InvalidModel(format!(
                "actuator gains out of range: kp={} kd={} tau_0={} omega_max={}",
                self.kp, self.kd, self.tau_0, self.omega_max
            )));
        }
        Ok(())
    }

    /// Torque available at joint speed `omega` (always >= 0).
    pub fn tau_max(&self, omega: f64) -> f64 {
        (self.tau_0 * (1.0 - omega.abs() / self.omega_max)).max(0.0)
    }
}

/// Raw PD torque `kp*(q_des - q) - kd*qd`, before the envelope clip.
pub fn pd_torque(
    q_des: &[f64; NUM_JOINTS],
    q: &[f64; NUM_JOINTS],
    qd: &[f64; NUM_JOINTS],
    model: &ActuatorModel,
) -> Result<[f64; NUM_JOINTS], PhysicsError> {
    for v in q_des.iter().chain(q.iter()).chain(qd.iter()) {
        if !v.is_finite() {
            return Err(PhysicsError::NonFiniteInput("pd_torque"));
        }
    }
    let mut tau = [0.0; NUM_JOINTS];
    for j in 0..NUM_JOINTS {
        tau[j] = model.kp * (q_des[j] - q[j]) - model.kd * qd[j];
    }
    Ok(tau)
}

/// Clamp each joint torque into the speed-dependent envelope, preserving
/// sign.
pub fn clip_torque(
    tau: &[f64; NUM_JOINTS],
    qd: &[f64; NUM_JOINTS],
    model: &ActuatorModel,
) -> [f64; NUM_JOINTS] {
    let mut out = [0.0; NUM_JOINTS];
    for j in 0..NUM_JOINTS {
        let cap = model.tau_max(qd[j]);
        out[j] = tau[j].clamp(-cap, cap);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn model(kp: f64, kd: f64) -> ActuatorModel {
        ActuatorModel { kp, kd, ..ActuatorModel::default() }
    }

    #[test]
    fn zero_error_zero_velocity_gives_zero_torque() {
        let m = ActuatorModel::default();
        let q = [0.3; NUM_JOINTS];
        let tau = pd_torque(&q, &q, &[0.0; NUM_JOINTS], &m).unwrap();
        assert_eq!(tau, [0.0; NUM_JOINTS]);
    }

    #[test]
    fn proportional_term_alone() {
        let m = model(50.0, 0.0);
        let mut q_des = [0.0; NUM_JOINTS];
        q_des[3] = 0.1;
        let tau = pd_torque(&q_des, &[0.0; NUM_JOINTS], &[0.0; NUM_JOINTS], &m).unwrap();
        assert!((tau[3] - 5.0).abs() < 1e-12);
        assert_eq!(tau[0], 0.0);
    }

    #[test]
    fn derivative_term_alone() {
        let m = model(0.0001, 2.0); // kp must stay positive for validity
        let mut qd = [0.0; NUM_JOINTS];
        qd[7] = 1.0;
        let tau = pd_torque(&[0.0; NUM_JOINTS], &[0.0; NUM_JOINTS], &qd, &m).unwrap();
        assert!((tau[7] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_finite_input_is_hard_error() {
        let m = ActuatorModel::default();
        let mut q = [0.0; NUM_JOINTS];
        q[0] = f64::NAN;
        assert!(pd_torque(&[0.0; NUM_JOINTS], &q, &[0.0; NUM_JOINTS], &m).is_err());
    }

    #[test]
    fn clip_saturates_at_stall_torque_when_stationary() {
        let m = ActuatorModel::default();
        let tau = [2.0 * m.tau_0; NUM_JOINTS];
        let out = clip_torque(&tau, &[0.0; NUM_JOINTS], &m);
        assert_eq!(out, [m.tau_0; NUM_JOINTS]);
    }

    #[test]
    fn clip_zeroes_torque_at_max_speed() {
        let m = ActuatorModel::default();
        let tau = [10.0; NUM_JOINTS];
        let out = clip_torque(&tau, &[m.omega_max; NUM_JOINTS], &m);
        assert_eq!(out, [0.0; NUM_JOINTS]);
    }

    #[test]
    fn clip_interpolates_affinely_at_half_speed() {
        let m = ActuatorModel::default();
        let tau = [m.tau_0; NUM_JOINTS];
        let out = clip_torque(&tau, &[0.5 * m.omega_max; NUM_JOINTS], &m);
        for t in out {
            assert!((t - 0.5 * m.tau_0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn clipped_torque_stays_inside_envelope_with_sign(
            tau in -200.0f64..200.0,
            qd in -30.0f64..30.0,
        ) {
            let m = ActuatorModel::default();
            let out = clip_torque(&[tau; NUM_JOINTS], &[qd; NUM_JOINTS], &m);
            let cap = m.tau_max(qd);
            for t in out {
                prop_assert!(t.abs() <= cap + 1e-12);
                prop_assert!(t == 0.0 || t.signum() == tau.signum());
            }
        }
    }
}
