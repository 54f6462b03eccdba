//! Deterministic batched quadruped dynamics: PD actuation with a
//! torque-speed envelope, penalty-based heightfield contacts, and
//! semi-implicit integration.

mod actuator;
mod contact;
mod model;
mod step;

use thiserror::Error;

pub use actuator::{clip_torque, pd_torque, ActuatorModel, NUM_JOINTS};
pub use contact::{contact_forces, ContactMaterial, PointForce};
pub use model::{ContactFlags, Leg, LegKinematics, RobotModel, RobotState, NUM_LEGS};
pub use step::{batch_step, step, ContactReport, StepResult};

#[derive(Debug, Error)]
pub enum PhysicsError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("non-finite input in {0}")]
    NonFiniteInput(&'static str),
    #[error("non-finite state produced by step")]
    NonFiniteState,
    #[error("robot {index}: {source}")]
    Robot { index: usize, source: Box<PhysicsError> },
}
