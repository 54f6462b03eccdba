//! Desk-scale training and evaluation framework for goal-conditioned
//! quadruped locomotion on procedural terrains.
//!
//! The crate is organized around the simulation and learning pipeline:
//! [`physics`] steps batches of simplified quadrupeds, [`terrain`] generates
//! and queries the procedural heightfields, [`env`] assembles observations
//! and rewards, [`net`] and [`ppo`] implement the learner, [`eval`] runs the
//! evaluation protocols, and [`cli`] ties everything to the command line.

pub mod math;
pub mod physics;
pub mod terrain;
pub mod env;
pub mod net;
