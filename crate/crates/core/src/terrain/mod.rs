//! Procedural terrains: heightfield storage and queries, the six terrain
//! families with difficulty interpolation, goal sampling, and the
//! level/variant curriculum.

mod curriculum;
mod field;
mod generator;
mod sampling;

pub use curriculum::{CellIndex, CurriculumGrid};
pub use field::{Ground, HeightField, NodeKind, TerrainError};
pub use generator::{generate, GeneratorParams, TerrainFamily, TerrainSpec};
pub use sampling::{
    sample_target, TARGET_FOOTPRINT, TARGET_HEIGHT_OFFSET, TARGET_RADIUS_MAX, TARGET_RADIUS_MIN,
};
