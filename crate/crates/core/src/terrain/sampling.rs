//! Polar goal sampling around a spawn position.

use rand::Rng;

use crate::math::Vec3;

use super::field::{Ground, HeightField, TerrainError};

/// Radial sampling band (m) and the fixed height offset of targets above the
/// ground surface (m).
pub const TARGET_RADIUS_MIN: f64 = 1.0;
pub const TARGET_RADIUS_MAX: f64 = 5.0;
pub const TARGET_HEIGHT_OFFSET: f64 = 0.5;

/// Footprint radius (m) that must be free of holes and high obstacles around
/// a candidate target.
pub const TARGET_FOOTPRINT: f64 = 0.2;

const MAX_ATTEMPTS: usize = 100;

/// Sample a position target uniformly in polar coordinates around `origin`:
/// radius in `[1, 5]` m, angle in `[0, 2pi)`, target height 0.5 m above the
/// ground. Candidates whose footprint overlaps holes, high obstacles, or the
/// field border are re-sampled; after 100 consecutive rejections the terrain
/// cell is reported as exhausted.
pub fn sample_target<R: Rng>(
    field: &HeightField,
    origin: Vec3,
    rng: &mut R,
) -> Result<Vec3, TerrainError> {
    for _ in 0..MAX_ATTEMPTS {
        let radius = rng.gen_range(TARGET_RADIUS_MIN..=TARGET_RADIUS_MAX);
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let x = origin.x + radius * angle.cos();
        let y = origin.y + radius * angle.sin();
        if !field.region_clear(x, y, TARGET_FOOTPRINT) {
            continue;
        }
        match field.height_at(x, y) {
            Ground::Height(h) => return Ok(Vec3::new(x, y, h + TARGET_HEIGHT_OFFSET)),
            Ground::Hole => continue,
        }
    }
    let (row, col) = field.nearest_node(origin.x, origin.y);
    Err(TerrainError::SamplingExhausted { attempts: MAX_ATTEMPTS, row, col })
}
