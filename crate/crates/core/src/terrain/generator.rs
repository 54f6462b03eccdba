//! Procedural generation of the terrain families with difficulty
//! interpolation between a per-family floor and ceiling parameter.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::field::{HeightField, NodeKind, TerrainError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerrainFamily {
    Flat,
    Stairs,
    Slope,
    RandomSteps,
    Obstacles,
    Gap,
    Pit,
}

impl TerrainFamily {
    pub fn name(self) -> &'static str {
        match self {
            TerrainFamily::Flat => "flat",
            TerrainFamily::Stairs => "stairs",
            TerrainFamily::Slope => "slope",
            TerrainFamily::RandomSteps => "random_steps",
            TerrainFamily::Obstacles => "obstacles",
            TerrainFamily::Gap => "gap",
            TerrainFamily::Pit => "pit",
        }
    }

    pub fn parse(s: &str) -> Option<TerrainFamily> {
        Some(match s {
            "flat" => TerrainFamily::Flat,
            "stairs" => TerrainFamily::Stairs,
            "slope" => TerrainFamily::Slope,
            "random_steps" => TerrainFamily::RandomSteps,
            "obstacles" => TerrainFamily::Obstacles,
            "gap" => TerrainFamily::Gap,
            "pit" => TerrainFamily::Pit,
            _ => return None,
        })
    }

    /// Default difficulty floor and ceiling for the curriculum. Units:
    /// stairs rise m, slope angle deg, random step amplitude m, obstacle
    /// footprint m, gap width m, pit depth m.
    pub fn default_param_range(self) -> (f64, f64) {
        match self {
            TerrainFamily::Flat => (0.0, 0.0),
            TerrainFamily::Stairs => (0.05, 0.4),
            TerrainFamily::Slope => (5.0, 48.0),
            TerrainFamily::RandomSteps => (0.025, 0.2),
            TerrainFamily::Obstacles => (0.1, 0.85),
            TerrainFamily::Gap => (0.1, 1.2),
            TerrainFamily::Pit => (0.1, 0.95),
        }
    }
}

/// One terrain instance request: a family at a curriculum level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerrainSpec {
    pub family: TerrainFamily,
    pub difficulty_param: f64,
    pub level: u32,
    pub max_level: u32,
}

impl TerrainSpec {
    /// Linear difficulty interpolation between `param_min` (level 0) and
    /// `param_max` (level == max_level).
    pub fn at_level(
        family: TerrainFamily,
        level: u32,
        max_level: u32,
        param_min: f64,
        param_max: f64,
    ) -> TerrainSpec {
        let level = level.min(max_level);
        let frac = if max_level == 0 { 0.0 } else { level as f64 / max_level as f64 };
        TerrainSpec {
            family,
            difficulty_param: param_min + frac * (param_max - param_min),
            level,
            max_level,
        }
    }
}

/// Shared geometry knobs for the generator.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorParams {
    /// Side length of a square terrain tile (m).
    pub tile_size: f64,
    /// Grid resolution (m per node spacing).
    pub resolution: f64,
    /// Horizontal run of one stair step (m); the difficulty parameter only
    /// varies the rise.
    pub stairs_run: f64,
    /// Top height of avoidance obstacles (m); high enough that stepping over
    /// is impossible.
    pub obstacle_height: f64,
    /// Number of obstacles scattered per tile.
    pub obstacle_count: usize,
    /// Radius kept clear of obstacles around the spawn point (m).
    pub spawn_clearance: f64,
    /// Plate size for random-step offsets (m).
    pub random_step_block: f64,
    /// Distance from the spawn point to the gap strip center (m).
    pub gap_offset: f64,
    /// Half side length of the central pit (m).
    pub pit_half_extent: f64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            tile_size: 8.0,
            resolution: 0.05,
            stairs_run: 0.3,
            obstacle_height: 1.0,
            obstacle_count: 10,
            spawn_clearance: 0.8,
            random_step_block: 0.25,
            gap_offset: 2.0,
            pit_half_extent: 1.25,
        }
    }
}

/// Generate one terrain tile. Deterministic for a fixed `(spec, seed)`.
pub fn generate(
    spec: &TerrainSpec,
    gen: &GeneratorParams,
    seed: u64,
) -> Result<HeightField, TerrainError> {
    if !(gen.tile_size > 0.0) || !(gen.resolution > 0.0) {
        return Err(TerrainError::Config(format!(
            "tile_size and resolution must be positive (got {} / {})",
            gen.tile_size, gen.resolution
        )));
    }
    let n = (gen.tile_size / gen.resolution).round() as usize + 1;
    let mut field = HeightField::new((0.0, 0.0), gen.resolution, n, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = spec.difficulty_param;
    let (cx, cy) = field.center();

    match spec.family {
        TerrainFamily::Flat => {}
        TerrainFamily::Stairs => {
            for i in 0..n {
                for j in 0..n {
                    let x = j as f64 * gen.resolution;
                    let h = (x / gen.stairs_run).floor() * p;
                    field.set_node(i, j, h, NodeKind::Valid);
                }
            }
        }
        TerrainFamily::Slope => {
            let slope = p.to_radians().tan();
            for i in 0..n {
                for j in 0..n {
                    let x = j as f64 * gen.resolution;
                    field.set_node(i, j, slope * x, NodeKind::Valid);
                }
            }
        }
        TerrainFamily::RandomSteps => {
            let block = (gen.random_step_block / gen.resolution).round().max(1.0) as usize;
            let blocks = n / block + 1;
            let mut offsets = Vec::with_capacity(blocks * blocks);
            for _ in 0..blocks * blocks {
                offsets.push(rng.gen_range(-p..=p));
            }
            for i in 0..n {
                for j in 0..n {
                    let b = (i / block) * blocks + (j / block);
                    field.set_node(i, j, offsets[b], NodeKind::Valid);
                }
            }
        }
        TerrainFamily::Obstacles => {
            let half = 0.5 * p;
            let margin = half + gen.resolution;
            let mut placed = 0;
            let mut tries = 0;
            while placed < gen.obstacle_count && tries < gen.obstacle_count * 50 {
                tries += 1;
                let ox = rng.gen_range(margin..gen.tile_size - margin);
                let oy = rng.gen_range(margin..gen.tile_size - margin);
                let d = ((ox - cx).powi(2) + (oy - cy).powi(2)).sqrt();
                if d < gen.spawn_clearance + half * std::f64::consts::SQRT_2 {
                    continue;
                }
                let j0 = (((ox - half) / gen.resolution).ceil() as usize).min(n - 1);
                let j1 = (((ox + half) / gen.resolution).floor() as usize).min(n - 1);
                let i0 = (((oy - half) / gen.resolution).ceil() as usize).min(n - 1);
                let i1 = (((oy + half) / gen.resolution).floor() as usize).min(n - 1);
                for i in i0..=i1 {
                    for j in j0..=j1 {
                        field.set_node(i, j, gen.obstacle_height, NodeKind::HighObstacle);
                    }
                }
                placed += 1;
            }
        }
        TerrainFamily::Gap => {
            let x0 = cx + gen.gap_offset - 0.5 * p;
            let x1 = cx + gen.gap_offset + 0.5 * p;
            for i in 0..n {
                for j in 0..n {
                    let x = j as f64 * gen.resolution;
                    if x >= x0 && x <= x1 {
                        field.set_node(i, j, -1.0, NodeKind::Hole);
                    }
                }
            }
        }
        TerrainFamily::Pit => {
            let e = gen.pit_half_extent;
            for i in 0..n {
                for j in 0..n {
                    let x = j as f64 * gen.resolution;
                    let y = i as f64 * gen.resolution;
                    if (x - cx).abs() <= e && (y - cy).abs() <= e {
                        field.set_node(i, j, -p, NodeKind::Valid);
                    }
                }
            }
        }
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terrain::field::Ground;

    fn gen_default(family: TerrainFamily, level: u32, seed: u64) -> HeightField {
        let (lo, hi) = family.default_param_range();
        let spec = TerrainSpec::at_level(family, level, 9, lo, hi);
        generate(&spec, &GeneratorParams::default(), seed).unwrap()
    }

    #[test]
    fn difficulty_param_hits_table_max_at_top_level() {
        let gap = TerrainSpec::at_level(TerrainFamily::Gap, 9, 9, 0.1, 1.2);
        assert_eq!(gap.difficulty_param, 1.2);
        let slope = TerrainSpec::at_level(TerrainFamily::Slope, 9, 9, 5.0, 48.0);
        assert_eq!(slope.difficulty_param, 48.0);
    }

    #[test]
    fn gap_at_hardest_level_is_exactly_1p2_m_wide() {
        let field = gen_default(TerrainFamily::Gap, 9, 1);
        // scan one row for the hole strip width
        let res = field.resolution();
        let mut first = None;
        let mut last = None;
        for j in 0..field.cols() {
            if field.node_kind(80, j) == NodeKind::Hole {
                if first.is_none() {
                    first = Some(j);
                }
                last = Some(j);
            }
        }
        let (f, l) = (first.unwrap(), last.unwrap());
        let width = (l - f) as f64 * res;
        assert!((width - 1.2).abs() <= res + 1e-12, "width {width}");
    }

    #[test]
    fn slope_at_hardest_level_is_48_degrees() {
        let field = gen_default(TerrainFamily::Slope, 9, 1);
        let h0 = field.height_at(1.0, 4.0).height().unwrap();
        let h1 = field.height_at(3.0, 4.0).height().unwrap();
        let angle = ((h1 - h0) / 2.0).atan().to_degrees();
        assert!((angle - 48.0).abs() < 1e-9, "angle {angle}");
    }

    #[test]
    fn stairs_height_follows_step_function() {
        let spec = TerrainSpec {
            family: TerrainFamily::Stairs,
            difficulty_param: 0.4,
            level: 9,
            max_level: 9,
        };
        let field = generate(&spec, &GeneratorParams::default(), 0).unwrap();
        // x = 0.45 lies within the second step (run 0.3) -> one rise of 0.4
        assert_eq!(field.height_at(0.45, 1.0), Ground::Height(0.4));
        assert_eq!(field.height_at(0.1, 1.0), Ground::Height(0.0));
        let h = field.height_at(0.95, 1.0).height().unwrap();
        assert!((h - 1.2).abs() < 1e-12, "fourth step height {h}");
    }

    #[test]
    fn level_zero_is_near_flat() {
        for family in [
            TerrainFamily::Stairs,
            TerrainFamily::Slope,
            TerrainFamily::RandomSteps,
            TerrainFamily::Pit,
        ] {
            let field = gen_default(family, 0, 7);
            let (lo, _) = family.default_param_range();
            let mut max_abs: f64 = 0.0;
            for i in 0..field.rows() {
                for j in 0..field.cols() {
                    if field.node_kind(i, j) == NodeKind::Valid {
                        max_abs = max_abs.max(field.node_height(i, j).abs());
                    }
                }
            }
            // bounded by the curriculum floor times the tile span in steps
            let bound = match family {
                TerrainFamily::Stairs => lo * (8.0 / 0.3 + 1.0),
                TerrainFamily::Slope => lo.to_radians().tan() * 8.0,
                _ => lo + 1e-12,
            };
            assert!(max_abs <= bound, "{}: {max_abs} > {bound}", family.name());
        }
    }

    #[test]
    fn gap_query_inside_strip_is_hole() {
        let field = gen_default(TerrainFamily::Gap, 9, 3);
        // strip is centered 2 m ahead of the tile center (x = 6)
        assert_eq!(field.height_at(6.0, 4.0), Ground::Hole);
        assert!(matches!(field.height_at(2.0, 4.0), Ground::Height(_)));
    }

    #[test]
    fn pit_spawn_region_is_depressed_with_vertical_walls() {
        let field = gen_default(TerrainFamily::Pit, 9, 3);
        let depth = field.height_at(4.0, 4.0).height().unwrap();
        assert!((depth + 0.95).abs() < 1e-12);
        assert_eq!(field.height_at(0.5, 0.5), Ground::Height(0.0));
        // wall transition happens within ~2 nodes
        let inside = field.height_at(4.0 + 1.2, 4.0).height().unwrap();
        let outside = field.height_at(4.0 + 1.35, 4.0).height().unwrap();
        assert!(inside < -0.9 && outside == 0.0);
    }

    #[test]
    fn obstacles_marked_high_and_clear_of_spawn() {
        let field = gen_default(TerrainFamily::Obstacles, 9, 11);
        let mut n_obstacle_nodes = 0;
        for i in 0..field.rows() {
            for j in 0..field.cols() {
                if field.node_kind(i, j) == NodeKind::HighObstacle {
                    n_obstacle_nodes += 1;
                    assert_eq!(field.node_height(i, j), 1.0);
                }
            }
        }
        assert!(n_obstacle_nodes > 0);
        // spawn disc stays clear
        assert!(field.region_clear(4.0, 4.0, 0.5));
    }

    #[test]
    fn generation_is_deterministic_per_spec_and_seed() {
        let a = gen_default(TerrainFamily::RandomSteps, 5, 42);
        let b = gen_default(TerrainFamily::RandomSteps, 5, 42);
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                assert_eq!(a.node_height(i, j).to_bits(), b.node_height(i, j).to_bits());
                assert_eq!(a.node_kind(i, j), b.node_kind(i, j));
            }
        }
        let c = gen_default(TerrainFamily::RandomSteps, 5, 43);
        let differs = (0..a.rows())
            .any(|i| (0..a.cols()).any(|j| a.node_height(i, j) != c.node_height(i, j)));
        assert!(differs);
    }
}
