//! Terrain curriculum: a grid of difficulty levels by variants with
//! per-robot cell assignments updated from episode outcomes.

use rand::Rng;

/// Position of one robot in the curriculum grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellIndex {
    pub level: u32,
    pub variant: u32,
}

/// Levels-by-variants grid with one assignment per robot. Rows order terrain
/// difficulty; columns are independently seeded variants of the same family.
#[derive(Debug, Clone)]
pub struct CurriculumGrid {
    max_level: u32,
    variants: u32,
    assignments: Vec<CellIndex>,
}

impl CurriculumGrid {
    /// All robots start at level 0, spread round-robin over variants.
    pub fn new(num_robots: usize, max_level: u32, variants: u32) -> Self {
        let variants = variants.max(1);
        let assignments = (0..num_robots)
            .map(|i| CellIndex { level: 0, variant: i as u32 % variants })
            .collect();
        CurriculumGrid { max_level, variants, assignments }
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn variants(&self) -> u32 {
        self.variants
    }

    pub fn assignment(&self, robot: usize) -> CellIndex {
        self.assignments[robot]
    }

    pub fn set_assignment(&mut self, robot: usize, cell: CellIndex) {
        assert!(cell.level <= self.max_level && cell.variant < self.variants);
        self.assignments[robot] = cell;
    }

    pub fn mean_level(&self) -> f64 {
        if self.assignments.is_empty() {
            return 0.0;
        }
        let sum: u64 = self.assignments.iter().map(|c| c.level as u64).sum();
        sum as f64 / self.assignments.len() as f64
    }

    /// Episode-boundary update. Success promotes one level (capped; at the
    /// cap the variant is re-randomized instead). Covering less than half of
    /// the commanded distance demotes one level (floored at 0). Anything in
    /// between leaves the assignment unchanged.
    pub fn update<R: Rng>(
        &mut self,
        robot: usize,
        success: bool,
        progress_fraction: f64,
        rng: &mut R,
    ) -> CellIndex {
        let mut cell = self.assignments[robot];
        if success {
            if cell.level < self.max_level {
                cell.level += 1;
            } else if self.variants > 1 {
                cell.variant = rng.gen_range(0..self.variants);
            }
        } else if progress_fraction < 0.5 && cell.level > 0 {
            cell.level -= 1;
        }
        self.assignments[robot] = cell;
        cell
    }
}
