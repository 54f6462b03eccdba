//! Regular-grid heightfield with per-node validity flags.

use std::io::Write;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TerrainError {
    #[error("terrain configuration error: {0}")]
    Config(String),
    #[error(
        "target sampling exhausted after {attempts} attempts around node ({row}, {col})"
    )]
    SamplingExhausted { attempts: usize, row: usize, col: usize },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Node classification. `Hole` nodes provide no support and reject targets;
/// `HighObstacle` nodes carry the obstacle top height and reject targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Valid,
    Hole,
    HighObstacle,
}

/// Result of a height query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ground {
    Height(f64),
    Hole,
}

impl Ground {
    pub fn height(self) -> Option<f64> {
        match self {
            Ground::Height(h) => Some(h),
            Ground::Hole => None,
        }
    }
}

/// Heights and validity sampled on a regular grid of nodes. Node `(i, j)`
/// sits at `(origin.0 + j*resolution, origin.1 + i*resolution)`.
#[derive(Debug, Clone)]
pub struct HeightField {
    origin: (f64, f64),
    resolution: f64,
    rows: usize,
    cols: usize,
    heights: Vec<f64>,
    kinds: Vec<NodeKind>,
}

impl HeightField {
    pub fn new(
        origin: (f64, f64),
        resolution: f64,
        rows: usize,
        cols: usize,
    ) -> Result<Self, TerrainError> {
        if !(resolution > 0.0) {
            return Err(TerrainError::Config(format!(
                "resolution must be positive, got {resolution}"
            )));
        }
        if rows < 2 || cols < 2 {
            return Err(TerrainError::Config(format!(
                "degenerate grid {rows}x{cols}, need at least 2x2 nodes"
            )));
        }
        Ok(HeightField {
            origin,
            resolution,
            rows,
            cols,
            heights: vec![0.0; rows * cols],
            kinds: vec![NodeKind::Valid; rows * cols],
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    /// Extent of the field in meters, `(width_x, width_y)`.
    pub fn extent(&self) -> (f64, f64) {
        (
            (self.cols - 1) as f64 * self.resolution,
            (self.rows - 1) as f64 * self.resolution,
        )
    }

    /// Center of the field; used as the default spawn point.
    pub fn center(&self) -> (f64, f64) {
        let (ex, ey) = self.extent();
        (self.origin.0 + 0.5 * ex, self.origin.1 + 0.5 * ey)
    }

    pub fn node_height(&self, row: usize, col: usize) -> f64 {
        self.heights[row * self.cols + col]
    }

    pub fn node_kind(&self, row: usize, col: usize) -> NodeKind {
        self.kinds[row * self.cols + col]
    }

    pub fn set_node(&mut self, row: usize, col: usize, height: f64, kind: NodeKind) {
        self.heights[row * self.cols + col] = height;
        self.kinds[row * self.cols + col] = kind;
    }

    /// Index of the node at or below `(x, y)`, clamped to the interior so a
    /// bilinear cell always exists.
    fn cell_of(&self, x: f64, y: f64) -> (usize, usize, f64, f64) {
        let fx = (x - self.origin.0) / self.resolution;
        let fy = (y - self.origin.1) / self.resolution;
        let j = (fx.floor() as isize).clamp(0, self.cols as isize - 2) as usize;
        let i = (fy.floor() as isize).clamp(0, self.rows as isize - 2) as usize;
        let tx = (fx - j as f64).clamp(0.0, 1.0);
        let ty = (fy - i as f64).clamp(0.0, 1.0);
        (i, j, tx, ty)
    }

    /// Bilinear height at `(x, y)`. Returns `Ground::Hole` if any of the four
    /// surrounding nodes is a hole. Out-of-bounds queries clamp to the border
    /// cell; this is documented behavior, not an error.
    pub fn height_at(&self, x: f64, y: f64) -> Ground {
        let (i, j, tx, ty) = self.cell_of(x, y);
        let idx = |r: usize, c: usize| r * self.cols + c;
        let n00 = idx(i, j);
        let n01 = idx(i, j + 1);
        let n10 = idx(i + 1, j);
        let n11 = idx(i + 1, j + 1);
        for &n in &[n00, n01, n10, n11] {
            if self.kinds[n] == NodeKind::Hole {
                return Ground::Hole;
            }
        }
        let h00 = self.heights[n00];
        let h01 = self.heights[n01];
        let h10 = self.heights[n10];
        let h11 = self.heights[n11];
        let h0 = h00 + (h01 - h00) * tx;
        let h1 = h10 + (h11 - h10) * tx;
        Ground::Height(h0 + (h1 - h0) * ty)
    }

    /// Surface gradient `(dh/dx, dh/dy)` of the bilinear patch at `(x, y)`.
    /// Zero over holes.
    pub fn gradient_at(&self, x: f64, y: f64) -> (f64, f64) {
        let (i, j, tx, ty) = self.cell_of(x, y);
        let idx = |r: usize, c: usize| r * self.cols + c;
        for &n in &[idx(i, j), idx(i, j + 1), idx(i + 1, j), idx(i + 1, j + 1)] {
            if self.kinds[n] == NodeKind::Hole {
                return (0.0, 0.0);
            }
        }
        let h00 = self.heights[idx(i, j)];
        let h01 = self.heights[idx(i, j + 1)];
        let h10 = self.heights[idx(i + 1, j)];
        let h11 = self.heights[idx(i + 1, j + 1)];
        let dhdx = ((h01 - h00) * (1.0 - ty) + (h11 - h10) * ty) / self.resolution;
        let dhdy = ((h10 - h00) * (1.0 - tx) + (h11 - h01) * tx) / self.resolution;
        (dhdx, dhdy)
    }

    /// True when `(x, y)` lies within the grid extent.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (ex, ey) = self.extent();
        x >= self.origin.0
            && x <= self.origin.0 + ex
            && y >= self.origin.1
            && y <= self.origin.1 + ey
    }

    /// Lowest height over valid nodes; used to place the kill plane.
    pub fn min_valid_height(&self) -> f64 {
        let mut min = f64::INFINITY;
        for (h, k) in self.heights.iter().zip(self.kinds.iter()) {
            if *k != NodeKind::Hole && *h < min {
                min = *h;
            }
        }
        if min.is_finite() {
            min
        } else {
            0.0
        }
    }

    /// Nearest node index to `(x, y)`.
    pub fn nearest_node(&self, x: f64, y: f64) -> (usize, usize) {
        let j = (((x - self.origin.0) / self.resolution).round() as isize)
            .clamp(0, self.cols as isize - 1) as usize;
        let i = (((y - self.origin.1) / self.resolution).round() as isize)
            .clamp(0, self.rows as isize - 1) as usize;
        (i, j)
    }

    /// True when every node within `radius` of `(x, y)` is in bounds, valid,
    /// and not a high obstacle. This is the goal-validity oracle.
    pub fn region_clear(&self, x: f64, y: f64, radius: f64) -> bool {
        if !self.contains(x - radius, y - radius) || !self.contains(x + radius, y + radius) {
            return false;
        }
        let j0 = ((x - radius - self.origin.0) / self.resolution).floor() as usize;
        let j1 = ((x + radius - self.origin.0) / self.resolution).ceil() as usize;
        let i0 = ((y - radius - self.origin.1) / self.resolution).floor() as usize;
        let i1 = ((y + radius - self.origin.1) / self.resolution).ceil() as usize;
        for i in i0..=i1.min(self.rows - 1) {
            for j in j0..=j1.min(self.cols - 1) {
                if self.kinds[i * self.cols + j] != NodeKind::Valid {
                    return false;
                }
            }
        }
        true
    }

    /// Write the grid as CSV, row-major, holes encoded as the literal token
    /// `hole`. High-obstacle nodes export their top height.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<(), TerrainError> {
        for i in 0..self.rows {
            let mut line = String::new();
            for j in 0..self.cols {
                if j > 0 {
                    line.push(',');
                }
                match self.kinds[i * self.cols + j] {
                    NodeKind::Hole => line.push_str("hole"),
                    _ => line.push_str(&format!("{}", self.heights[i * self.cols + j])),
                }
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}
