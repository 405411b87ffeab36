//! Ground-truth rasterization of a scene into the tri-valued visual state,
//! plus the actor and critic observation vectors.
//!
//! Pixel convention: row `i` grows toward -y, column `j` toward +x, and pixel
//! `(i, j)` covers the square whose centre is
//! `(-s/2 + (j + 0.5) * px, s/2 - (i + 0.5) * px)`. Continuous pixel
//! coordinates put pixel centres on integers.

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::grid::Grid;
use crate::scene::{ObjectSpec, Scene};
use std::path::Path;

pub const GRID_SIDE: usize = 128;
pub const POOL: usize = 8;
pub const ACTOR_OBS_DIM: usize = (GRID_SIDE / POOL) * (GRID_SIDE / POOL);
pub const MAX_OBSTACLES: usize = 13;
pub const OBJECT_FEATURES: usize = 6;
pub const FULL_STATE_DIM: usize = OBJECT_FEATURES * (MAX_OBSTACLES + 1);

pub const FREE: f64 = 0.0;
pub const TARGET: f64 = 0.5;
pub const OBSTACLE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct VisualGrid {
    pub values: Grid<f64>,
    /// Workspace side in meters.
    pub side: f64,
}

impl VisualGrid {
    pub fn side_px(&self) -> usize {
        self.values.rows()
    }

    pub fn pixel_size(&self) -> f64 {
        self.side / self.side_px() as f64
    }

    /// World point of continuous pixel coordinates `(i, j)`.
    pub fn pixel_to_world(&self, i: f64, j: f64) -> Vec2 {
        let px = self.pixel_size();
        Vec2::new(
            -self.side / 2.0 + (j + 0.5) * px,
            self.side / 2.0 - (i + 0.5) * px,
        )
    }

    /// Continuous pixel coordinates `(i, j)` of a world point.
    pub fn world_to_pixel(&self, p: Vec2) -> (f64, f64) {
        let px = self.pixel_size();
        (
            (self.side / 2.0 - p.y) / px - 0.5,
            (p.x + self.side / 2.0) / px - 0.5,
        )
    }

    /// Mean pixel coordinates of the target mask.
    pub fn target_centroid(&self) -> Result<(f64, f64)> {
        let (mut si, mut sj, mut n) = (0.0, 0.0, 0usize);
        for ((i, j), &v) in self.values.iter_indexed() {
            if v == TARGET {
                si += i as f64;
                sj += j as f64;
                n += 1;
            }
        }
        if n == 0 {
            return Err(Error::NoTarget);
        }
        Ok((si / n as f64, sj / n as f64))
    }

    /// Converts a pixel-space displacement into a world-space one.
    pub fn pixel_delta_to_world(&self, di: f64, dj: f64) -> Vec2 {
        let px = self.pixel_size();
        Vec2::new(dj * px, -di * px)
    }

    pub fn write_pgm(&self, path: impl AsRef<Path>) -> Result<()> {
        crate::grid::write_pgm(path, &self.values)
    }
}

fn paint(grid: &mut Grid<f64>, side: f64, o: &ObjectSpec, value: f64) {
    let n = grid.rows();
    let px = side / n as f64;
    let corners = o.footprint.corners();
    let (mut xmin, mut xmax, mut ymin, mut ymax) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for c in corners {
        xmin = xmin.min(c.x);
        xmax = xmax.max(c.x);
        ymin = ymin.min(c.y);
        ymax = ymax.max(c.y);
    }
    let to_idx = |v: f64| v.floor().clamp(0.0, (n - 1) as f64) as usize;
    let j0 = to_idx((xmin + side / 2.0) / px - 0.5);
    let j1 = to_idx((xmax + side / 2.0) / px + 0.5);
    let i0 = to_idx((side / 2.0 - ymax) / px - 0.5);
    let i1 = to_idx((side / 2.0 - ymin) / px + 0.5);
    for i in i0..=i1 {
        let y = side / 2.0 - (i as f64 + 0.5) * px;
        for j in j0..=j1 {
            let x = -side / 2.0 + (j as f64 + 0.5) * px;
            if o.footprint.contains(Vec2::new(x, y)) {
                *grid.get_mut(i, j) = value;
            }
        }
    }
}

/// Rasterizes the workspace at 128x128. Target pixels are 0.5, obstacle
/// pixels 1, table 0, decided by the pixel centre.
pub fn render_visual_state(sc: &Scene) -> VisualGrid {
    render_visual_state_sized(sc, GRID_SIDE)
}

pub fn render_visual_state_sized(sc: &Scene, side_px: usize) -> VisualGrid {
    let mut values = Grid::filled(side_px, side_px, FREE);
    for o in sc.objects.iter().filter(|o| o.is_target()) {
        paint(&mut values, sc.side, o, TARGET);
    }
    for o in sc.obstacles() {
        paint(&mut values, sc.side, o, OBSTACLE);
    }
    VisualGrid {
        values,
        side: sc.side,
    }
}

/// 8x8 average pooling of the visual grid, flattened row-major.
pub fn actor_observation(v: &VisualGrid) -> Vec<f64> {
    let n = v.side_px();
    let cells = n / POOL;
    let mut out = vec![0.0; cells * cells];
    for ci in 0..cells {
        for cj in 0..cells {
            let mut sum = 0.0;
            for i in ci * POOL..(ci + 1) * POOL {
                for j in cj * POOL..(cj + 1) * POOL {
                    sum += *v.values.get(i, j);
                }
            }
            out[ci * cells + cj] = sum / (POOL * POOL) as f64;
        }
    }
    out
}

fn features(o: &ObjectSpec) -> [f64; OBJECT_FEATURES] {
    let f = &o.footprint;
    [f.center.x, f.center.y, f.yaw, f.hx, f.hy, o.height]
}

/// Privileged state: target pose and box, then up to 13 obstacles sorted by
/// centre distance to the target (ties by id), zero padded to 84 values.
pub fn critic_state(sc: &Scene) -> Result<Vec<f64>> {
    let n_obs = sc.obstacle_count();
    if n_obs > MAX_OBSTACLES {
        return Err(Error::TooManyObstacles(n_obs));
    }
    let target = sc.try_target().ok_or(Error::NoTarget)?;
    let tc = target.footprint.center;
    let mut obs: Vec<&ObjectSpec> = sc.obstacles().collect();
    obs.sort_by(|a, b| {
        let da = (a.footprint.center - tc).norm_sq();
        let db = (b.footprint.center - tc).norm_sq();
        da.total_cmp(&db).then(a.id.cmp(&b.id))
    });
    let mut out = Vec::with_capacity(FULL_STATE_DIM);
    out.extend_from_slice(&features(target));
    for o in obs {
        out.extend_from_slice(&features(o));
    }
    out.resize(FULL_STATE_DIM, 0.0);
    Ok(out)
}
