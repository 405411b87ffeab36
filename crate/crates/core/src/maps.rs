//! Empty-space maps.
//!
//! Obstacle mask -> contour -> obstacle distance transform (ODT), combined
//! pointwise with the distance to the workspace limits (LDM) and min-max
//! normalized into the empty-space map (ESM). All distances are in pixels.

use crate::grid::Grid;
use crate::percept::{VisualGrid, OBSTACLE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapKind {
    Odt,
    Ldm,
    EsmRaw,
    EsmNormalized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMap {
    pub values: Grid<f64>,
    pub kind: MapKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    pub rows: usize,
    pub cols: usize,
    /// Row-major sorted pixel coordinates.
    pub points: Vec<(usize, usize)>,
}

impl Contour {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Target-centred crop of the empty-space map, side = half the grid side.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMap {
    pub values: Grid<f64>,
    /// Parent-grid coordinates of the crop's (0, 0) pixel; may be negative.
    pub origin: (isize, isize),
}

impl LocalMap {
    pub fn side(&self) -> usize {
        self.values.rows()
    }
}

pub fn obstacle_mask(v: &VisualGrid) -> Grid<bool> {
    v.values.map(|&x| x == OBSTACLE)
}

pub fn contour_of_mask(mask: &Grid<bool>) -> Contour {
    let (rows, cols) = (mask.rows(), mask.cols());
    let mut points = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if !*mask.get(i, j) {
                continue;
            }
            let on_border = i == 0 || j == 0 || i + 1 == rows || j + 1 == cols;
            let (ii, jj) = (i as isize, j as isize);
            let free_neighbor = [(ii - 1, jj), (ii + 1, jj), (ii, jj - 1), (ii, jj + 1)]
                .into_iter()
                .any(|(a, b)| mask.at(a, b) == Some(&false));
            if on_border || free_neighbor {
                points.push((i, j));
            }
        }
    }
    Contour { rows, cols, points }
}

/// Contour of the obstacle pixels (value 1); the target is excluded.
pub fn extract_contour(v: &VisualGrid) -> Contour {
    contour_of_mask(&obstacle_mask(v))
}

/// Distance reported everywhere when there is no obstacle contour.
pub fn empty_contour_sentinel(side_px: usize) -> f64 {
    side_px as f64 * std::f64::consts::SQRT_2
}

const FAR: f64 = 1e20;

/// Exact 1D squared distance transform of a sampled function (lower envelope
/// of parabolas). `f` is read, `out` written; `v`/`z` are scratch.
fn dt_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0usize;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let fq = f[q] + (q * q) as f64;
        loop {
            let p = v[k];
            let s = (fq - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] {
                // k > 0 here since z[0] = -inf
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let d = q as f64 - p as f64;
        *o = d * d + f[p];
    }
}

/// Euclidean distance from every pixel to the nearest contour point,
/// computed with the separable exact squared-distance transform.
pub fn obstacle_distance_map(c: &Contour) -> DistanceMap {
    let (rows, cols) = (c.rows, c.cols);
    if c.is_empty() {
        return DistanceMap {
            values: Grid::filled(rows, cols, empty_contour_sentinel(rows.max(cols))),
            kind: MapKind::Odt,
        };
    }
    let mut sq = vec![FAR; rows * cols];
    for &(i, j) in &c.points {
        sq[i * cols + j] = 0.0;
    }
    let n = rows.max(cols);
    let (mut f, mut out) = (vec![0.0; n], vec![0.0; n]);
    let (mut v, mut z) = (vec![0usize; n], vec![0.0; n + 1]);
    // columns
    for j in 0..cols {
        for i in 0..rows {
            f[i] = sq[i * cols + j];
        }
        dt_1d(&f[..rows], &mut out[..rows], &mut v, &mut z);
        for i in 0..rows {
            sq[i * cols + j] = out[i];
        }
    }
    // rows
    for i in 0..rows {
        f[..cols].copy_from_slice(&sq[i * cols..(i + 1) * cols]);
        dt_1d(&f[..cols], &mut out[..cols], &mut v, &mut z);
        sq[i * cols..(i + 1) * cols].copy_from_slice(&out[..cols]);
    }
    DistanceMap {
        values: Grid::from_vec(rows, cols, sq.into_iter().map(f64::sqrt).collect()),
        kind: MapKind::Odt,
    }
}

pub fn limits_distance_map(side_px: usize) -> DistanceMap {
    assert!(side_px >= 2, "limits map needs side >= 2");
    let last = side_px - 1;
    DistanceMap {
        values: Grid::from_fn(side_px, side_px, |i, j| {
            i.min(j).min(last - i).min(last - j) as f64
        }),
        kind: MapKind::Ldm,
    }
}

/// Pointwise `min(ODT, LDM)` before normalization.
pub fn empty_space_map_raw(v: &VisualGrid) -> DistanceMap {
    let odt = obstacle_distance_map(&extract_contour(v));
    let ldm = limits_distance_map(v.side_px());
    combine(&odt, &ldm)
}

pub fn combine(odt: &DistanceMap, ldm: &DistanceMap) -> DistanceMap {
    let values = Grid::from_vec(
        odt.values.rows(),
        odt.values.cols(),
        odt.values
            .as_slice()
            .iter()
            .zip(ldm.values.as_slice())
            .map(|(&a, &b)| a.min(b))
            .collect(),
    );
    DistanceMap {
        values,
        kind: MapKind::EsmRaw,
    }
}

pub fn normalize(raw: &DistanceMap) -> DistanceMap {
    DistanceMap {
        values: raw.values.normalized(),
        kind: MapKind::EsmNormalized,
    }
}

pub fn empty_space_map(v: &VisualGrid) -> DistanceMap {
    normalize(&empty_space_map_raw(v))
}

/// Crops a half-side window centred on the target centroid (pixel
/// coordinates), zero-fills whatever falls outside the parent grid, and
/// re-normalizes within the crop.
pub fn local_empty_space_map(esm: &DistanceMap, target_centroid_px: (f64, f64)) -> LocalMap {
    let side = esm.values.rows() / 2;
    let half = (side / 2) as isize;
    let oi = target_centroid_px.0.round() as isize - half;
    let oj = target_centroid_px.1.round() as isize - half;
    let crop = Grid::from_fn(side, side, |a, b| {
        esm.values
            .at(oi + a as isize, oj + b as isize)
            .copied()
            .unwrap_or(0.0)
    });
    LocalMap {
        values: crop.normalized(),
        origin: (oi, oj),
    }
}
