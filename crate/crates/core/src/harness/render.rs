//! Greyscale dumps of the map-building stages and a push top-view.

use crate::error::Result;
use crate::grid::{write_pgm, Grid};
use crate::maps::{
    combine, empty_space_map, extract_contour, limits_distance_map, local_empty_space_map,
    normalize, obstacle_distance_map, obstacle_mask,
};
use crate::percept::{render_visual_state, VisualGrid};
use crate::policy::{decide_on_map, les_plan_on, PolicyLimits};
use crate::scene::Scene;
use std::path::{Path, PathBuf};

/// File names of the map stages, in pipeline order.
pub const PANEL_FILES: [&str; 7] = [
    "v.pgm",
    "obstacle_mask.pgm",
    "contour.pgm",
    "odt.pgm",
    "ldm.pgm",
    "esm.pgm",
    "lesm.pgm",
];
pub const TOPVIEW_FILE: &str = "topview.pgm";

/// Marks a straight pixel line from `a` to `b` with `value`.
fn draw_line(g: &mut Grid<f64>, a: (f64, f64), b: (f64, f64), value: f64) {
    let steps = (b.0 - a.0).abs().max((b.1 - a.1).abs()).ceil().max(1.0) as usize;
    for k in 0..=steps {
        let s = k as f64 / steps as f64;
        let i = (a.0 + s * (b.0 - a.0)).round() as isize;
        let j = (a.1 + s * (b.1 - a.1)).round() as isize;
        if i >= 0 && j >= 0 && (i as usize) < g.rows() && (j as usize) < g.cols() {
            *g.get_mut(i as usize, j as usize) = value;
        }
    }
}

/// The visual state dimmed to at most 0.6, with the ES push drawn at full
/// brightness and the LES push at 0.85, each from the target centroid to
/// the chosen free-space pixel. Heuristics that cannot act are left out.
pub fn topview(v: &VisualGrid, lim: &PolicyLimits) -> Grid<f64> {
    let mut g = v.values.map(|x| 0.6 * x);
    let Ok(centroid) = v.target_centroid() else {
        return g;
    };
    let esm = empty_space_map(v);
    if let Ok(les) = les_plan_on(&esm, centroid, v, lim) {
        draw_line(&mut g, centroid, (les.goal.0 as f64, les.goal.1 as f64), 0.85);
    }
    if let Ok(es) = decide_on_map(&esm.values, (0, 0), centroid, v, lim) {
        draw_line(&mut g, centroid, (es.goal.0 as f64, es.goal.1 as f64), 1.0);
    }
    g
}

/// Writes the seven map stages and the top-view into `dir`. Distance maps
/// are min-max normalized for display. Returns the written paths in
/// [`PANEL_FILES`] order followed by the top-view.
pub fn render_artifacts(sc: &Scene, lim: &PolicyLimits, dir: &Path) -> Result<Vec<PathBuf>> {
    let v = render_visual_state(sc);
    let mask = obstacle_mask(&v).map(|&b| if b { 1.0 } else { 0.0 });
    let contour = extract_contour(&v);
    let mut overlay = v.values.map(|x| 0.4 * x);
    for &(i, j) in &contour.points {
        *overlay.get_mut(i, j) = 1.0;
    }
    let odt = obstacle_distance_map(&contour);
    let ldm = limits_distance_map(v.side_px());
    let esm = normalize(&combine(&odt, &ldm));
    let lesm = match v.target_centroid() {
        Ok(c) => local_empty_space_map(&esm, c).values,
        Err(_) => Grid::filled(v.side_px() / 2, v.side_px() / 2, 0.0),
    };

    let images: [Grid<f64>; 7] = [
        v.values.clone(),
        mask,
        overlay,
        odt.values.normalized(),
        ldm.values.normalized(),
        esm.values,
        lesm,
    ];
    let mut written = Vec::with_capacity(8);
    for (name, img) in PANEL_FILES.iter().zip(&images) {
        let path = dir.join(name);
        write_pgm(&path, img)?;
        written.push(path);
    }
    let path = dir.join(TOPVIEW_FILE);
    write_pgm(&path, &topview(&v, lim))?;
    written.push(path);
    Ok(written)
}
