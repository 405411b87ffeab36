//! Quasi-static, translation-only execution of a finger push.
//!
//! The finger is an axis-aligned square swept along the push segment in
//! small substeps. Objects taller than the finger height that it touches are
//! shoved out of it along the minimum translation vector; object-object
//! contacts are then relaxed pairwise. Objects whose centre leaves the
//! workspace are dropped immediately.

use crate::geometry::{obb_overlap_mtv, Obb2, Vec2};
use crate::scene::Scene;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PushSegment {
    pub p1: Vec2,
    pub p2: Vec2,
    /// Finger height above the table.
    pub h: f64,
}

impl PushSegment {
    pub fn length(&self) -> f64 {
        (self.p2 - self.p1).norm()
    }

    pub fn is_valid(&self) -> bool {
        self.p1.is_finite() && self.p2.is_finite() && self.length() > 0.0 && self.h > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub finger_half_extent: f64,
    pub substep: f64,
    pub relax_iters: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            finger_half_extent: 0.01,
            substep: 0.002,
            relax_iters: 10,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.finger_half_extent > 0.0 && self.substep > 0.0) || self.relax_iters == 0 {
            return Err(crate::Error::Config(format!("invalid sim config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PushOutcome {
    pub next: Scene,
    pub moved_ids: BTreeSet<u32>,
    pub fell_off_ids: BTreeSet<u32>,
    pub target_fell: bool,
    /// Largest object-object penetration left when relaxation ran out of
    /// passes; zero when every contact was resolved.
    pub residual_penetration: f64,
}

pub fn execute_push(sc: &Scene, seg: &PushSegment, cfg: &SimConfig) -> PushOutcome {
    let mut objects = sc.objects.clone();
    objects.sort_by_key(|o| o.id);
    let mut moved_ids = BTreeSet::new();
    let mut fell_off_ids = BTreeSet::new();
    let mut target_fell = false;
    let mut residual = 0.0f64;

    let travel = seg.p2 - seg.p1;
    let n = (seg.length() / cfg.substep).ceil().max(1.0) as usize;
    let fh = cfg.finger_half_extent;

    let mut active = vec![false; objects.len()];
    for k in 0..=n {
        let finger = Obb2::axis_aligned(seg.p1 + travel * (k as f64 / n as f64), fh, fh);
        active.iter_mut().for_each(|a| *a = false);

        for (i, o) in objects.iter_mut().enumerate() {
            if o.height <= seg.h {
                continue;
            }
            if let Some(mtv) = obb_overlap_mtv(&o.footprint, &finger) {
                o.footprint = o.footprint.translated(mtv);
                active[i] = true;
                moved_ids.insert(o.id);
            }
        }

        if active.iter().any(|&a| a) {
            residual = residual.max(relax(&mut objects, &mut active, &mut moved_ids, cfg.relax_iters));
        }

        let mut i = 0;
        while i < objects.len() {
            if sc.in_workspace(objects[i].footprint.center) {
                i += 1;
            } else {
                let o = objects.remove(i);
                active.remove(i);
                fell_off_ids.insert(o.id);
                target_fell |= o.is_target();
            }
        }
    }

    if residual > 0.0 {
        log::debug!("push relaxation left {residual:.3e} m of penetration");
    }

    let next = Scene {
        objects,
        ..sc.clone()
    };
    PushOutcome {
        next,
        moved_ids,
        fell_off_ids,
        target_fell,
        residual_penetration: residual,
    }
}

/// Pairwise contact relaxation in ascending-id order. In each overlapping
/// pair the object that has not been set in motion yet yields; if both or
/// neither are moving, the higher id yields. Returns the largest penetration
/// still present when the pass budget runs out.
fn relax(
    objects: &mut [crate::scene::ObjectSpec],
    active: &mut [bool],
    moved_ids: &mut BTreeSet<u32>,
    passes: usize,
) -> f64 {
    for _ in 0..passes {
        let mut any = false;
        for i in 0..objects.len() {
            for j in i + 1..objects.len() {
                let (yield_idx, pusher_idx) = if active[i] && !active[j] {
                    (j, i)
                } else if active[j] && !active[i] {
                    (i, j)
                } else {
                    (j, i)
                };
                let Some(mtv) =
                    obb_overlap_mtv(&objects[yield_idx].footprint, &objects[pusher_idx].footprint)
                else {
                    continue;
                };
                let o = &mut objects[yield_idx];
                o.footprint = o.footprint.translated(mtv);
                active[yield_idx] = true;
                moved_ids.insert(o.id);
                any = true;
            }
        }
        if !any {
            return 0.0;
        }
    }
    max_penetration(objects)
}

fn max_penetration(objects: &[crate::scene::ObjectSpec]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..objects.len() {
        for j in i + 1..objects.len() {
            if let Some(m) = obb_overlap_mtv(&objects[i].footprint, &objects[j].footprint) {
                worst = worst.max(m.norm());
            }
        }
    }
    worst
}
