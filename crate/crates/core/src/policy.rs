//! Push policies and the push-target primitive.

use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Vec2};
use crate::grid::Grid;
use crate::maps::{empty_space_map, local_empty_space_map, DistanceMap};
use crate::percept::{VisualGrid, FREE, TARGET};
use crate::pushsim::PushSegment;
use crate::scene::Scene;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Normalized-map values strictly above this are push candidates.
pub const CANDIDATE_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PushCommand {
    /// Push direction in `[-pi, pi)`.
    pub theta: f64,
    /// Push length from the start point, meters.
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PolicyLimits {
    pub d_max: f64,
    pub d_min: f64,
    /// Side of the free-pixel patch required at the push start.
    pub patch_px: usize,
}

impl Default for PolicyLimits {
    fn default() -> Self {
        Self {
            d_max: 0.10,
            d_min: 0.02,
            patch_px: 6,
        }
    }
}

impl PolicyLimits {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_min > 0.0 && self.d_min < self.d_max) || self.patch_px == 0 {
            return Err(Error::Config(format!("invalid policy limits {self:?}")));
        }
        Ok(())
    }

    pub fn contains(&self, cmd: &PushCommand) -> bool {
        (-PI..PI).contains(&cmd.theta) && cmd.d > 0.0 && cmd.d <= self.d_max
    }
}

/// A heuristic decision together with the pixels it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicDecision {
    pub cmd: PushCommand,
    /// Target centroid, parent-grid pixel coordinates.
    pub centroid: (f64, f64),
    /// Chosen free-space pixel, parent-grid coordinates.
    pub goal: (isize, isize),
}

/// Picks, among map pixels above the threshold, the one closest to the
/// centroid (row-major first on ties) and turns it into a command.
/// `origin` maps map pixel `(0, 0)` into the parent grid.
pub fn decide_on_map(
    map: &Grid<f64>,
    origin: (isize, isize),
    centroid: (f64, f64),
    v: &VisualGrid,
    lim: &PolicyLimits,
) -> Result<HeuristicDecision> {
    let mut best: Option<((isize, isize), f64)> = None;
    for ((a, b), &val) in map.iter_indexed() {
        if val <= CANDIDATE_THRESHOLD {
            continue;
        }
        let p = (origin.0 + a as isize, origin.1 + b as isize);
        let di = p.0 as f64 - centroid.0;
        let dj = p.1 as f64 - centroid.1;
        let dist = di * di + dj * dj;
        if best.is_none_or(|(_, d)| dist < d) {
            best = Some((p, dist));
        }
    }
    let (goal, _) = best.ok_or(Error::DegenerateMap)?;
    let delta = v.pixel_delta_to_world(goal.0 as f64 - centroid.0, goal.1 as f64 - centroid.1);
    let theta = wrap_angle(delta.y.atan2(delta.x));
    let d = delta.norm().min(lim.d_max).max(lim.d_min);
    Ok(HeuristicDecision {
        cmd: PushCommand { theta, d },
        centroid,
        goal,
    })
}

pub fn es_plan(v: &VisualGrid, lim: &PolicyLimits) -> Result<HeuristicDecision> {
    let centroid = v.target_centroid()?;
    let esm = empty_space_map(v);
    decide_on_map(&esm.values, (0, 0), centroid, v, lim)
}

pub fn les_plan(v: &VisualGrid, lim: &PolicyLimits) -> Result<HeuristicDecision> {
    let centroid = v.target_centroid()?;
    les_plan_on(&empty_space_map(v), centroid, v, lim)
}

/// The local rule on a precomputed normalized ESM.
pub fn les_plan_on(
    esm: &DistanceMap,
    centroid: (f64, f64),
    v: &VisualGrid,
    lim: &PolicyLimits,
) -> Result<HeuristicDecision> {
    let local = local_empty_space_map(esm, centroid);
    match decide_on_map(&local.values, local.origin, centroid, v, lim) {
        Err(Error::DegenerateMap) => decide_on_map(&esm.values, (0, 0), centroid, v, lim),
        other => other,
    }
}

/// Global empty-space heuristic.
pub fn es_decide(v: &VisualGrid, lim: &PolicyLimits) -> Result<PushCommand> {
    es_plan(v, lim).map(|p| p.cmd)
}

/// Local empty-space heuristic; falls back to the global rule when the local
/// crop is flat.
pub fn les_decide(v: &VisualGrid, lim: &PolicyLimits) -> Result<PushCommand> {
    les_plan(v, lim).map(|p| p.cmd)
}

pub fn random_decide(rng: &mut impl Rng, lim: &PolicyLimits) -> PushCommand {
    PushCommand {
        theta: rng.gen_range(-PI..PI),
        d: rng.gen_range(lim.d_min..=lim.d_max),
    }
}

/// Pixel rows/cols of the `patch`-wide block nearest to continuous
/// coordinate `c`.
fn patch_span(c: f64, patch: usize) -> std::ops::Range<isize> {
    let start = (c - patch as f64 / 2.0).floor() as isize + 1;
    start..start + patch as isize
}

fn patch_is_free(v: &VisualGrid, ci: f64, cj: f64, patch: usize) -> Option<bool> {
    let n = v.side_px() as isize;
    let rows = patch_span(ci, patch);
    let cols = patch_span(cj, patch);
    if rows.start < 0 || cols.start < 0 || rows.end > n || cols.end > n {
        return None;
    }
    Some(rows.into_iter().all(|i| {
        cols.clone()
            .all(|j| *v.values.get(i as usize, j as usize) == FREE)
    }))
}

/// Finds the push start behind the target: march from the centroid against
/// `theta`, leave the target mask, and stop at the first sample whose
/// surrounding patch is all table and inside the grid. The finger travels at
/// half the target height.
pub fn resolve_push_segment(
    v: &VisualGrid,
    sc: &Scene,
    cmd: &PushCommand,
    lim: &PolicyLimits,
) -> Result<PushSegment> {
    let target = sc.try_target().ok_or(Error::NoTarget)?;
    let (oi, oj) = v.target_centroid()?;
    let back = Vec2::from_angle(cmd.theta + PI);
    // world +y is pixel -i
    let (di, dj) = (-back.y, back.x);
    let n = v.side_px() as f64;
    let mut left_target = false;
    for k in 0.. {
        let (ci, cj) = (oi + di * k as f64, oj + dj * k as f64);
        let (ri, rj) = (ci.round(), cj.round());
        if ri < 0.0 || rj < 0.0 || ri >= n || rj >= n {
            return Err(Error::NoFreePatch);
        }
        if !left_target {
            if *v.values.get(ri as usize, rj as usize) == TARGET {
                continue;
            }
            left_target = true;
        }
        if patch_is_free(v, ci, cj, lim.patch_px) == Some(true) {
            let p1 = v.pixel_to_world(ci, cj);
            let p2 = p1 + Vec2::from_angle(cmd.theta) * cmd.d;
            return Ok(PushSegment {
                p1,
                p2,
                h: target.height / 2.0,
            });
        }
    }
    unreachable!("ray march always leaves the grid")
}

/// A decision rule mapping the current state to a push command.
pub trait Policy {
    fn name(&self) -> &str;

    fn decide(&mut self, sc: &Scene, v: &VisualGrid) -> Result<PushCommand>;

    /// Called at the start of each episode with a per-episode seed.
    fn reset(&mut self, _episode_seed: u64) {}
}

#[derive(Debug, Clone)]
pub struct EsPolicy {
    pub limits: PolicyLimits,
}

impl Policy for EsPolicy {
    fn name(&self) -> &str {
        "ES"
    }

    fn decide(&mut self, _sc: &Scene, v: &VisualGrid) -> Result<PushCommand> {
        es_decide(v, &self.limits)
    }
}

#[derive(Debug, Clone)]
pub struct LesPolicy {
    pub limits: PolicyLimits,
}

impl Policy for LesPolicy {
    fn name(&self) -> &str {
        "LES"
    }

    fn decide(&mut self, _sc: &Scene, v: &VisualGrid) -> Result<PushCommand> {
        les_decide(v, &self.limits)
    }
}

#[derive(Debug, Clone)]
pub struct RandomPolicy {
    pub limits: PolicyLimits,
    rng: ChaCha8Rng,
}

impl RandomPolicy {
    pub fn new(limits: PolicyLimits, seed: u64) -> Self {
        Self {
            limits,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Policy for RandomPolicy {
    fn name(&self) -> &str {
        "Random"
    }

    fn decide(&mut self, _sc: &Scene, _v: &VisualGrid) -> Result<PushCommand> {
        Ok(random_decide(&mut self.rng, &self.limits))
    }

    fn reset(&mut self, episode_seed: u64) {
        self.rng = ChaCha8Rng::seed_from_u64(episode_seed);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Obb2;
    use crate::percept::{render_visual_state, OBSTACLE};
    use crate::scene::{generate_scene, ObjectSpec, Role, SceneGenConfig};

    fn obj(id: u32, role: Role, x: f64, y: f64, hx: f64, hy: f64) -> ObjectSpec {
        ObjectSpec {
            id,
            role,
            footprint: Obb2::axis_aligned(Vec2::new(x, y), hx, hy),
            height: 0.02,
        }
    }

    fn scene(objects: Vec<ObjectSpec>) -> Scene {
        Scene {
            side: 0.5,
            d_sing: 0.03,
            objects,
            seed: 0,
        }
    }

    fn lim() -> PolicyLimits {
        PolicyLimits::default()
    }

    fn angle_diff(a: f64, b: f64) -> f64 {
        wrap_angle(a - b).abs()
    }

    #[test]
    fn centred_target_on_empty_table() {
        let sc = scene(vec![obj(0, Role::Target, 0.0, 0.0, 0.02, 0.02)]);
        let v = render_visual_state(&sc);
        let plan = es_plan(&v, &lim()).unwrap();
        // the LDM peak is the central 2x2 block around (63.5, 63.5)
        let (gi, gj) = plan.goal;
        assert!((63..=64).contains(&gi) && (63..=64).contains(&gj));
        assert_eq!(plan.cmd.d, lim().d_min);
        assert!(lim().contains(&plan.cmd));
    }

    #[test]
    fn synthetic_map_with_known_goal() {
        let v = VisualGrid {
            values: Grid::filled(128, 128, 0.0),
            side: 0.5,
        };
        let px = v.pixel_size();
        let centroid = (80.0, 30.0);
        // 0.2 m at bearing pi/4: +x -> +j, +y -> -i
        let off = 0.2 / px / 2f64.sqrt();
        let goal = ((centroid.0 - off).round() as usize, (centroid.1 + off).round() as usize);
        let mut map = Grid::filled(128, 128, 0.0);
        *map.get_mut(goal.0, goal.1) = 1.0;
        let plan = decide_on_map(&map, (0, 0), centroid, &v, &lim()).unwrap();
        let exact = v.pixel_delta_to_world(goal.0 as f64 - centroid.0, goal.1 as f64 - centroid.1);
        assert!((plan.cmd.theta - exact.y.atan2(exact.x)).abs() < 1e-12);
        assert!(angle_diff(plan.cmd.theta, PI / 4.0) < 0.02);
        assert_eq!(plan.cmd.d, lim().d_max);
        let generous = PolicyLimits {
            d_max: 0.5,
            ..lim()
        };
        let plan = decide_on_map(&map, (0, 0), centroid, &v, &generous).unwrap();
        assert!((plan.cmd.d - exact.norm()).abs() < 1e-12);
        assert!((plan.cmd.d - 0.2).abs() < px);
    }

    #[test]
    fn es_matches_exhaustive_candidate_scan() {
        let sc = scene(vec![
            obj(0, Role::Target, -0.15, 0.0, 0.02, 0.02),
            obj(1, Role::Obstacle, 0.05, 0.0, 0.03, 0.15),
            obj(2, Role::Obstacle, 0.15, 0.1, 0.03, 0.03),
        ]);
        let v = render_visual_state(&sc);
        let esm = empty_space_map(&v);
        let o = v.target_centroid().unwrap();
        let mut best = (f64::INFINITY, (0usize, 0usize));
        for i in 0..128 {
            for j in 0..128 {
                if *esm.values.get(i, j) > 0.9 {
                    let d = (i as f64 - o.0).hypot(j as f64 - o.1);
                    if d < best.0 {
                        best = (d, (i, j));
                    }
                }
            }
        }
        let plan = es_plan(&v, &lim()).unwrap();
        assert_eq!(plan.goal, (best.1 .0 as isize, best.1 .1 as isize));
    }

    #[test]
    fn missing_target_is_an_error() {
        let v = render_visual_state(&scene(vec![obj(1, Role::Obstacle, 0.0, 0.0, 0.02, 0.02)]));
        assert!(matches!(es_decide(&v, &lim()), Err(Error::NoTarget)));
        assert!(matches!(les_decide(&v, &lim()), Err(Error::NoTarget)));
    }

    #[test]
    fn es_and_les_agree_on_symmetric_scene() {
        let sc = scene(vec![obj(0, Role::Target, 0.0, 0.0, 0.02, 0.02)]);
        let v = render_visual_state(&sc);
        let es = es_plan(&v, &lim()).unwrap();
        let les = les_plan(&v, &lim()).unwrap();
        let di = (es.goal.0 - les.goal.0).abs();
        let dj = (es.goal.1 - les.goal.1).abs();
        assert!(di <= 1 && dj <= 1, "{:?} vs {:?}", es.goal, les.goal);
    }

    #[test]
    fn les_falls_back_to_es_on_flat_crop() {
        let v = VisualGrid {
            values: Grid::filled(128, 128, 0.0),
            side: 0.5,
        };
        let flat = Grid::filled(64, 64, 0.0);
        assert!(matches!(
            decide_on_map(&flat, (32, 32), (64.0, 64.0), &v, &lim()),
            Err(Error::DegenerateMap)
        ));
        // ESM that is zero around the target and peaks only far away
        let mut values = Grid::filled(128, 128, 0.0);
        *values.get_mut(5, 120) = 1.0;
        let esm = DistanceMap {
            values,
            kind: crate::maps::MapKind::EsmNormalized,
        };
        let centroid = (64.0, 30.0);
        let les = les_plan_on(&esm, centroid, &v, &lim()).unwrap();
        let es = decide_on_map(&esm.values, (0, 0), centroid, &v, &lim()).unwrap();
        assert_eq!(les, es);
        assert_eq!(les.goal, (5, 120));
    }

    #[test]
    fn random_decisions() {
        let mut a = ChaCha8Rng::seed_from_u64(5);
        let mut b = ChaCha8Rng::seed_from_u64(5);
        let l = lim();
        let xs: Vec<_> = (0..100).map(|_| random_decide(&mut a, &l)).collect();
        let ys: Vec<_> = (0..100).map(|_| random_decide(&mut b, &l)).collect();
        assert_eq!(xs, ys);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 10_000;
        let mut bins = [0usize; 20];
        for _ in 0..n {
            let c = random_decide(&mut rng, &l);
            assert!((-PI..PI).contains(&c.theta));
            assert!(c.d >= l.d_min && c.d <= l.d_max);
            bins[(((c.theta + PI) / (2.0 * PI)) * 20.0) as usize] += 1;
        }
        let expected = n as f64 / 20.0;
        let chi2: f64 = bins
            .iter()
            .map(|&o| (o as f64 - expected).powi(2) / expected)
            .sum();
        // chi-square critical value, 19 dof, 1% level
        assert!(chi2 < 36.19, "chi2 = {chi2}");
    }

    #[test]
    fn push_segment_for_lone_target() {
        let sc = scene(vec![obj(0, Role::Target, 0.0, 0.0, 0.02, 0.02)]);
        let v = render_visual_state(&sc);
        let cmd = PushCommand { theta: 0.0, d: 0.05 };
        let seg = resolve_push_segment(&v, &sc, &cmd, &lim()).unwrap();
        let px = v.pixel_size();
        // start sits left of the target's left face by about half a patch
        let gap = -0.02 - seg.p1.x;
        assert!(gap > 0.0 && gap <= (3.0 + 1.0) * px, "gap {gap}");
        assert!(seg.p1.y.abs() < px);
        assert!(((seg.p2 - seg.p1) - Vec2::new(0.05, 0.0)).norm() < 1e-12);
        assert_eq!(seg.h, 0.01);
    }

    #[test]
    fn push_segment_arithmetic() {
        let sc = scene(vec![obj(0, Role::Target, 0.0, 0.0, 0.02, 0.02)]);
        let v = render_visual_state(&sc);
        let cmd = PushCommand { theta: PI / 2.0, d: 0.1 };
        let seg = resolve_push_segment(&v, &sc, &cmd, &lim()).unwrap();
        let delta = seg.p2 - seg.p1;
        assert!(delta.x.abs() < 1e-12 && (delta.y - 0.1).abs() < 1e-12);
    }

    #[test]
    fn start_skips_obstacle_behind_target() {
        let sc = scene(vec![
            obj(0, Role::Target, 0.0, 0.0, 0.02, 0.02),
            obj(1, Role::Obstacle, -0.045, 0.0, 0.02, 0.04),
        ]);
        let v = render_visual_state(&sc);
        let cmd = PushCommand { theta: 0.0, d: 0.05 };
        let seg = resolve_push_segment(&v, &sc, &cmd, &lim()).unwrap();
        assert!(seg.p1.x < -0.065, "p1 {:?}", seg.p1);
        // independent oracle: walk pixel columns leftwards from the obstacle
        // and find the first column whose 6-pixel block around the row is free
        let (ci, _) = v.target_centroid().unwrap();
        let (_, pj) = v.world_to_pixel(seg.p1);
        for i in (ci - 2.9).ceil() as usize..=(ci + 2.9).floor() as usize {
            for j in (pj - 2.9).ceil() as usize..=(pj + 2.9).floor() as usize {
                assert_eq!(*v.values.get(i, j), FREE);
            }
        }
        let first_free_col = (0..128usize)
            .rev()
            .filter(|&j| (j as f64) < pj + 1.0)
            .find(|&j| {
                (ci.round() as usize - 3..ci.round() as usize + 3)
                    .all(|i| (j - 3..j + 3).all(|jj| *v.values.get(i, jj) != OBSTACLE))
            })
            .unwrap();
        assert!((first_free_col as f64 - pj).abs() <= 2.0);
    }

    #[test]
    fn no_free_patch_when_walled_in() {
        let sc = scene(vec![
            obj(0, Role::Target, 0.0, 0.0, 0.02, 0.02),
            obj(1, Role::Obstacle, -0.14, 0.0, 0.11, 0.2),
        ]);
        let v = render_visual_state(&sc);
        let cmd = PushCommand { theta: 0.0, d: 0.05 };
        assert!(matches!(
            resolve_push_segment(&v, &sc, &cmd, &lim()),
            Err(Error::NoFreePatch)
        ));
    }

    #[test]
    fn decisions_are_deterministic() {
        let v = render_visual_state(&generate_scene(&SceneGenConfig::default(), 17).unwrap());
        assert_eq!(es_decide(&v, &lim()).unwrap(), es_decide(&v, &lim()).unwrap());
        assert_eq!(les_decide(&v, &lim()).unwrap(), les_decide(&v, &lim()).unwrap());
    }

    #[test]
    fn quarter_turn_rotates_es_bearing() {
        // obstacle-free scenes with an off-centre target
        for &(x, y) in &[(0.08, 0.03), (-0.05, 0.11), (0.12, -0.1)] {
            let sc = scene(vec![obj(0, Role::Target, x, y, 0.02, 0.02)]);
            let rot = scene(vec![obj(0, Role::Target, -y, x, 0.02, 0.02)]);
            let a = es_decide(&render_visual_state(&sc), &lim()).unwrap();
            let b = es_decide(&render_visual_state(&rot), &lim()).unwrap();
            let px_angle = (1.0f64 / 10.0).atan() * 2.0;
            assert!(
                angle_diff(b.theta, a.theta + PI / 2.0) <= px_angle,
                "{} vs {}",
                a.theta,
                b.theta
            );
        }
    }
}
