//! Scene model, random clutter generation and the singulation predicates.

use crate::error::{Error, Result};
use crate::geometry::{obb_overlaps, obb_separation_distance, Obb2, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fs;
use std::path::Path;

pub const TARGET_ID: u32 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Target,
    Obstacle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectSpec {
    pub id: u32,
    pub role: Role,
    pub footprint: Obb2,
    /// Full height above the table, meters.
    pub height: f64,
}

impl ObjectSpec {
    pub fn is_target(&self) -> bool {
        self.role == Role::Target
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    /// Side of the square workspace centred on the world origin, meters.
    pub side: f64,
    pub d_sing: f64,
    pub objects: Vec<ObjectSpec>,
    pub seed: u64,
}

impl Scene {
    /// Builds a scene and checks that it holds exactly one target.
    pub fn new(side: f64, d_sing: f64, objects: Vec<ObjectSpec>, seed: u64) -> Result<Self> {
        let sc = Scene {
            side,
            d_sing,
            objects,
            seed,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        let n_targets = self.objects.iter().filter(|o| o.is_target()).count();
        if n_targets != 1 {
            return Err(Error::MalformedScene(format!(
                "expected exactly one target, found {n_targets}"
            )));
        }
        if !(self.side > 0.0 && self.side.is_finite()) {
            return Err(Error::MalformedScene(format!("bad workspace side {}", self.side)));
        }
        if !(self.d_sing >= 0.0 && self.d_sing.is_finite()) {
            return Err(Error::MalformedScene(format!("bad d_sing {}", self.d_sing)));
        }
        for o in &self.objects {
            if !o.footprint.is_valid() || !(o.height > 0.0) {
                return Err(Error::MalformedScene(format!("object {} is invalid", o.id)));
            }
        }
        let mut ids: Vec<u32> = self.objects.iter().map(|o| o.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::MalformedScene("duplicate object ids".into()));
        }
        Ok(())
    }

    /// The target object. Panics if the scene was built without one.
    pub fn target(&self) -> &ObjectSpec {
        self.try_target().expect("scene has no target")
    }

    pub fn try_target(&self) -> Option<&ObjectSpec> {
        self.objects.iter().find(|o| o.is_target())
    }

    pub fn obstacles(&self) -> impl Iterator<Item = &ObjectSpec> {
        self.objects.iter().filter(|o| !o.is_target())
    }

    pub fn obstacle_count(&self) -> usize {
        self.obstacles().count()
    }

    /// Closed membership in `[-side/2, side/2]^2`.
    pub fn in_workspace(&self, p: Vec2) -> bool {
        let h = self.side / 2.0;
        p.x.abs() <= h && p.y.abs() <= h
    }

    pub fn translated(&self, by: Vec2) -> Scene {
        let mut sc = self.clone();
        for o in &mut sc.objects {
            o.footprint = o.footprint.translated(by);
        }
        sc
    }
}

/// Minimum boundary gap between the target and any obstacle, or `None` when
/// no obstacles remain.
pub fn target_clearance(sc: &Scene) -> Option<f64> {
    let t = sc.try_target()?;
    sc.obstacles()
        .map(|o| obb_separation_distance(&t.footprint, &o.footprint))
        .reduce(f64::min)
}

pub fn is_singulated(sc: &Scene) -> bool {
    target_clearance(sc).is_none_or(|gap| gap > sc.d_sing)
}

pub fn target_off_workspace(sc: &Scene) -> bool {
    match sc.try_target() {
        Some(t) => !sc.in_workspace(t.footprint.center),
        None => true,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneGenConfig {
    pub workspace_side: f64,
    pub d_sing: f64,
    /// Inclusive.
    pub n_obstacles_range: [usize; 2],
    pub target_half_extent_range: [f64; 2],
    pub obstacle_half_extent_range: [f64; 2],
    pub height_range: [f64; 2],
    /// Max distance of the target from the workspace centre.
    pub target_jitter: f64,
    /// Obstacle centres are drawn uniformly from this disk around the target.
    pub placement_radius: f64,
    pub max_rejection_attempts: usize,
}

impl Default for SceneGenConfig {
    fn default() -> Self {
        Self {
            workspace_side: 0.5,
            d_sing: 0.03,
            n_obstacles_range: [8, 13],
            target_half_extent_range: [0.015, 0.03],
            obstacle_half_extent_range: [0.01, 0.035],
            height_range: [0.01, 0.04],
            target_jitter: 0.05,
            placement_radius: 0.15,
            max_rejection_attempts: 200,
        }
    }
}

impl SceneGenConfig {
    /// The reduced-clutter profile used for quick training runs.
    pub fn desk() -> Self {
        Self {
            n_obstacles_range: [2, 4],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, r: [f64; 2]| -> Result<()> {
            if r[0] > 0.0 && r[0] <= r[1] && r[1].is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be a non-empty positive interval, got {r:?}")))
            }
        };
        positive("target_half_extent_range", self.target_half_extent_range)?;
        positive("obstacle_half_extent_range", self.obstacle_half_extent_range)?;
        positive("height_range", self.height_range)?;
        let [lo, hi] = self.n_obstacles_range;
        if lo > hi {
            return Err(Error::Config(format!("n_obstacles_range {lo}..={hi} is empty")));
        }
        if !(self.workspace_side > 0.0) || !(self.d_sing >= 0.0) {
            return Err(Error::Config("workspace_side must be > 0 and d_sing >= 0".into()));
        }
        if !(self.placement_radius > 0.0) || !(self.target_jitter >= 0.0) {
            return Err(Error::Config("placement_radius must be > 0, target_jitter >= 0".into()));
        }
        if self.max_rejection_attempts == 0 {
            return Err(Error::Config("max_rejection_attempts must be >= 1".into()));
        }
        Ok(())
    }
}

/// splitmix64 finalizer; used to derive independent per-item seeds from a
/// base seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn uniform(rng: &mut ChaCha8Rng, r: [f64; 2]) -> f64 {
    if r[0] == r[1] {
        r[0]
    } else {
        rng.gen_range(r[0]..r[1])
    }
}

fn random_yaw(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-PI..PI)
}

/// Draws a random cluttered scene. The result never starts singulated.
///
/// Each obstacle gets up to `max_rejection_attempts` placement trials; a
/// scene in which some obstacle cannot be placed, or which comes out already
/// singulated, is redrawn, again up to `max_rejection_attempts` times.
pub fn generate_scene(cfg: &SceneGenConfig, seed: u64) -> Result<Scene> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let attempts = cfg.max_rejection_attempts;
    let mut last_reason = String::new();
    for _ in 0..attempts {
        match sample_scene(cfg, seed, &mut rng) {
            Ok(sc) if !is_singulated(&sc) => return Ok(sc),
            Ok(_) => last_reason = "sampled scene was already singulated".into(),
            Err(reason) => last_reason = reason,
        }
    }
    Err(Error::GenerationFailed {
        attempts,
        reason: last_reason,
    })
}

fn sample_scene(
    cfg: &SceneGenConfig,
    seed: u64,
    rng: &mut ChaCha8Rng,
) -> std::result::Result<Scene, String> {
    let r = cfg.target_jitter * rng.gen::<f64>().sqrt();
    let phi = rng.gen_range(-PI..PI);
    let target_center = Vec2::from_angle(phi) * r;
    let target = ObjectSpec {
        id: TARGET_ID,
        role: Role::Target,
        footprint: Obb2::new(
            target_center,
            uniform(rng, cfg.target_half_extent_range),
            uniform(rng, cfg.target_half_extent_range),
            random_yaw(rng),
        ),
        height: uniform(rng, cfg.height_range),
    };
    let n = rng.gen_range(cfg.n_obstacles_range[0]..=cfg.n_obstacles_range[1]);
    let mut objects = Vec::with_capacity(n + 1);
    objects.push(target);
    let half = cfg.workspace_side / 2.0;

    for k in 0..n {
        let hx = uniform(rng, cfg.obstacle_half_extent_range);
        let hy = uniform(rng, cfg.obstacle_half_extent_range);
        let height = uniform(rng, cfg.height_range);
        let mut placed = None;
        for _ in 0..cfg.max_rejection_attempts {
            let r = cfg.placement_radius * rng.gen::<f64>().sqrt();
            let phi = rng.gen_range(-PI..PI);
            let c = target_center + Vec2::from_angle(phi) * r;
            if c.x.abs() > half || c.y.abs() > half {
                continue;
            }
            let fp = Obb2::new(c, hx, hy, random_yaw(rng));
            if objects.iter().all(|o: &ObjectSpec| !obb_overlaps(&fp, &o.footprint)) {
                placed = Some(fp);
                break;
            }
        }
        let footprint = placed.ok_or_else(|| format!("could not place obstacle {} of {n}", k + 1))?;
        objects.push(ObjectSpec {
            id: k as u32 + 1,
            role: Role::Obstacle,
            footprint,
            height,
        });
    }
    Ok(Scene {
        side: cfg.workspace_side,
        d_sing: cfg.d_sing,
        objects,
        seed,
    })
}

/// Generates `count` scenes, scene `k` from `derive_seed(base_seed, k)`.
pub fn generate_batch(cfg: &SceneGenConfig, base_seed: u64, count: usize) -> Result<Vec<Scene>> {
    (0..count as u64)
        .map(|k| generate_scene(cfg, derive_seed(base_seed, k)))
        .collect()
}

// --- persistence ---------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectRecord {
    id: u32,
    role: Role,
    cx: f64,
    cy: f64,
    yaw: f64,
    hx: f64,
    hy: f64,
    height: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneRecord {
    side: f64,
    d_sing: f64,
    seed: u64,
    objects: Vec<ObjectRecord>,
}

impl From<&Scene> for SceneRecord {
    fn from(sc: &Scene) -> Self {
        SceneRecord {
            side: sc.side,
            d_sing: sc.d_sing,
            seed: sc.seed,
            objects: sc
                .objects
                .iter()
                .map(|o| ObjectRecord {
                    id: o.id,
                    role: o.role,
                    cx: o.footprint.center.x,
                    cy: o.footprint.center.y,
                    yaw: o.footprint.yaw,
                    hx: o.footprint.hx,
                    hy: o.footprint.hy,
                    height: o.height,
                })
                .collect(),
        }
    }
}

impl TryFrom<SceneRecord> for Scene {
    type Error = Error;

    fn try_from(r: SceneRecord) -> Result<Self> {
        let objects = r
            .objects
            .into_iter()
            .map(|o| ObjectSpec {
                id: o.id,
                role: o.role,
                // stored yaw is already wrapped; keep it bit-exact
                footprint: Obb2 {
                    center: Vec2::new(o.cx, o.cy),
                    hx: o.hx,
                    hy: o.hy,
                    yaw: o.yaw,
                },
                height: o.height,
            })
            .collect();
        Scene::new(r.side, r.d_sing, objects, r.seed)
    }
}

impl Serialize for Scene {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SceneRecord::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Scene {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = SceneRecord::deserialize(d)?;
        Scene::try_from(rec).map_err(serde::de::Error::custom)
    }
}

pub fn scene_to_json(sc: &Scene) -> String {
    serde_json::to_string_pretty(sc).expect("scene serialization is infallible")
}

pub fn scene_from_json(text: &str) -> Result<Scene> {
    serde_json::from_str(text).map_err(|e| Error::MalformedScene(e.to_string()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn save_scene(path: impl AsRef<Path>, sc: &Scene) -> Result<()> {
    write(path.as_ref(), &scene_to_json(sc))
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    let path = path.as_ref();
    serde_json::from_str(&read(path)?).map_err(|e| Error::malformed(path, e.to_string()))
}

pub fn save_scene_batch(path: impl AsRef<Path>, scenes: &[Scene]) -> Result<()> {
    let text = serde_json::to_string_pretty(scenes)?;
    write(path.as_ref(), &text)
}

pub fn load_scene_batch(path: impl AsRef<Path>) -> Result<Vec<Scene>> {
    let path = path.as_ref();
    serde_json::from_str(&read(path)?).map_err(|e| Error::malformed(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(id: u32, role: Role, x: f64, y: f64, half: f64) -> ObjectSpec {
        ObjectSpec {
            id,
            role,
            footprint: Obb2::axis_aligned(Vec2::new(x, y), half, half),
            height: 0.02,
        }
    }

    fn two_body(ox: f64) -> Scene {
        Scene::new(
            0.5,
            0.03,
            vec![
                square(0, Role::Target, 0.0, 0.0, 0.02),
                square(1, Role::Obstacle, ox, 0.0, 0.02),
            ],
            0,
        )
        .unwrap()
    }

    #[test]
    fn singulation_examples() {
        assert!(is_singulated(&two_body(0.1)));
        assert!(!is_singulated(&two_body(0.06)));
        let lone = Scene::new(0.5, 0.03, vec![square(0, Role::Target, 0.0, 0.0, 0.02)], 0).unwrap();
        assert!(is_singulated(&lone));
    }

    #[test]
    fn workspace_boundary_is_closed() {
        let mut sc = two_body(0.1);
        assert!(!target_off_workspace(&sc));
        sc.objects[0].footprint.center = Vec2::new(0.26, 0.0);
        assert!(target_off_workspace(&sc));
        sc.objects[0].footprint.center = Vec2::new(0.25, 0.0);
        assert!(!target_off_workspace(&sc));
    }

    #[test]
    fn generated_scene_respects_config() {
        let cfg = SceneGenConfig::default();
        let sc = generate_scene(&cfg, 42).unwrap();
        let n = sc.obstacle_count();
        assert!((8..=13).contains(&n), "{n} obstacles");
        assert!(!is_singulated(&sc));
        assert_eq!(sc.objects.iter().filter(|o| o.is_target()).count(), 1);
        assert!(sc.target().footprint.center.norm() <= cfg.target_jitter + 1e-12);
        for (i, a) in sc.objects.iter().enumerate() {
            assert!(sc.in_workspace(a.footprint.center));
            for b in &sc.objects[i + 1..] {
                assert!(!obb_overlaps(&a.footprint, &b.footprint));
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = SceneGenConfig::default();
        assert_eq!(generate_scene(&cfg, 42).unwrap(), generate_scene(&cfg, 42).unwrap());
        assert_ne!(generate_scene(&cfg, 42).unwrap(), generate_scene(&cfg, 43).unwrap());
    }

    #[test]
    fn infeasible_packing_fails() {
        let cfg = SceneGenConfig {
            placement_radius: 0.01,
            max_rejection_attempts: 20,
            ..SceneGenConfig::default()
        };
        assert!(matches!(generate_scene(&cfg, 1), Err(Error::GenerationFailed { .. })));
    }

    #[test]
    fn removing_obstacles_never_unsingulates() {
        let cfg = SceneGenConfig::default();
        for seed in 0..30 {
            let mut sc = generate_scene(&cfg, seed).unwrap();
            let mut was = is_singulated(&sc);
            while sc.objects.len() > 1 {
                sc.objects.pop();
                let now = is_singulated(&sc);
                assert!(!was || now);
                was = now;
            }
            assert!(was);
        }
    }

    #[test]
    fn json_round_trip() {
        let sc = generate_scene(&SceneGenConfig::default(), 9).unwrap();
        let back = scene_from_json(&scene_to_json(&sc)).unwrap();
        assert_eq!(sc, back);
    }

    #[test]
    fn missing_target_is_malformed() {
        let text = r#"{"side":0.5,"d_sing":0.03,"seed":1,"objects":[
            {"id":1,"role":"obstacle","cx":0.0,"cy":0.0,"yaw":0.0,"hx":0.02,"hy":0.02,"height":0.02}]}"#;
        assert!(matches!(scene_from_json(text), Err(Error::MalformedScene(_))));
    }

    #[test]
    fn batch_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("batch.json");
        let scenes = generate_batch(&SceneGenConfig::default(), 5, 200).unwrap();
        save_scene_batch(&path, &scenes).unwrap();
        let back = load_scene_batch(&path).unwrap();
        assert_eq!(back.len(), 200);
        assert_eq!(scenes, back);
        assert!(matches!(
            load_scene(dir.path().join("missing.json")),
            Err(Error::Io { .. })
        ));
    }
}
