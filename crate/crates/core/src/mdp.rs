//! Singulation MDP: reward schemes, environment stepping, episodes and
//! batch evaluation.

use crate::error::{Error, Result};
use crate::maps::empty_space_map;
use crate::percept::{render_visual_state, VisualGrid};
use crate::policy::{
    decide_on_map, les_plan_on, resolve_push_segment, Policy, PolicyLimits, PushCommand,
};
use crate::pushsim::{execute_push, PushOutcome, PushSegment, SimConfig};
use crate::scene::{derive_seed, is_singulated, Scene};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

pub const ERROR_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardScheme {
    Sparse,
    EsShaped,
    LesShaped,
}

impl RewardScheme {
    pub fn label(self) -> &'static str {
        match self {
            RewardScheme::Sparse => "RL",
            RewardScheme::EsShaped => "RL-ES",
            RewardScheme::LesShaped => "RL-LES",
        }
    }
}

impl std::str::FromStr for RewardScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sparse" | "rl" => Ok(RewardScheme::Sparse),
            "es_shaped" | "es" | "rl-es" => Ok(RewardScheme::EsShaped),
            "les_shaped" | "les" | "rl-les" => Ok(RewardScheme::LesShaped),
            other => Err(Error::Config(format!("unknown reward scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Singulated,
    FellOff,
    Timeout,
    Running,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Singulated => "singulated",
            Outcome::FellOff => "fell_off",
            Outcome::Timeout => "timeout",
            Outcome::Running => "running",
        }
    }

    pub fn is_done(self) -> bool {
        self != Outcome::Running
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MdpConfig {
    pub t_max: usize,
    pub reward_scheme: RewardScheme,
    pub policy_limits: PolicyLimits,
    pub sim: SimConfig,
}

impl Default for MdpConfig {
    fn default() -> Self {
        Self {
            t_max: 10,
            reward_scheme: RewardScheme::Sparse,
            policy_limits: PolicyLimits::default(),
            sim: SimConfig::default(),
        }
    }
}

impl MdpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t_max == 0 {
            return Err(Error::Config("t_max must be >= 1".into()));
        }
        self.policy_limits.validate()?;
        self.sim.validate()
    }
}

/// Direction disagreement `(1 - cos|theta_h - theta_p|) / 2`, in `[0, 1]`.
pub fn shaping_error(theta_p: f64, theta_h: f64) -> f64 {
    (0.5 * (1.0 - (theta_h - theta_p).abs().cos())).clamp(0.0, 1.0)
}

/// Per-push reward on non-terminal steps.
pub fn step_reward(scheme: RewardScheme, e_es: f64, e_les: f64, t_max: usize) -> f64 {
    let t_max = t_max as f64;
    match scheme {
        RewardScheme::Sparse => -1.0 / t_max,
        RewardScheme::EsShaped => (-1.0 - e_es) / (2.0 * t_max),
        RewardScheme::LesShaped => (-1.0 - e_les) / (2.0 * t_max),
    }
}

/// Scores a transition. Precedence: fell off, singulated, timeout, running.
pub fn score(
    target_fell: bool,
    singulated: bool,
    t: usize,
    scheme: RewardScheme,
    e_es: f64,
    e_les: f64,
    t_max: usize,
) -> (f64, bool, Outcome) {
    if target_fell {
        (-1.0, true, Outcome::FellOff)
    } else if singulated {
        (1.0, true, Outcome::Singulated)
    } else if t >= t_max {
        (step_reward(scheme, e_es, e_les, t_max), true, Outcome::Timeout)
    } else {
        (step_reward(scheme, e_es, e_les, t_max), false, Outcome::Running)
    }
}

/// What the ES and LES heuristics would do in a given visual state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicAngles {
    pub theta_es: f64,
    pub theta_les: f64,
}

pub fn heuristic_angles(v: &VisualGrid, lim: &PolicyLimits) -> Result<HeuristicAngles> {
    let centroid = v.target_centroid()?;
    let esm = empty_space_map(v);
    let es = decide_on_map(&esm.values, (0, 0), centroid, v, lim)?;
    let les = les_plan_on(&esm, centroid, v, lim)?;
    Ok(HeuristicAngles {
        theta_es: es.cmd.theta,
        theta_les: les.cmd.theta,
    })
}

fn shaping_errors(v: &VisualGrid, cmd: &PushCommand, lim: &PolicyLimits) -> (f64, f64) {
    match heuristic_angles(v, lim) {
        Ok(h) => (
            shaping_error(cmd.theta, h.theta_es),
            shaping_error(cmd.theta, h.theta_les),
        ),
        Err(e) => {
            log::warn!("heuristics undefined in this state ({e}); using neutral shaping error");
            (0.5, 0.5)
        }
    }
}

/// Reward for the transition `prev --cmd--> out` at 1-based step `t`.
pub fn compute_reward(
    prev: &Scene,
    cmd: &PushCommand,
    out: &PushOutcome,
    cfg: &MdpConfig,
    t: usize,
) -> (f64, bool, Outcome) {
    let (e_es, e_les) = shaping_errors(&render_visual_state(prev), cmd, &cfg.policy_limits);
    score(
        out.target_fell,
        is_singulated(&out.next),
        t,
        cfg.reward_scheme,
        e_es,
        e_les,
        cfg.t_max,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub next_scene: Scene,
    pub reward: f64,
    pub done: bool,
    pub outcome: Outcome,
    pub e_es: f64,
    pub e_les: f64,
    /// `None` when no free start patch existed and the push was skipped.
    pub segment: Option<PushSegment>,
}

/// Resolves, simulates and scores one push. A command with no free start
/// patch becomes a no-op that still pays the step penalty.
pub fn step(sc: &Scene, cmd: &PushCommand, cfg: &MdpConfig, t: usize) -> StepResult {
    let v = render_visual_state(sc);
    step_with_visual(sc, &v, cmd, cfg, t)
}

fn step_with_visual(
    sc: &Scene,
    v: &VisualGrid,
    cmd: &PushCommand,
    cfg: &MdpConfig,
    t: usize,
) -> StepResult {
    let (e_es, e_les) = shaping_errors(v, cmd, &cfg.policy_limits);
    let (next, target_fell, segment) = match resolve_push_segment(v, sc, cmd, &cfg.policy_limits) {
        Ok(seg) => {
            let out = execute_push(sc, &seg, &cfg.sim);
            (out.next, out.target_fell, Some(seg))
        }
        Err(_) => (sc.clone(), false, None),
    };
    let singulated = !target_fell && is_singulated(&next);
    let (reward, done, outcome) = score(
        target_fell,
        singulated,
        t,
        cfg.reward_scheme,
        e_es,
        e_les,
        cfg.t_max,
    );
    StepResult {
        next_scene: next,
        reward,
        done,
        outcome,
        e_es,
        e_les,
        segment,
    }
}

/// Stateful wrapper around [`step`] that tracks the step counter.
#[derive(Debug, Clone)]
pub struct Env {
    pub cfg: MdpConfig,
    scene: Scene,
    visual: VisualGrid,
    t: usize,
    outcome: Outcome,
}

impl Env {
    pub fn new(scene: Scene, cfg: MdpConfig) -> Self {
        let visual = render_visual_state(&scene);
        Self {
            cfg,
            scene,
            visual,
            t: 0,
            outcome: Outcome::Running,
        }
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn visual(&self) -> &VisualGrid {
        &self.visual
    }

    /// Number of pushes taken so far.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn outcome(&self) -> Outcome {
        self.outcome
    }

    pub fn is_done(&self) -> bool {
        self.outcome.is_done()
    }

    pub fn step(&mut self, cmd: &PushCommand) -> StepResult {
        assert!(!self.is_done(), "step on a finished episode");
        self.t += 1;
        let r = step_with_visual(&self.scene, &self.visual, cmd, &self.cfg, self.t);
        self.scene = r.next_scene.clone();
        self.visual = render_visual_state(&self.scene);
        self.outcome = r.outcome;
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based step index; also identifies the scene snapshot the command
    /// was issued in (snapshot `t - 1`).
    pub t: usize,
    pub command: PushCommand,
    pub reward: f64,
    pub e_es: f64,
    pub e_les: f64,
    pub pushed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub policy: String,
    pub scene_seed: u64,
    pub steps: Vec<StepRecord>,
    pub outcome: Outcome,
    pub n_actions: usize,
}

impl EpisodeRecord {
    pub fn mean_e_es(&self) -> f64 {
        mean(self.steps.iter().map(|s| s.e_es))
    }

    pub fn mean_e_les(&self) -> f64 {
        mean(self.steps.iter().map(|s| s.e_les))
    }

    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

/// Runs `policy` from `sc0` until a terminal state.
pub fn run_episode<P: Policy + ?Sized>(
    policy: &mut P,
    sc0: &Scene,
    cfg: &MdpConfig,
    episode_seed: u64,
) -> EpisodeRecord {
    policy.reset(episode_seed);
    let mut env = Env::new(sc0.clone(), cfg.clone());
    let mut steps = Vec::new();
    while !env.is_done() {
        let cmd = match policy.decide(env.scene(), env.visual()) {
            Ok(c) => c,
            Err(e) => {
                // only reachable if the target vanished from view
                log::warn!("{} could not decide: {e}; ending episode", policy.name());
                env.outcome = Outcome::Timeout;
                break;
            }
        };
        let r = env.step(&cmd);
        steps.push(StepRecord {
            t: env.t(),
            command: cmd,
            reward: r.reward,
            e_es: r.e_es,
            e_les: r.e_les,
            pushed: r.segment.is_some(),
        });
    }
    EpisodeRecord {
        policy: policy.name().to_owned(),
        scene_seed: sc0.seed,
        n_actions: steps.len(),
        steps,
        outcome: env.outcome(),
    }
}

pub fn error_bin(e: f64) -> usize {
    ((e * ERROR_BINS as f64).floor().max(0.0) as usize).min(ERROR_BINS - 1)
}

pub fn error_histogram(errors: impl Iterator<Item = f64>) -> [usize; ERROR_BINS] {
    let mut h = [0; ERROR_BINS];
    for e in errors {
        h[error_bin(e)] += 1;
    }
    h
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub policy: String,
    pub episodes: usize,
    pub success_rate: f64,
    pub fell_off_rate: f64,
    pub timeout_rate: f64,
    /// Over all episodes.
    pub mean_actions: f64,
    pub std_actions: f64,
    /// Over successful episodes only; `None` when there were none.
    pub mean_actions_success: Option<f64>,
    pub std_actions_success: Option<f64>,
    pub total_steps: usize,
    pub hist_e_es: [usize; ERROR_BINS],
    pub hist_e_les: [usize; ERROR_BINS],
}

/// Mean and population standard deviation, summed in input order.
pub fn mean_std(xs: &[f64]) -> Option<(f64, f64)> {
    if xs.is_empty() {
        return None;
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    Some((m, var.sqrt()))
}

pub fn summarize(policy: &str, records: &[EpisodeRecord]) -> Result<SummaryStats> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no episodes to summarize"));
    }
    let n = records.len() as f64;
    let frac = |o: Outcome| records.iter().filter(|r| r.outcome == o).count() as f64 / n;
    let all: Vec<f64> = records.iter().map(|r| r.n_actions as f64).collect();
    let succ: Vec<f64> = records
        .iter()
        .filter(|r| r.outcome == Outcome::Singulated)
        .map(|r| r.n_actions as f64)
        .collect();
    let (mean_actions, std_actions) = mean_std(&all).expect("non-empty");
    let success = mean_std(&succ);
    let steps = || records.iter().flat_map(|r| r.steps.iter());
    Ok(SummaryStats {
        policy: policy.to_owned(),
        episodes: records.len(),
        success_rate: frac(Outcome::Singulated),
        fell_off_rate: frac(Outcome::FellOff),
        timeout_rate: frac(Outcome::Timeout),
        mean_actions,
        std_actions,
        mean_actions_success: success.map(|s| s.0),
        std_actions_success: success.map(|s| s.1),
        total_steps: steps().count(),
        hist_e_es: error_histogram(steps().map(|s| s.e_es)),
        hist_e_les: error_histogram(steps().map(|s| s.e_les)),
    })
}

/// Runs one episode per scene (in parallel, each with its own seed derived
/// from `seed` and the scene index) and summarizes them. Records come back
/// in scene order.
pub fn evaluate<P>(
    policy: &P,
    scenes: &[Scene],
    cfg: &MdpConfig,
    seed: u64,
) -> Result<(Vec<EpisodeRecord>, SummaryStats)>
where
    P: Policy + Clone + Send + Sync,
{
    if scenes.is_empty() {
        return Err(Error::EmptyInput("no scenes to evaluate"));
    }
    cfg.validate()?;
    let records: Vec<EpisodeRecord> = scenes
        .par_iter()
        .enumerate()
        .map(|(k, sc)| {
            let mut p = policy.clone();
            run_episode(&mut p, sc, cfg, derive_seed(seed, k as u64))
        })
        .collect();
    let stats = summarize(policy.name(), &records)?;
    Ok((records, stats))
}

pub fn episodes_csv(records: &[EpisodeRecord]) -> String {
    let mut out = String::from("scene_id,outcome,n_actions,mean_e_es,mean_e_les\n");
    for (k, r) in records.iter().enumerate() {
        out.push_str(&format!(
            "{k},{},{},{},{}\n",
            r.outcome.as_str(),
            r.n_actions,
            r.mean_e_es(),
            r.mean_e_les()
        ));
    }
    out
}

pub fn write_episodes_csv(path: impl AsRef<Path>, records: &[EpisodeRecord]) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(episodes_csv(records).as_bytes())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Obb2, Vec2};
    use crate::policy::{EsPolicy, LesPolicy, RandomPolicy};
    use crate::scene::{ObjectSpec, Role};
    use std::f64::consts::PI;

    fn obj(id: u32, role: Role, x: f64, y: f64, half: f64) -> ObjectSpec {
        ObjectSpec {
            id,
            role,
            footprint: Obb2::axis_aligned(Vec2::new(x, y), half, half),
            height: 0.02,
        }
    }

    fn scene(objects: Vec<ObjectSpec>) -> Scene {
        Scene::new(0.5, 0.03, objects, 0).unwrap()
    }

    fn cfg(scheme: RewardScheme) -> MdpConfig {
        MdpConfig {
            reward_scheme: scheme,
            ..MdpConfig::default()
        }
    }

    #[test]
    fn scheme_names_and_labels_parse() {
        for s in [RewardScheme::Sparse, RewardScheme::EsShaped, RewardScheme::LesShaped] {
            assert_eq!(s.label().parse::<RewardScheme>().unwrap(), s);
        }
        assert_eq!("es_shaped".parse::<RewardScheme>().unwrap(), RewardScheme::EsShaped);
        assert!(matches!("dense".parse::<RewardScheme>(), Err(Error::Config(_))));
    }

    #[test]
    fn shaping_error_examples() {
        assert_eq!(shaping_error(0.3, 0.3), 0.0);
        assert_eq!(shaping_error(0.0, PI), 1.0);
        assert!((shaping_error(PI / 2.0, 0.0) - 0.5).abs() < 1e-15);
        let a = 0.7;
        let b = -2.1;
        assert!((shaping_error(a, b) - shaping_error(b, a)).abs() < 1e-12);
        assert!((shaping_error(a + 2.0 * PI, b) - shaping_error(a, b)).abs() < 1e-12);
    }

    #[test]
    fn reward_examples() {
        let es = RewardScheme::EsShaped;
        assert_eq!(score(false, true, 1, es, 0.3, 0.3, 10), (1.0, true, Outcome::Singulated));
        assert_eq!(score(true, true, 1, es, 0.3, 0.3, 10), (-1.0, true, Outcome::FellOff));
        assert_eq!(score(false, false, 1, es, 0.0, 0.5, 10).0, -0.05);
        assert_eq!(score(false, false, 1, es, 1.0, 0.5, 10).0, -0.1);
        assert_eq!(
            score(false, false, 3, RewardScheme::Sparse, 1.0, 1.0, 10),
            (-0.1, false, Outcome::Running)
        );
        assert_eq!(
            score(false, false, 10, RewardScheme::LesShaped, 1.0, 0.0, 10),
            (-0.05, true, Outcome::Timeout)
        );
    }

    #[test]
    fn es_shaped_reward_is_best_at_heuristic_angle() {
        let sc = crate::scene::generate_scene(&crate::scene::SceneGenConfig::default(), 3).unwrap();
        let v = render_visual_state(&sc);
        let h = heuristic_angles(&v, &PolicyLimits::default()).unwrap();
        let r_at = |theta: f64| {
            let e = shaping_error(theta, h.theta_es);
            step_reward(RewardScheme::EsShaped, e, 0.0, 10)
        };
        let best = r_at(h.theta_es);
        let worst = r_at(h.theta_es + PI);
        for k in 0..64 {
            let th = -PI + k as f64 * PI / 32.0;
            assert!(r_at(th) <= best + 1e-15 && r_at(th) >= worst - 1e-15);
        }
    }

    #[test]
    fn one_push_singulation() {
        // obstacle just right of the target; pushing up frees it
        let sc = scene(vec![
            obj(0, Role::Target, 0.0, 0.0, 0.02),
            obj(1, Role::Obstacle, 0.045, 0.0, 0.02),
        ]);
        assert!(!is_singulated(&sc));
        let cmd = PushCommand { theta: PI / 2.0, d: 0.1 };
        let r = step(&sc, &cmd, &cfg(RewardScheme::Sparse), 1);
        assert!(is_singulated(&r.next_scene));
        assert_eq!((r.reward, r.done, r.outcome), (1.0, true, Outcome::Singulated));
    }

    #[test]
    fn push_off_the_edge() {
        let sc = scene(vec![
            obj(0, Role::Target, 0.2, 0.0, 0.02),
            obj(1, Role::Obstacle, 0.2, 0.045, 0.02),
        ]);
        let cmd = PushCommand { theta: 0.0, d: 0.1 };
        let r = step(&sc, &cmd, &cfg(RewardScheme::EsShaped), 1);
        assert_eq!((r.reward, r.done, r.outcome), (-1.0, true, Outcome::FellOff));
    }

    #[test]
    fn timeout_at_horizon() {
        let sc = scene(vec![
            obj(0, Role::Target, 0.0, 0.0, 0.02),
            obj(1, Role::Obstacle, 0.05, 0.0, 0.02),
        ]);
        // pushing up by the minimum keeps the obstacle within d_sing
        let cmd = PushCommand { theta: PI / 2.0, d: 0.02 };
        let c = cfg(RewardScheme::Sparse);
        let r = step(&sc, &cmd, &c, c.t_max);
        assert_eq!(r.outcome, Outcome::Timeout);
        assert!(r.done);
        assert_eq!(r.reward, -0.1);
    }

    #[test]
    fn no_free_patch_is_a_noop_with_penalty() {
        let sc = scene(vec![
            obj(0, Role::Target, 0.0, 0.0, 0.02),
            ObjectSpec {
                id: 1,
                role: Role::Obstacle,
                footprint: Obb2::axis_aligned(Vec2::new(-0.14, 0.0), 0.11, 0.2),
                height: 0.02,
            },
        ]);
        let cmd = PushCommand { theta: 0.0, d: 0.05 };
        let r = step(&sc, &cmd, &cfg(RewardScheme::Sparse), 1);
        assert!(r.segment.is_none());
        assert_eq!(r.next_scene, sc);
        assert_eq!((r.reward, r.done), (-0.1, false));
    }

    #[derive(Clone)]
    struct Fixed(PushCommand);

    impl Policy for Fixed {
        fn name(&self) -> &str {
            "fixed"
        }
        fn decide(&mut self, _: &Scene, _: &VisualGrid) -> Result<PushCommand> {
            Ok(self.0)
        }
    }

    #[test]
    fn es_singulates_single_obstacle_scene() {
        let sc = scene(vec![
            obj(0, Role::Target, 0.0, 0.0, 0.02),
            obj(1, Role::Obstacle, 0.045, 0.01, 0.02),
        ]);
        let mut es = EsPolicy {
            limits: PolicyLimits::default(),
        };
        let rec = run_episode(&mut es, &sc, &MdpConfig::default(), 0);
        assert_eq!(rec.outcome, Outcome::Singulated);
        assert!(rec.n_actions <= MdpConfig::default().t_max);
        // ES measured against itself
        assert!(rec.steps.iter().all(|s| s.e_es < 1e-12));
    }

    #[test]
    fn edge_pushing_policy_falls_off() {
        // a long obstacle alongside keeps the target unsingulated until it drops
        let sc = scene(vec![
            obj(0, Role::Target, 0.2, 0.0, 0.02),
            ObjectSpec {
                id: 1,
                role: Role::Obstacle,
                footprint: Obb2::axis_aligned(Vec2::new(0.15, 0.045), 0.1, 0.02),
                height: 0.02,
            },
        ]);
        let mut p = Fixed(PushCommand { theta: 0.0, d: 0.1 });
        let rec = run_episode(&mut p, &sc, &MdpConfig::default(), 0);
        assert_eq!(rec.outcome, Outcome::FellOff);
        assert_eq!(rec.steps.last().unwrap().reward, -1.0);
    }

    #[test]
    fn single_step_horizon_times_out() {
        let sc = scene(vec![
            obj(0, Role::Target, 0.0, 0.0, 0.02),
            ObjectSpec {
                id: 1,
                role: Role::Obstacle,
                footprint: Obb2::axis_aligned(Vec2::new(-0.14, 0.0), 0.11, 0.2),
                height: 0.02,
            },
        ]);
        let mut p = Fixed(PushCommand { theta: 0.0, d: 0.05 });
        let c = MdpConfig {
            t_max: 1,
            ..MdpConfig::default()
        };
        let rec = run_episode(&mut p, &sc, &c, 0);
        assert_eq!(rec.outcome, Outcome::Timeout);
        assert_eq!(rec.n_actions, 1);
    }

    #[test]
    fn summary_of_deterministic_two_push_success() {
        let rec = EpisodeRecord {
            policy: "x".into(),
            scene_seed: 0,
            steps: vec![
                StepRecord {
                    t: 1,
                    command: PushCommand { theta: 0.0, d: 0.05 },
                    reward: -0.1,
                    e_es: 0.05,
                    e_les: 0.55,
                    pushed: true,
                },
                StepRecord {
                    t: 2,
                    command: PushCommand { theta: 0.0, d: 0.05 },
                    reward: 1.0,
                    e_es: 0.95,
                    e_les: 1.0,
                    pushed: true,
                },
            ],
            outcome: Outcome::Singulated,
            n_actions: 2,
        };
        let s = summarize("x", &[rec]).unwrap();
        assert_eq!(s.success_rate, 1.0);
        assert_eq!((s.mean_actions, s.std_actions), (2.0, 0.0));
        assert_eq!(s.mean_actions_success, Some(2.0));
        assert_eq!(s.hist_e_es.iter().sum::<usize>(), 2);
        assert_eq!(s.hist_e_es[0], 1);
        assert_eq!(s.hist_e_es[9], 1);
        assert_eq!(s.hist_e_les[5], 1);
        assert_eq!(s.hist_e_les[9], 1);
        assert!(summarize("x", &[]).is_err());
    }

    #[test]
    fn evaluation_is_deterministic_and_conserves_steps() {
        let cfg_s = crate::scene::SceneGenConfig::default();
        let scenes = crate::scene::generate_batch(&cfg_s, 1, 6).unwrap();
        let p = RandomPolicy::new(PolicyLimits::default(), 0);
        let (a, sa) = evaluate(&p, &scenes, &MdpConfig::default(), 9).unwrap();
        let (b, sb) = evaluate(&p, &scenes, &MdpConfig::default(), 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(sa, sb);
        let steps: usize = a.iter().map(|r| r.n_actions).sum();
        assert_eq!(sa.hist_e_es.iter().sum::<usize>(), steps);
        assert_eq!(sa.hist_e_les.iter().sum::<usize>(), steps);
        assert_eq!(episodes_csv(&a).lines().count(), 7);

        let les = LesPolicy {
            limits: PolicyLimits::default(),
        };
        let (recs, _) = evaluate(&les, &scenes, &MdpConfig::default(), 0).unwrap();
        assert!(recs.iter().all(|r| r.n_actions <= 10));
        assert!(recs.iter().all(|r| r.steps.iter().all(|s| s.e_les < 1e-12)));
    }
}
