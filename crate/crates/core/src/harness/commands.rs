//! The CLI commands as plain functions. Each writes its outputs into an
//! output directory together with a [`RunManifest`].

use super::config::RunConfig;
use super::manifest::RunManifest;
use super::render::render_artifacts;
use super::report::{report_results, similarity_analysis, ResultRow};
use crate::error::{Error, Result};
use crate::learn::{ddpg_train, fill_replay_buffer, write_losses_csv, ActorPolicy, ReplayBuffer, TrainedAgent};
use crate::mdp::{evaluate, summarize, write_episodes_csv, EpisodeRecord, RewardScheme};
use crate::percept::VisualGrid;
use crate::policy::{EsPolicy, LesPolicy, Policy, PushCommand, RandomPolicy};
use crate::scene::{generate_batch, generate_scene, load_scene, load_scene_batch, save_scene_batch, Scene};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Base seed of the shipped 200-scene evaluation batch.
pub const EVAL_BATCH_SEED: u64 = 2022;
pub const EVAL_BATCH_SIZE: usize = 200;

/// Location of the shipped evaluation batch inside the source tree.
pub fn shipped_eval_batch() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/eval_scenes_200.json")
}

/// 1 for configuration problems, 2 for anything that failed while running.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 1,
        _ => 2,
    }
}

pub fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn prepare_out(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn finish(
    command: &str,
    seed: u64,
    cfg: &RunConfig,
    inputs: Vec<PathBuf>,
    out: &Path,
    outputs: &[String],
) -> Result<RunManifest> {
    let m = RunManifest::build(command, seed, cfg, inputs, out, outputs)?;
    m.write(out)?;
    Ok(m)
}

pub fn gen_scenes(cfg: &RunConfig, seed: u64, out: &Path) -> Result<RunManifest> {
    cfg.validate()?;
    prepare_out(out)?;
    let scenes = generate_batch(&cfg.scene, seed, cfg.n_scenes)?;
    save_scene_batch(out.join("scenes.json"), &scenes)?;
    log::info!("wrote {} scenes", scenes.len());
    finish("gen-scenes", seed, cfg, vec![], out, &["scenes.json".into()])
}

/// Which policy `eval` runs.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicyChoice {
    Es,
    Les,
    Random,
    /// A trained actor loaded from a model file.
    Model(PathBuf),
}

impl std::str::FromStr for PolicyChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "es" => Ok(Self::Es),
            "les" => Ok(Self::Les),
            "random" => Ok(Self::Random),
            other => match other.strip_prefix("model:") {
                Some(p) => Ok(Self::Model(PathBuf::from(&s[s.len() - p.len()..]))),
                None => Err(Error::Config(format!(
                    "unknown policy {s:?}; expected es, les, random or model:<path>"
                ))),
            },
        }
    }
}

/// Any of the evaluable policies behind one cloneable type.
#[derive(Debug, Clone)]
pub enum AnyPolicy {
    Es(EsPolicy),
    Les(LesPolicy),
    Random(Box<RandomPolicy>),
    Actor(ActorPolicy),
}

impl Policy for AnyPolicy {
    fn name(&self) -> &str {
        match self {
            AnyPolicy::Es(p) => p.name(),
            AnyPolicy::Les(p) => p.name(),
            AnyPolicy::Random(p) => p.name(),
            AnyPolicy::Actor(p) => p.name(),
        }
    }

    fn decide(&mut self, sc: &Scene, v: &VisualGrid) -> Result<PushCommand> {
        match self {
            AnyPolicy::Es(p) => p.decide(sc, v),
            AnyPolicy::Les(p) => p.decide(sc, v),
            AnyPolicy::Random(p) => p.decide(sc, v),
            AnyPolicy::Actor(p) => p.decide(sc, v),
        }
    }

    fn reset(&mut self, episode_seed: u64) {
        match self {
            AnyPolicy::Es(p) => p.reset(episode_seed),
            AnyPolicy::Les(p) => p.reset(episode_seed),
            AnyPolicy::Random(p) => p.reset(episode_seed),
            AnyPolicy::Actor(p) => p.reset(episode_seed),
        }
    }
}

pub fn build_policy(choice: &PolicyChoice, cfg: &RunConfig, seed: u64) -> Result<AnyPolicy> {
    let limits = cfg.mdp.policy_limits.clone();
    Ok(match choice {
        PolicyChoice::Es => AnyPolicy::Es(EsPolicy { limits }),
        PolicyChoice::Les => AnyPolicy::Les(LesPolicy { limits }),
        PolicyChoice::Random => AnyPolicy::Random(Box::new(RandomPolicy::new(limits, seed))),
        PolicyChoice::Model(p) => AnyPolicy::Actor(TrainedAgent::load(p)?.policy(limits)),
    })
}

/// Evaluates one policy on a scene file, or on `cfg.n_scenes` scenes
/// generated from `seed` when no file is given.
pub fn eval(
    cfg: &RunConfig,
    seed: u64,
    out: &Path,
    choice: &PolicyChoice,
    scenes_file: Option<&Path>,
) -> Result<RunManifest> {
    cfg.validate()?;
    let policy = build_policy(choice, cfg, seed)?;
    let mut inputs = Vec::new();
    let scenes = match scenes_file {
        Some(p) => {
            inputs.push(p.to_path_buf());
            load_scene_batch(p)?
        }
        None => generate_batch(&cfg.scene, seed, cfg.n_scenes)?,
    };
    if let PolicyChoice::Model(p) = choice {
        inputs.push(p.clone());
    }
    prepare_out(out)?;
    let (records, stats) = evaluate(&policy, &scenes, &cfg.mdp, seed)?;
    log::info!(
        "{}: success {:.1}% over {} episodes",
        stats.policy,
        100.0 * stats.success_rate,
        stats.episodes
    );
    write_episodes_csv(out.join("episodes.csv"), &records)?;
    write_json(&out.join("records.json"), &records)?;
    write_json(&out.join("summary.json"), &stats)?;
    finish(
        "eval",
        seed,
        cfg,
        inputs,
        out,
        &["episodes.csv".into(), "records.json".into(), "summary.json".into()],
    )
}

pub fn fill_buffer(cfg: &RunConfig, seed: u64, out: &Path) -> Result<RunManifest> {
    cfg.validate()?;
    prepare_out(out)?;
    let ddpg = crate::learn::DdpgConfig {
        seed,
        ..cfg.ddpg.clone()
    };
    let buf = fill_replay_buffer(&ddpg, &cfg.scene, &cfg.mdp)?;
    buf.save(out.join("buffer.bin"))?;
    finish("fill-buffer", seed, cfg, vec![], out, &["buffer.bin".into()])
}

fn model_stem(scheme: RewardScheme) -> String {
    scheme.label().to_ascii_lowercase()
}

/// Trains one agent per scheme on the same buffer. Outputs are
/// `model_<label>.json` and `losses_<label>.csv`, e.g. `model_rl-es.json`.
pub fn train(
    cfg: &RunConfig,
    seed: u64,
    out: &Path,
    buffer_file: &Path,
    schemes: &[RewardScheme],
) -> Result<RunManifest> {
    cfg.validate()?;
    if schemes.is_empty() {
        return Err(Error::Config("no reward scheme selected".into()));
    }
    let buf = ReplayBuffer::load(buffer_file)?;
    prepare_out(out)?;
    let ddpg = crate::learn::DdpgConfig {
        seed,
        ..cfg.ddpg.clone()
    };
    let mut outputs = Vec::new();
    for &scheme in schemes {
        let agent = ddpg_train(&buf, &ddpg, scheme, &cfg.mdp)?;
        let stem = model_stem(scheme);
        agent.save(out.join(format!("model_{stem}.json")))?;
        write_losses_csv(out.join(format!("losses_{stem}.csv")), &agent.losses)?;
        outputs.push(format!("model_{stem}.json"));
        outputs.push(format!("losses_{stem}.csv"));
    }
    finish("train", seed, cfg, vec![buffer_file.to_path_buf()], out, &outputs)
}

/// Builds the result table and the similarity report from one or more
/// `records.json` files written by `eval`.
pub fn analyze(cfg: &RunConfig, seed: u64, out: &Path, records_files: &[PathBuf]) -> Result<RunManifest> {
    if records_files.is_empty() {
        return Err(Error::Config("analyze needs at least one records file".into()));
    }
    let mut records: Vec<EpisodeRecord> = Vec::new();
    for p in records_files {
        let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
        let mut r: Vec<EpisodeRecord> =
            serde_json::from_str(&text).map_err(|e| Error::malformed(p, e.to_string()))?;
        records.append(&mut r);
    }
    prepare_out(out)?;
    let mut by_policy: BTreeMap<String, Vec<EpisodeRecord>> = BTreeMap::new();
    for r in &records {
        by_policy.entry(r.policy.clone()).or_default().push(r.clone());
    }
    let rows = by_policy
        .iter()
        .map(|(name, recs)| summarize(name, recs).map(|s| ResultRow::from(&s)))
        .collect::<Result<Vec<_>>>()?;
    let table = report_results(&rows)?;
    let write = |name: &str, text: &str| -> Result<()> {
        let p = out.join(name);
        std::fs::write(&p, text).map_err(|e| Error::io(&p, e))
    };
    write("results.csv", &table.csv)?;
    write("results.txt", &table.text)?;
    write_json(&out.join("similarity.json"), &similarity_analysis(&records)?)?;
    print!("{}", table.text);
    finish(
        "analyze",
        seed,
        cfg,
        records_files.to_vec(),
        out,
        &["results.csv".into(), "results.txt".into(), "similarity.json".into()],
    )
}

/// Renders the map stages for a scene file, or for a scene generated from
/// `seed`.
pub fn render(cfg: &RunConfig, seed: u64, out: &Path, scene_file: Option<&Path>) -> Result<RunManifest> {
    cfg.validate()?;
    let (sc, inputs) = match scene_file {
        Some(p) => (load_scene(p)?, vec![p.to_path_buf()]),
        None => (generate_scene(&cfg.scene, seed)?, vec![]),
    };
    prepare_out(out)?;
    let paths = render_artifacts(&sc, &cfg.mdp.policy_limits, out)?;
    let rel: Vec<String> = paths
        .iter()
        .map(|p| p.file_name().expect("file").to_string_lossy().into_owned())
        .collect();
    finish("render", seed, cfg, inputs, out, &rel)
}
