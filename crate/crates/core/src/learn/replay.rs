//! Static replay buffer filled with random pushes, and its binary file.

use crate::error::{Error, Result};
use crate::mdp::{step_reward, Env, MdpConfig, Outcome, RewardScheme};
use crate::percept::{actor_observation, critic_state, ACTOR_OBS_DIM, FULL_STATE_DIM};
use crate::policy::{random_decide, PolicyLimits, PushCommand};
use crate::scene::{derive_seed, generate_scene, SceneGenConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use super::DdpgConfig;

/// One stored push. Observations are kept in single precision; the pooled
/// visual values are multiples of 1/128 and survive exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub actor_obs: Vec<f32>,
    pub full_state: Vec<f32>,
    /// Command mapped to `[-1, 1]^2`.
    pub action: [f64; 2],
    pub sparse_reward: f64,
    pub e_es: f64,
    pub e_les: f64,
    pub next_actor_obs: Vec<f32>,
    pub next_full_state: Vec<f32>,
    pub done: bool,
    pub outcome: Outcome,
}

impl Transition {
    /// Reward under `scheme`; terminal outcomes override the step reward.
    pub fn reward(&self, scheme: RewardScheme, t_max: usize) -> f64 {
        match self.outcome {
            Outcome::FellOff => -1.0,
            Outcome::Singulated => 1.0,
            Outcome::Timeout | Outcome::Running => step_reward(scheme, self.e_es, self.e_les, t_max),
        }
    }
}

/// Maps a command to the normalized action square. Inverse of
/// [`denormalize_action`] on `[-1, 1]^2`.
pub fn normalize_action(cmd: &PushCommand, lim: &PolicyLimits) -> [f64; 2] {
    [
        cmd.theta / PI,
        2.0 * (cmd.d - lim.d_min) / (lim.d_max - lim.d_min) - 1.0,
    ]
}

/// `theta = pi u1`, `d = d_min + (u2 + 1) / 2 (d_max - d_min)`.
pub fn denormalize_action(u: [f64; 2], lim: &PolicyLimits) -> PushCommand {
    PushCommand {
        theta: PI * u[0],
        d: lim.d_min + (u[1] + 1.0) / 2.0 * (lim.d_max - lim.d_min),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayBuffer {
    pub seed: u64,
    pub transitions: Vec<Transition>,
}

const MAGIC: &[u8; 4] = b"SGRB";
const VERSION: u32 = 1;
/// Episodes simulated per parallel round while filling.
const FILL_CHUNK: u64 = 32;

fn to_f32(v: &[f64]) -> Vec<f32> {
    v.iter().map(|&x| x as f32).collect()
}

fn episode_transitions(
    scene_cfg: &SceneGenConfig,
    mdp_cfg: &MdpConfig,
    seed: u64,
    k: u64,
) -> Result<Vec<Transition>> {
    let sc = generate_scene(scene_cfg, derive_seed(seed, 2 * k))?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 2 * k + 1));
    let lim = &mdp_cfg.policy_limits;
    let mut env = Env::new(sc, mdp_cfg.clone());
    let mut obs = actor_observation(env.visual());
    let mut state = critic_state(env.scene())?;
    let mut out = Vec::new();
    while !env.is_done() {
        let cmd = random_decide(&mut rng, lim);
        let r = env.step(&cmd);
        let next_obs = actor_observation(env.visual());
        // the target may have left the table; the next state is then unused
        let next_state = critic_state(env.scene()).unwrap_or_else(|_| vec![0.0; FULL_STATE_DIM]);
        let (sparse_reward, _, _) = crate::mdp::score(
            r.outcome == Outcome::FellOff,
            r.outcome == Outcome::Singulated,
            env.t(),
            RewardScheme::Sparse,
            r.e_es,
            r.e_les,
            mdp_cfg.t_max,
        );
        out.push(Transition {
            actor_obs: to_f32(&obs),
            full_state: to_f32(&state),
            action: normalize_action(&cmd, lim),
            sparse_reward,
            e_es: r.e_es,
            e_les: r.e_les,
            next_actor_obs: to_f32(&next_obs),
            next_full_state: to_f32(&next_state),
            done: r.done,
            outcome: r.outcome,
        });
        obs = next_obs;
        state = next_state;
    }
    Ok(out)
}

/// Runs random-push episodes on freshly generated scenes until
/// `cfg.buffer_size` transitions are stored. Episodes run in parallel rounds
/// and are concatenated in episode order, so the result depends only on the
/// seeds.
pub fn fill_replay_buffer(
    cfg: &DdpgConfig,
    scene_cfg: &SceneGenConfig,
    mdp_cfg: &MdpConfig,
) -> Result<ReplayBuffer> {
    cfg.validate()?;
    scene_cfg.validate()?;
    mdp_cfg.validate()?;
    let mut transitions = Vec::with_capacity(cfg.buffer_size);
    let mut next_episode = 0u64;
    while transitions.len() < cfg.buffer_size {
        let chunk: Vec<Vec<Transition>> = (next_episode..next_episode + FILL_CHUNK)
            .into_par_iter()
            .map(|k| episode_transitions(scene_cfg, mdp_cfg, cfg.seed, k))
            .collect::<Result<_>>()?;
        next_episode += FILL_CHUNK;
        for ep in chunk {
            transitions.extend(ep);
        }
    }
    transitions.truncate(cfg.buffer_size);
    log::info!(
        "filled replay buffer with {} transitions from {} episodes",
        transitions.len(),
        next_episode
    );
    Ok(ReplayBuffer {
        seed: cfg.seed,
        transitions,
    })
}

fn outcome_code(o: Outcome) -> u8 {
    match o {
        Outcome::Running => 0,
        Outcome::Singulated => 1,
        Outcome::FellOff => 2,
        Outcome::Timeout => 3,
    }
}

fn outcome_from_code(c: u8) -> Option<Outcome> {
    Some(match c {
        0 => Outcome::Running,
        1 => Outcome::Singulated,
        2 => Outcome::FellOff,
        3 => Outcome::Timeout,
        _ => return None,
    })
}

impl ReplayBuffer {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    /// Little-endian dump: magic, version, count, observation and state
    /// dims, seed, then the transitions field by field.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut b = Vec::new();
        b.extend_from_slice(MAGIC);
        b.extend_from_slice(&VERSION.to_le_bytes());
        b.extend_from_slice(&(self.transitions.len() as u64).to_le_bytes());
        b.extend_from_slice(&(ACTOR_OBS_DIM as u32).to_le_bytes());
        b.extend_from_slice(&(FULL_STATE_DIM as u32).to_le_bytes());
        b.extend_from_slice(&self.seed.to_le_bytes());
        let put = |b: &mut Vec<u8>, v: &[f32]| v.iter().for_each(|x| b.extend_from_slice(&x.to_le_bytes()));
        for t in &self.transitions {
            put(&mut b, &t.actor_obs);
            put(&mut b, &t.full_state);
            for x in [t.action[0], t.action[1], t.sparse_reward, t.e_es, t.e_les] {
                b.extend_from_slice(&x.to_le_bytes());
            }
            put(&mut b, &t.next_actor_obs);
            put(&mut b, &t.next_full_state);
            b.push(t.done as u8);
            b.push(outcome_code(t.outcome));
        }
        b
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0, path };
        if r.take(4)? != MAGIC {
            return Err(Error::malformed(path, "not a replay buffer file"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::malformed(path, format!("unsupported version {version}")));
        }
        let count = r.u64()? as usize;
        let (obs_dim, state_dim) = (r.u32()? as usize, r.u32()? as usize);
        if obs_dim != ACTOR_OBS_DIM || state_dim != FULL_STATE_DIM {
            return Err(Error::malformed(path, format!("unexpected dims {obs_dim}/{state_dim}")));
        }
        let seed = r.u64()?;
        let mut transitions = Vec::with_capacity(count);
        for _ in 0..count {
            let actor_obs = r.f32s(obs_dim)?;
            let full_state = r.f32s(state_dim)?;
            let action = [r.f64()?, r.f64()?];
            let (sparse_reward, e_es, e_les) = (r.f64()?, r.f64()?, r.f64()?);
            let next_actor_obs = r.f32s(obs_dim)?;
            let next_full_state = r.f32s(state_dim)?;
            let done = r.take(1)?[0] != 0;
            let outcome = outcome_from_code(r.take(1)?[0])
                .ok_or_else(|| Error::malformed(path, "bad outcome code"))?;
            transitions.push(Transition {
                actor_obs,
                full_state,
                action,
                sparse_reward,
                e_es,
                e_les,
                next_actor_obs,
                next_full_state,
                done,
                outcome,
            });
        }
        if r.pos != bytes.len() {
            return Err(Error::malformed(path, "trailing bytes"));
        }
        Ok(Self { seed, transitions })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut bytes = Vec::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes, path)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::malformed(self.path, "truncated file"));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        Ok(self
            .take(4 * n)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect())
    }
}
