//! Offline asymmetric DDPG on a fixed replay buffer.

use super::adam::{Adam, AdamConfig};
use super::mlp::{Mlp, OutputActivation};
use super::replay::{denormalize_action, ReplayBuffer, Transition};
use crate::error::{Error, Result};
use crate::geometry::wrap_angle;
use crate::mdp::{MdpConfig, RewardScheme};
use crate::percept::{actor_observation, VisualGrid, ACTOR_OBS_DIM, FULL_STATE_DIM};
use crate::policy::{Policy, PolicyLimits, PushCommand};
use crate::scene::Scene;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

pub const ACTION_DIM: usize = 2;
pub const CRITIC_INPUT_DIM: usize = FULL_STATE_DIM + ACTION_DIM;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DdpgConfig {
    pub gamma: f64,
    pub polyak: f64,
    pub lr: f64,
    pub batch: usize,
    pub epochs: usize,
    pub buffer_size: usize,
    pub hidden: Vec<usize>,
    pub seed: u64,
}

impl Default for DdpgConfig {
    fn default() -> Self {
        Self {
            gamma: 0.9,
            polyak: 0.999,
            lr: 1e-3,
            batch: 32,
            epochs: 50,
            buffer_size: 100_000,
            hidden: vec![512, 512, 512],
            seed: 0,
        }
    }
}

impl DdpgConfig {
    /// Small profile for quick runs: 5K transitions, 64-unit layers, 20
    /// epochs. Pair it with [`crate::scene::SceneGenConfig::desk`].
    pub fn desk() -> Self {
        Self {
            buffer_size: 5_000,
            hidden: vec![64, 64, 64],
            epochs: 20,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if !open_unit(self.gamma) && self.gamma != 0.0 {
            return Err(Error::Config(format!("gamma must lie in [0, 1), got {}", self.gamma)));
        }
        if !open_unit(self.polyak) {
            return Err(Error::Config(format!("polyak must lie in (0, 1), got {}", self.polyak)));
        }
        if !(self.lr > 0.0) || self.batch == 0 || self.buffer_size == 0 {
            return Err(Error::Config("lr, batch and buffer_size must be positive".into()));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return Err(Error::Config(format!("bad hidden layers {:?}", self.hidden)));
        }
        Ok(())
    }

    fn sizes(&self, input: usize, output: usize) -> Vec<usize> {
        let mut s = vec![input];
        s.extend_from_slice(&self.hidden);
        s.push(output);
        s
    }
}

/// Mean losses over the minibatches of one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub critic_loss: f64,
    pub actor_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedAgent {
    pub scheme: RewardScheme,
    pub config: DdpgConfig,
    pub actor: Mlp,
    pub critic: Mlp,
    pub losses: Vec<EpochLoss>,
}

fn widen(v: &[f32]) -> impl Iterator<Item = f64> + '_ {
    v.iter().map(|&x| x as f64)
}

fn critic_input(state: &[f32], action: &[f64]) -> Vec<f64> {
    widen(state).chain(action.iter().copied()).collect()
}

pub fn new_actor(cfg: &DdpgConfig, rng: &mut ChaCha8Rng) -> Result<Mlp> {
    Mlp::new(&cfg.sizes(ACTOR_OBS_DIM, ACTION_DIM), OutputActivation::Tanh, rng)
}

pub fn new_critic(cfg: &DdpgConfig, rng: &mut ChaCha8Rng) -> Result<Mlp> {
    Mlp::new(&cfg.sizes(CRITIC_INPUT_DIM, 1), OutputActivation::Linear, rng)
}

struct Learner<'a> {
    cfg: &'a DdpgConfig,
    scheme: RewardScheme,
    t_max: usize,
    actor: Mlp,
    critic: Mlp,
    actor_target: Mlp,
    critic_target: Mlp,
    actor_opt: Adam,
    critic_opt: Adam,
}

impl Learner<'_> {
    /// One critic step then one actor step on `batch`; returns both losses.
    fn update(&mut self, batch: &[&Transition]) -> Result<(f64, f64)> {
        let n = batch.len() as f64;

        let mut g_critic = vec![0.0; self.critic.params().len()];
        let mut critic_loss = 0.0;
        for t in batch {
            let r = t.reward(self.scheme, self.t_max);
            let y = if t.done {
                r
            } else {
                let next_obs: Vec<f64> = widen(&t.next_actor_obs).collect();
                let a_next = self.actor_target.predict(&next_obs)?;
                let q_next = self.critic_target.predict(&critic_input(&t.next_full_state, &a_next))?[0];
                r + self.cfg.gamma * q_next
            };
            let cache = self.critic.forward(&critic_input(&t.full_state, &t.action))?;
            let td = cache.output()[0] - y;
            critic_loss += td * td / n;
            self.critic.backward(&cache, &[2.0 * td / n], &mut g_critic);
        }
        self.critic_opt.step(self.critic.params_mut(), &g_critic);

        let mut g_actor = vec![0.0; self.actor.params().len()];
        let mut scratch = vec![0.0; self.critic.params().len()];
        let mut actor_loss = 0.0;
        for t in batch {
            let obs: Vec<f64> = widen(&t.actor_obs).collect();
            let a_cache = self.actor.forward(&obs)?;
            let q_cache = self.critic.forward(&critic_input(&t.full_state, a_cache.output()))?;
            actor_loss -= q_cache.output()[0] / n;
            let dq_dx = self.critic.backward(&q_cache, &[-1.0 / n], &mut scratch);
            self.actor.backward(&a_cache, &dq_dx[FULL_STATE_DIM..], &mut g_actor);
        }
        self.actor_opt.step(self.actor.params_mut(), &g_actor);

        self.actor_target.polyak_toward(&self.actor, self.cfg.polyak);
        self.critic_target.polyak_toward(&self.critic, self.cfg.polyak);
        Ok((critic_loss, actor_loss))
    }
}

/// Trains actor and critic for `cfg.epochs` passes over the static buffer,
/// with rewards rebuilt for `scheme`. Single-threaded and reproducible for a
/// given buffer and seed.
pub fn ddpg_train(
    buffer: &ReplayBuffer,
    cfg: &DdpgConfig,
    scheme: RewardScheme,
    mdp: &MdpConfig,
) -> Result<TrainedAgent> {
    cfg.validate()?;
    if buffer.is_empty() {
        return Err(Error::EmptyInput("replay buffer is empty"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let actor = new_actor(cfg, &mut rng)?;
    let critic = new_critic(cfg, &mut rng)?;
    let adam = AdamConfig {
        lr: cfg.lr,
        ..AdamConfig::default()
    };
    let mut learner = Learner {
        cfg,
        scheme,
        t_max: mdp.t_max,
        actor_opt: Adam::new(actor.params().len(), adam),
        critic_opt: Adam::new(critic.params().len(), adam),
        actor_target: actor.clone(),
        critic_target: critic.clone(),
        actor,
        critic,
    };

    let mut order: Vec<usize> = (0..buffer.len()).collect();
    let mut losses = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let (mut c_sum, mut a_sum, mut batches) = (0.0, 0.0, 0usize);
        for chunk in order.chunks(cfg.batch) {
            let batch: Vec<&Transition> = chunk.iter().map(|&k| &buffer.transitions[k]).collect();
            let (c, a) = learner.update(&batch)?;
            c_sum += c;
            a_sum += a;
            batches += 1;
        }
        let loss = EpochLoss {
            epoch,
            critic_loss: c_sum / batches as f64,
            actor_loss: a_sum / batches as f64,
        };
        log::info!(
            "{} epoch {epoch}: critic {:.5} actor {:.5}",
            scheme.label(),
            loss.critic_loss,
            loss.actor_loss
        );
        losses.push(loss);
    }
    Ok(TrainedAgent {
        scheme,
        config: cfg.clone(),
        actor: learner.actor,
        critic: learner.critic,
        losses,
    })
}

impl TrainedAgent {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(std::io::BufWriter::new(f), self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let agent: TrainedAgent =
            serde_json::from_str(&text).map_err(|e| Error::malformed(path, e.to_string()))?;
        // re-validate shapes and finiteness
        for net in [&agent.actor, &agent.critic] {
            Mlp::from_params(net.sizes(), net.output_activation(), net.params().to_vec())
                .map_err(|e| Error::malformed(path, e.to_string()))?;
        }
        if agent.actor.input_dim() != ACTOR_OBS_DIM || agent.critic.input_dim() != CRITIC_INPUT_DIM {
            return Err(Error::malformed(path, "network input sizes do not match"));
        }
        Ok(agent)
    }

    pub fn policy(&self, limits: PolicyLimits) -> ActorPolicy {
        ActorPolicy {
            name: self.scheme.label().to_owned(),
            actor: self.actor.clone(),
            limits,
        }
    }
}

pub fn losses_csv(losses: &[EpochLoss]) -> String {
    let mut s = String::from("epoch,critic_loss,actor_loss\n");
    for l in losses {
        s.push_str(&format!("{},{},{}\n", l.epoch, l.critic_loss, l.actor_loss));
    }
    s
}

pub fn write_losses_csv(path: impl AsRef<Path>, losses: &[EpochLoss]) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(losses_csv(losses).as_bytes())
        .map_err(|e| Error::io(path, e))
}

/// Deterministic policy driven by a trained actor network.
#[derive(Debug, Clone)]
pub struct ActorPolicy {
    pub name: String,
    pub actor: Mlp,
    pub limits: PolicyLimits,
}

impl Policy for ActorPolicy {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&mut self, _sc: &Scene, v: &VisualGrid) -> Result<PushCommand> {
        let u = self.actor.predict(&actor_observation(v))?;
        let cmd = denormalize_action([u[0], u[1]], &self.limits);
        Ok(PushCommand {
            theta: wrap_angle(cmd.theta),
            d: cmd.d,
        })
    }
}
