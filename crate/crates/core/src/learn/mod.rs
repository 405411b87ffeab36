//! Dense networks, Adam, the static replay buffer and offline DDPG.

pub mod adam;
pub mod ddpg;
pub mod mlp;
pub mod replay;

pub use adam::{Adam, AdamConfig};
pub use ddpg::{
    ddpg_train, losses_csv, write_losses_csv, ActorPolicy, DdpgConfig, EpochLoss, TrainedAgent,
    CRITIC_INPUT_DIM,
};
pub use mlp::{Cache, Mlp, OutputActivation};
pub use replay::{denormalize_action, fill_replay_buffer, normalize_action, ReplayBuffer, Transition};
