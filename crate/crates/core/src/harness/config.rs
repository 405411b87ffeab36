//! Run configuration shared by every CLI command.

use crate::error::{Error, Result};
use crate::learn::DdpgConfig;
use crate::mdp::MdpConfig;
use crate::scene::SceneGenConfig;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Everything a run can be configured with. Every field has a default, so a
/// config file only lists what it changes; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scene: SceneGenConfig,
    pub mdp: MdpConfig,
    pub ddpg: DdpgConfig,
    /// Number of scenes for `gen-scenes`, and for `eval` when no scene file
    /// is given.
    pub n_scenes: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scene: SceneGenConfig::default(),
            mdp: MdpConfig::default(),
            ddpg: DdpgConfig::default(),
            n_scenes: 200,
        }
    }
}

impl RunConfig {
    /// Reduced-clutter profile: 2 to 4 obstacles, 5K transitions, 64-unit
    /// layers, 20 epochs.
    pub fn desk() -> Self {
        Self {
            scene: SceneGenConfig::desk(),
            ddpg: DdpgConfig::desk(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        self.mdp.validate()?;
        self.ddpg.validate()?;
        if self.n_scenes == 0 {
            return Err(Error::Config("n_scenes must be >= 1".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file. Any problem with the file, including a missing
    /// file, is reported as a configuration error.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}
