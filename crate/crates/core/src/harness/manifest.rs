//! Per-run manifest listing every output with its content hash.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    pub config: serde_json::Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<OutputEntry>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn hash_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

impl RunManifest {
    /// Hashes `outputs` (given relative to `out_dir`) in the order listed.
    pub fn build(
        command: &str,
        seed: u64,
        config: &impl Serialize,
        inputs: Vec<PathBuf>,
        out_dir: &Path,
        outputs: &[String],
    ) -> Result<Self> {
        let outputs = outputs
            .iter()
            .map(|rel| {
                Ok(OutputEntry {
                    path: rel.clone(),
                    sha256: hash_file(out_dir.join(rel))?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            command: command.to_owned(),
            seed,
            config: serde_json::to_value(config)?,
            inputs,
            outputs,
        })
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::malformed(path, e.to_string()))
    }

    /// Re-hashes every listed output and returns those whose content no
    /// longer matches.
    pub fn verify(&self, out_dir: &Path) -> Result<Vec<String>> {
        let mut stale = Vec::new();
        for o in &self.outputs {
            if hash_file(out_dir.join(&o.path))? != o.sha256 {
                stale.push(o.path.clone());
            }
        }
        Ok(stale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn build_write_verify() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.txt"), "hello").unwrap();
        let m = RunManifest::build("test", 7, &serde_json::json!({"k": 1}), vec![], dir.path(), &["a.txt".into()])
            .unwrap();
        let path = m.write(dir.path()).unwrap();
        assert_eq!(RunManifest::load(&path).unwrap(), m);
        assert!(m.verify(dir.path()).unwrap().is_empty());
        std::fs::write(dir.path().join("a.txt"), "changed").unwrap();
        assert_eq!(m.verify(dir.path()).unwrap(), vec!["a.txt".to_string()]);
    }
}
