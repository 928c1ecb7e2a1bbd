//! `manifest.json`: one entry per stage run in an output directory,
//! rewritten atomically after each successful stage.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const FILE: &str = "manifest.json";

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub rng: String,
    pub stages: BTreeMap<String, StageRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StageRecord {
    pub seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub config: Value,
    pub counts: BTreeMap<String, usize>,
    pub provider_calls: BTreeMap<String, u64>,
}

impl RunManifest {
    /// Existing manifest from `dir`, or a fresh one.
    pub fn load_or_new(dir: &Path) -> RunManifest {
        let fresh = RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            rng: wdaug_core::rng::RNG_NAME.into(),
            stages: BTreeMap::new(),
        };
        match std::fs::read_to_string(dir.join(FILE)) {
            Ok(raw) => match serde_json::from_str::<RunManifest>(&raw) {
                Ok(mut m) => {
                    m.version = fresh.version;
                    m
                }
                Err(e) => {
                    log::warn!("ignoring unreadable manifest: {e}");
                    fresh
                }
            },
            Err(_) => fresh,
        }
    }

    pub fn record(&mut self, stage: &str, record: StageRecord) {
        self.stages.insert(stage.to_string(), record);
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let json = serde_json::to_vec_pretty(self).expect("manifest serializes");
        write_atomic(&dir.join(FILE), &json)
    }
}

/// Write to a sibling temp file, then rename over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stages_accumulate_across_runs() {
        let dir = tempfile::tempdir().unwrap();
        let rec = |n| StageRecord {
            seed: n,
            started_at: "t0".into(),
            finished_at: "t1".into(),
            config: Value::Null,
            counts: BTreeMap::new(),
            provider_calls: BTreeMap::new(),
        };
        let mut m = RunManifest::load_or_new(dir.path());
        m.record("plan", rec(1));
        m.write(dir.path()).unwrap();
        let mut m = RunManifest::load_or_new(dir.path());
        m.record("split", rec(2));
        m.write(dir.path()).unwrap();
        let m = RunManifest::load_or_new(dir.path());
        assert_eq!(m.stages.keys().collect::<Vec<_>>(), ["plan", "split"]);
        assert!(!dir.path().join("manifest.json.tmp").exists());
    }
}
