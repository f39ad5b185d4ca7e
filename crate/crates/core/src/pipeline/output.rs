//! Output directory handling: JSON/CSV writers that record every file with
//! its SHA-256, stage timings, check records and the run manifest.

use crate::error::Error;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Version string written into every manifest.
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One check outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: String,
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl CheckRecord {
    /// Passes when `value <= limit`.
    pub fn at_most(suite: &str, name: &str, value: f64, limit: f64) -> Self {
        Self { suite: suite.into(), name: name.into(), value, limit, pass: value <= limit }
    }

    /// Passes when `value > limit`.
    pub fn above(suite: &str, name: &str, value: f64, limit: f64) -> Self {
        Self { suite: suite.into(), name: name.into(), value, limit, pass: value > limit }
    }

    /// A boolean condition recorded as `1`/`0`.
    pub fn holds(suite: &str, name: &str, ok: bool) -> Self {
        Self { suite: suite.into(), name: name.into(), value: f64::from(u8::from(ok)), limit: 1.0, pass: ok }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

/// Manifest of one command invocation. It is the only output holding
/// wall-clock data, so it is the only file that differs between reruns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub version: String,
    pub stages: Vec<StageRecord>,
    pub outputs: Vec<FileRecord>,
    pub checks: Vec<CheckRecord>,
    pub notes: Vec<String>,
    pub passed: bool,
}

/// Collects outputs of one command.
pub struct Outputs {
    pub dir: PathBuf,
    pub files: Vec<FileRecord>,
    pub stages: Vec<StageRecord>,
    pub checks: Vec<CheckRecord>,
    pub notes: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self, Error> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new(), stages: Vec::new(), checks: Vec::new(), notes: Vec::new() })
    }

    fn record(&mut self, name: &str, bytes: &[u8]) -> Result<(), Error> {
        std::fs::write(self.dir.join(name), bytes)?;
        self.files.retain(|f| f.path != name);
        self.files.push(FileRecord { path: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    /// Writes pretty-printed JSON.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Error> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.record(name, &bytes)
    }

    /// Writes a numeric CSV table.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r.iter().map(|v| format!("{v:e}")))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.record(name, &bytes)
    }

    /// Times a stage.
    pub fn stage<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T, Error>) -> Result<T, Error> {
        let start = Instant::now();
        let out = f(self);
        self.stages.push(StageRecord { name: name.to_string(), seconds: start.elapsed().as_secs_f64() });
        out
    }

    pub fn check(&mut self, c: CheckRecord) {
        self.checks.push(c);
    }

    pub fn note(&mut self, n: impl Into<String>) {
        self.notes.push(n.into());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Writes `manifest.json` and returns it.
    pub fn finish(mut self, command: &str, config_hash: &str) -> Result<RunManifest, Error> {
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = RunManifest {
            command: command.to_string(),
            config_hash: config_hash.to_string(),
            version: ARTIFACT_VERSION.to_string(),
            stages: self.stages.clone(),
            outputs: self.files.clone(),
            checks: self.checks.clone(),
            notes: self.notes.clone(),
            passed: self.passed(),
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        std::fs::write(self.dir.join("manifest.json"), bytes)?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn files_are_hashed_and_listed() {
        let dir = tempfile::tempdir().unwrap();
        let mut o = Outputs::new(dir.path()).unwrap();
        o.csv("a.csv", &["x", "y"], &[vec![1.0, 0.5], vec![2.0, -0.25]]).unwrap();
        o.json("b.json", &serde_json::json!({"k": 1})).unwrap();
        let text = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
        assert_eq!(text, "x,y\n1e0,5e-1\n2e0,-2.5e-1\n");
        let m = o.finish("test", "abc").unwrap();
        assert_eq!(m.outputs.len(), 2);
        assert_eq!(m.outputs[0].sha256, sha256_hex(text.as_bytes()));
        assert!(m.passed);
    }
}
