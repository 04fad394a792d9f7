//! Run manifest: what was run, how long each stage took, and what was written.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Serialize)]
pub struct StageTime {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

/// A requested check that missed its tolerance.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Failure {
    pub stage: String,
    pub check: String,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub mode: String,
    pub seed: u64,
    pub config_sha256: String,
    pub stages: Vec<StageTime>,
    pub files: Vec<FileEntry>,
    pub notes: Vec<String>,
    pub failures: Vec<Failure>,
    pub status: String,
}

impl RunManifest {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn file(&self, name: &str) -> Option<&FileEntry> {
        self.files.iter().find(|f| f.name == name)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes output files and records their checksums in order.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileEntry>,
    stages: Vec<StageTime>,
}

impl OutputDir {
    pub fn create(root: &Path) -> std::io::Result<Self> {
        std::fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), files: Vec::new(), stages: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, contents: &str) -> std::io::Result<()> {
        std::fs::write(self.root.join(name), contents)?;
        self.files.retain(|f| f.name != name);
        self.files.push(FileEntry { name: name.to_string(), bytes: contents.len(), sha256: sha256_hex(contents.as_bytes()) });
        Ok(())
    }

    /// Runs `f`, recording its wall time under `stage`.
    pub fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> T) -> T {
        let start = Instant::now();
        let out = f(self);
        self.stages.push(StageTime { stage: stage.to_string(), seconds: start.elapsed().as_secs_f64() });
        out
    }

    pub fn into_parts(self) -> (Vec<FileEntry>, Vec<StageTime>) {
        (self.files, self.stages)
    }
}
