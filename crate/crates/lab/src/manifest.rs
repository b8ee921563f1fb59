//! Self-describing run directories: a copy of the configuration and a
//! manifest hashing every output file.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::LabError;

pub const CONFIG_COPY: &str = "config.json";
pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_path: Option<String>,
    pub config_hash: String,
    pub started: String,
    pub finished: String,
    pub output_dir: String,
    pub status: String,
    pub exit_code: u8,
    pub files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// An output directory being filled by one command.
#[derive(Debug)]
pub struct RunDir {
    root: PathBuf,
    command: String,
    config_path: Option<PathBuf>,
    config_hash: String,
    started: String,
}

impl RunDir {
    /// Creates `root` and stores `config_text` as its configuration copy.
    pub fn create(root: &Path, command: &str, config_text: &str, config_path: Option<&Path>) -> Result<Self, LabError> {
        fs::create_dir_all(root).map_err(|e| LabError::io(root, e))?;
        let copy = root.join(CONFIG_COPY);
        fs::write(&copy, config_text).map_err(|e| LabError::io(&copy, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            command: command.into(),
            config_path: config_path.map(Path::to_path_buf),
            config_hash: sha256_hex(config_text.as_bytes()),
            started: now(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn subdir(&self, name: &str) -> Result<PathBuf, LabError> {
        let p = self.root.join(name);
        fs::create_dir_all(&p).map_err(|e| LabError::io(&p, e))?;
        Ok(p)
    }

    /// Hashes every file under the directory and writes the manifest.
    pub fn finish(self, status: &str, exit_code: u8) -> Result<RunManifest, LabError> {
        let mut files = Vec::new();
        collect(&self.root, &self.root, &mut files)?;
        files.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: self.command,
            config_path: self.config_path.map(|p| p.display().to_string()),
            config_hash: self.config_hash,
            started: self.started,
            finished: now(),
            output_dir: self.root.display().to_string(),
            status: status.into(),
            exit_code,
            files,
        };
        let path = self.root.join(MANIFEST);
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| LabError::io(&path, e))?;
        Ok(manifest)
    }
}

fn collect(root: &Path, dir: &Path, out: &mut Vec<FileEntry>) -> Result<(), LabError> {
    for entry in fs::read_dir(dir).map_err(|e| LabError::io(dir, e))? {
        let path = entry.map_err(|e| LabError::io(dir, e))?.path();
        if path.is_dir() {
            collect(root, &path, out)?;
            continue;
        }
        let rel = path.strip_prefix(root).expect("inside the run directory");
        if rel == Path::new(MANIFEST) {
            continue;
        }
        let bytes = fs::read(&path).map_err(|e| LabError::io(&path, e))?;
        out.push(FileEntry {
            path: rel.to_string_lossy().replace('\\', "/"),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lists_and_hashes_outputs() {
        let dir = tempfile::tempdir().unwrap();
        let run = RunDir::create(dir.path(), "test", "{}", None).unwrap();
        fs::write(run.path("a.csv"), "x\n").unwrap();
        fs::write(run.subdir("snapshots").unwrap().join("s.bin"), [1u8, 2]).unwrap();
        let m = run.finish("completed", 0).unwrap();
        let names: Vec<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(names, ["a.csv", "config.json", "snapshots/s.bin"]);
        assert_eq!(m.config_hash, sha256_hex(b"{}"));
        assert_eq!(m.files[1].sha256, m.config_hash);
        let stored: RunManifest = serde_json::from_str(&fs::read_to_string(dir.path().join(MANIFEST)).unwrap()).unwrap();
        assert_eq!(stored, m);
    }
}
