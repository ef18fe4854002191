use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Everything needed to rerun a command.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Value,
    pub seed: Option<u64>,
    pub version: String,
    pub threads: Option<usize>,
    pub inputs: Vec<InputDigest>,
    pub details: Value,
    pub duration_secs: f64,
}

pub struct ManifestBuilder {
    command: String,
    params: Value,
    seed: Option<u64>,
    threads: Option<usize>,
    inputs: Vec<InputDigest>,
    details: Value,
    started: Instant,
}

impl ManifestBuilder {
    pub fn new(command: &str, params: Value, seed: Option<u64>, threads: Option<usize>) -> Self {
        ManifestBuilder {
            command: command.to_string(),
            params,
            seed,
            threads,
            inputs: Vec::new(),
            details: Value::Null,
            started: Instant::now(),
        }
    }

    /// Reads `path`, records its digest and returns the bytes.
    pub fn input(&mut self, path: &Path) -> anyhow::Result<Vec<u8>> {
        let bytes = fs::read(path).map_err(netrand::Error::from).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(InputDigest {
            path: path.to_path_buf(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(bytes)
    }

    pub fn details(&mut self, details: Value) {
        self.details = details;
    }

    /// Writes the manifest next to `out` as `<out>.manifest.json`, or to
    /// stderr when there is no output file.
    pub fn finish(self, out: Option<&Path>) -> anyhow::Result<()> {
        let manifest = RunManifest {
            command: self.command,
            params: self.params,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            threads: self.threads,
            inputs: self.inputs,
            details: self.details,
            duration_secs: self.started.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_string_pretty(&manifest)?;
        match out {
            Some(path) => {
                let mut name = path.as_os_str().to_owned();
                name.push(".manifest.json");
                fs::write(PathBuf::from(name), text + "\n").map_err(netrand::Error::from)?;
            }
            None => eprintln!("{text}"),
        }
        Ok(())
    }
}
