//! Artifact writing with SHA-256 checksums and the JSON run manifest.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const MANIFEST_NAME: &str = "manifest.json";

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "MARKETFLUX_OUT";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub library_version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config: RunConfig,
    pub inputs: Vec<Artifact>,
    pub artifacts: Vec<Artifact>,
}

impl Manifest {
    pub fn read(path: &Path) -> CliResult<Manifest> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input {
            message: format!("cannot read manifest: {e}"),
            path: Some(path.into()),
            line: None,
        })?;
        serde_json::from_str(&text).map_err(|e| CliError::Input {
            message: format!("invalid manifest: {e}"),
            path: Some(path.into()),
            line: Some(e.line() as u64),
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_artifact(path: &Path) -> CliResult<Artifact> {
    let bytes = std::fs::read(path)?;
    Ok(Artifact { path: path.display().to_string(), sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 })
}

/// Shortest decimal form that parses back to the same value (at most 17 significant digits).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Output directory collecting the artifacts of one run.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    artifacts: Vec<Artifact>,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root)
            .map_err(|e| CliError::Input { message: format!("cannot create output directory: {e}"), path: Some(root.into()), line: None })?;
        Ok(Self { root: root.to_path_buf(), artifacts: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn artifacts(&self) -> &[Artifact] {
        &self.artifacts
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> CliResult<()> {
        std::fs::write(self.root.join(name), bytes)?;
        self.artifacts.push(Artifact { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(())
    }

    pub fn write_csv<I>(&mut self, name: &str, header: &[&str], rows: I) -> CliResult<()>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|v| fmt_f64(*v)))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
        self.write_bytes(name, &bytes)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    /// Writes the manifest; it lists every artifact but not itself.
    pub fn finish(self, config: &RunConfig, inputs: Vec<Artifact>) -> CliResult<Manifest> {
        let manifest = Manifest {
            tool: "marketflux".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            library_version: marketflux::VERSION.into(),
            command: config.name().into(),
            seed: config.seed(),
            config: config.clone(),
            inputs,
            artifacts: self.artifacts,
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        std::fs::write(self.root.join(MANIFEST_NAME), bytes)?;
        Ok(manifest)
    }
}
