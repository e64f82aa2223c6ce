//! Run directory writers. Numbers use Rust's shortest round-trip formatting
//! so reruns with the same inputs produce byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub struct RunDir {
    root: PathBuf,
}

impl RunDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|source| CliError::Io {
            path: root.to_path_buf(),
            source,
        })?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        fs::write(&path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }

    pub fn write_toml<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let text = toml::to_string(value).map_err(|e| CliError::Config(e.to_string()))?;
        self.write_text(name, &text)
    }

    /// Writes a CSV table with a header row; every row must match the header
    /// length.
    pub fn write_csv<I>(&self, name: &str, header: &[String], rows: I) -> Result<PathBuf, CliError>
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        let path = self.path(name);
        let err = |source| CliError::Csv {
            path: path.clone(),
            source,
        };
        let mut w = csv::Writer::from_path(&path).map_err(err)?;
        w.write_record(header).map_err(err)?;
        for row in rows {
            w.write_record(row.iter().map(|x| x.to_string()))
                .map_err(err)?;
        }
        w.flush().map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        Ok(path)
    }

    /// Writes the resolved configuration and a manifest tying the outputs to
    /// it. No timestamps are recorded.
    pub fn write_provenance(&self, command: &str, cfg: &RunConfig) -> Result<(), CliError> {
        let text = cfg.to_toml()?;
        self.write_text("config.toml", &text)?;
        let manifest = Manifest {
            command: command.to_string(),
            config_sha256: hex::encode(Sha256::digest(text.as_bytes())),
            seed: cfg.seed,
            scenario: cfg.scenario.map(|s| s.name().to_string()),
            version: env!("CARGO_PKG_VERSION").to_string(),
        };
        self.write_toml("manifest.toml", &manifest)?;
        Ok(())
    }
}

#[derive(Serialize)]
struct Manifest {
    command: String,
    config_sha256: String,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    scenario: Option<String>,
    version: String,
}
