use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use crate::config::{Config, Manifest};

/// Collects the files a run writes, then the manifest describing them.
pub struct Outputs {
    dir: PathBuf,
    command: String,
    hash: String,
    files: Vec<String>,
}

impl Outputs {
    pub fn new(config: &Config, command: &str) -> anyhow::Result<Self> {
        let dir = config.out().to_path_buf();
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir,
            command: command.to_string(),
            hash: config.hash(command),
            files: Vec::new(),
        })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Record a file written elsewhere, e.g. a table in the cache directory.
    pub fn record(&mut self, path: &Path) {
        let shown = path.strip_prefix(&self.dir).unwrap_or(path);
        self.files.push(shown.display().to_string());
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// CSV with a `# config_hash=` comment line ahead of the header.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> anyhow::Result<()> {
        let path = self.path(name);
        let mut file = BufWriter::new(
            File::create(&path).with_context(|| format!("writing {}", path.display()))?,
        );
        writeln!(file, "# config_hash={}", self.hash)?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(header)?;
        for row in rows {
            writer.write_record(row)?;
        }
        writer.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn finish(self, config: &Config) -> anyhow::Result<PathBuf> {
        let manifest = Manifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: self.hash,
            config: config.clone(),
            outputs: self.files,
        };
        let path = self.dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn num(v: f64) -> String {
    format!("{v}")
}
