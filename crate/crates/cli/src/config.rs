//! Experiment configuration: file contents overlaid with command-line flags.

use std::path::{Path, PathBuf};

use homog_core::{ClassKind, ClassSpec, LinearRamp, Parameterization, Schedule};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Rejected configuration. Maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn invalid(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassConfig {
    pub kind: Option<ClassKind>,
    pub n: Option<usize>,
    pub p_e: Option<f64>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub margin: f64,
}

impl ClassConfig {
    pub fn spec(&self) -> anyhow::Result<ClassSpec> {
        let kind = self.kind.ok_or_else(|| invalid("class kind is required"))?;
        let n = self.n.ok_or_else(|| invalid("n is required"))?;
        let need_m = || self.m.ok_or_else(|| invalid(format!("{kind} needs m")));
        let spec = match kind {
            ClassKind::MaxCutEr => {
                let p_e = self.p_e.ok_or_else(|| invalid("max-cut-er needs p_e"))?;
                ClassSpec::max_cut_er(n, p_e)
            }
            ClassKind::MaxE3Lin2 => ClassSpec::max_e3lin2(n, need_m()?),
            ClassKind::MaxKXor => ClassSpec::max_kxor(n, need_m()?, self.k.unwrap_or(3)),
            ClassKind::RandKSat => ClassSpec::rand_ksat(n, need_m()?, self.k.unwrap_or(3)),
            ClassKind::HammingWeight => ClassSpec::hamming_weight(n),
        };
        let spec = spec.map_err(|e| invalid(e.to_string()))?;
        if self.margin != 0.0 {
            return spec
                .with_margin(self.margin)
                .map_err(|e| invalid(e.to_string()));
        }
        Ok(spec)
    }
}

/// Every knob any subcommand reads. Subcommands ignore fields they do not use.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Config {
    pub class: ClassConfig,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub p: Option<usize>,
    pub parameterization: Option<Parameterization>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    /// Worker threads; 0 uses every core.
    pub workers: Option<usize>,
    /// Optimizer starting points, drawn with `seed`.
    pub starts: Option<usize>,
    pub normalize: bool,
    /// Instances drawn with seeds `seed, seed+1, ...`.
    pub instances: Option<usize>,
    pub schedule: Option<Schedule>,
    pub ramps: Vec<LinearRamp>,
    /// Optimization result whose schedule `evaluate` should use.
    pub result: Option<PathBuf>,
    pub grid: Option<usize>,
    pub gamma_range: Option<(f64, f64)>,
    pub beta_range: Option<(f64, f64)>,
    pub prefix: Option<Schedule>,
    pub cprimes: Vec<usize>,
}

/// What a run writes next to its outputs. Also accepted as `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub config: Config,
    pub outputs: Vec<String>,
}

impl Config {
    /// Read a TOML or JSON config, or a manifest from an earlier run.
    pub fn load(path: &Path, command: &str) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        let value: serde_json::Value = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?
        } else {
            serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))?
        };
        if value.get("command").is_some() {
            let manifest: Manifest = serde_json::from_value(value)
                .map_err(|e| invalid(format!("{}: {e}", path.display())))?;
            if manifest.command != command {
                return Err(invalid(format!(
                    "manifest is for `{}`, not `{command}`",
                    manifest.command
                )));
            }
            return Ok(manifest.config);
        }
        serde_json::from_value(value).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }

    /// Fill every default so the manifest records exactly what ran.
    pub fn resolve(mut self, command: &str) -> anyhow::Result<Self> {
        self.out.get_or_insert_with(|| PathBuf::from("homog-out"));
        self.p.get_or_insert(1);
        self.parameterization
            .get_or_insert(Parameterization::Full2p);
        self.tol.get_or_insert(1e-6);
        self.max_iter.get_or_insert(500);
        self.workers.get_or_insert(0);
        self.starts.get_or_insert(1);
        self.instances.get_or_insert(10);
        self.grid.get_or_insert(30);
        self.gamma_range.get_or_insert((0.0, std::f64::consts::PI));
        self.beta_range.get_or_insert((0.0, std::f64::consts::PI));
        if command == "overlap-sweep" && self.ramps.is_empty() {
            self.ramps = vec![
                LinearRamp::new(0.05, 0.15, 0.6, 0.1),
                LinearRamp::new(0.15, 0.45, 0.6, 0.1),
                LinearRamp::new(0.3, 0.9, 0.6, 0.1),
            ];
        }
        self.class.spec()?;
        if self.p() == 0 {
            return Err(invalid("p must be at least 1"));
        }
        if self.tol().is_nan() || self.tol() <= 0.0 {
            return Err(invalid("tol must be positive"));
        }
        if self.starts() == 0 || self.instances() == 0 || self.grid() == 0 {
            return Err(invalid("starts, instances and grid must be positive"));
        }
        for s in self.schedule.iter().chain(&self.prefix) {
            s.validate().map_err(|e| invalid(e.to_string()))?;
        }
        if self.ramps.iter().any(|r| !r.is_finite()) {
            return Err(invalid("ramp endpoints must be finite"));
        }
        Ok(self)
    }

    pub fn spec(&self) -> anyhow::Result<ClassSpec> {
        self.class.spec()
    }

    pub fn out(&self) -> &Path {
        self.out.as_deref().expect("resolved")
    }

    pub fn p(&self) -> usize {
        self.p.expect("resolved")
    }

    pub fn parameterization(&self) -> Parameterization {
        self.parameterization.expect("resolved")
    }

    pub fn tol(&self) -> f64 {
        self.tol.expect("resolved")
    }

    pub fn max_iter(&self) -> usize {
        self.max_iter.expect("resolved")
    }

    pub fn workers(&self) -> usize {
        self.workers.expect("resolved")
    }

    pub fn starts(&self) -> usize {
        self.starts.expect("resolved")
    }

    pub fn instances(&self) -> usize {
        self.instances.expect("resolved")
    }

    pub fn grid(&self) -> usize {
        self.grid.expect("resolved")
    }

    /// sha256 of the command and the resolved config, hex encoded.
    pub fn hash(&self, command: &str) -> String {
        let body = serde_json::to_string(&(command, self)).expect("config serializes");
        hex::encode(Sha256::digest(body.as_bytes()))
    }
}
