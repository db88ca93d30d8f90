//! JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use obfubench_core::Regime;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::obfuscate::templates::DEFAULT_EXEMPLAR_COUNT;
use crate::obfuscate::ProviderConfig;

pub const PYTHON_ENV: &str = "OBFUBENCH_PYTHON";
pub const DEFAULT_INTERPRETER: &str = "python3";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

fn default_dataset() -> PathBuf {
    "dataset".into()
}

fn default_regimes() -> Vec<Regime> {
    vec![Regime::ZeroShot, Regime::FewShot]
}

fn default_workers() -> usize {
    4
}

fn default_cache_dir() -> PathBuf {
    "cache".into()
}

fn default_out_dir() -> PathBuf {
    "runs".into()
}

fn default_exemplar_count() -> usize {
    DEFAULT_EXEMPLAR_COUNT
}

/// Every field has a default, so `{}` is a valid configuration. Relative
/// paths in a file are resolved against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_dataset")]
    pub dataset: PathBuf,
    #[serde(default)]
    pub providers: Vec<ProviderConfig>,
    #[serde(default = "default_regimes")]
    pub regimes: Vec<Regime>,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_cache_dir")]
    pub cache_dir: PathBuf,
    /// Falls back to `$OBFUBENCH_PYTHON`, then `python3`.
    #[serde(default)]
    pub interpreter: Option<String>,
    #[serde(default)]
    pub seed: u64,
    /// Serve responses from the cache only.
    #[serde(default)]
    pub offline: bool,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// Prompt template directory; the built-in templates when absent.
    #[serde(default)]
    pub template_dir: Option<PathBuf>,
    #[serde(default = "default_exemplar_count")]
    pub exemplar_count: usize,
    /// Absolute tolerance for float results; exact comparison when absent.
    #[serde(default)]
    pub float_tolerance: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.into(),
            source,
        })?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|source| ConfigError::Json {
            path: path.into(),
            source,
        })?;
        if let Some(base) = path.parent() {
            for p in [&mut cfg.dataset, &mut cfg.cache_dir, &mut cfg.out_dir] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
            if let Some(t) = cfg.template_dir.as_mut().filter(|t| t.is_relative()) {
                *t = base.join(&*t);
            }
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        if self.workers == 0 {
            return Err(ConfigError::Invalid("workers must be at least 1".into()));
        }
        if self.regimes.is_empty() {
            return Err(ConfigError::Invalid("no regimes selected".into()));
        }
        if matches!(self.float_tolerance, Some(t) if !(t.is_finite() && t >= 0.0)) {
            return Err(ConfigError::Invalid("float_tolerance must be finite and non-negative".into()));
        }
        let mut names: Vec<&str> = self.providers.iter().map(|p| p.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(ConfigError::Invalid(format!("provider {:?} is listed twice", w[0])));
        }
        Ok(())
    }

    pub fn provider(&self, name: &str) -> Option<&ProviderConfig> {
        self.providers.iter().find(|p| p.name == name || p.model == name)
    }

    pub fn interpreter(&self) -> String {
        self.interpreter
            .clone()
            .or_else(|| std::env::var(PYTHON_ENV).ok().filter(|s| !s.is_empty()))
            .unwrap_or_else(|| DEFAULT_INTERPRETER.into())
    }
}
