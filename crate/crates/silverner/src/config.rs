//! Build configuration: an optional TOML file overlaid by command-line
//! flags (flags win). The effective configuration is written next to the
//! output for reproducibility.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Default per-request timeout of the auxiliary tagger.
pub const DEFAULT_AUX_TIMEOUT_SECS: u64 = 60;

/// Every setting optional; used for both the config file and the flags.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub dump: Option<PathBuf>,
    pub catalog: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub aux_cmd: Option<String>,
    pub aux_timeout_secs: Option<u64>,
    pub with_origin: Option<bool>,
    pub blocklist: Option<PathBuf>,
    pub abbrev: Option<PathBuf>,
    pub global_match: Option<bool>,
}

impl PartialConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Read(path.to_path_buf(), e))?;
        toml::from_str(&text).map_err(|e| ConfigError::Parse(path.to_path_buf(), e.to_string()))
    }

    /// `self` with every setting present in `over` replaced.
    pub fn overlay(self, over: PartialConfig) -> PartialConfig {
        PartialConfig {
            dump: over.dump.or(self.dump),
            catalog: over.catalog.or(self.catalog),
            out: over.out.or(self.out),
            workers: over.workers.or(self.workers),
            aux_cmd: over.aux_cmd.or(self.aux_cmd),
            aux_timeout_secs: over.aux_timeout_secs.or(self.aux_timeout_secs),
            with_origin: over.with_origin.or(self.with_origin),
            blocklist: over.blocklist.or(self.blocklist),
            abbrev: over.abbrev.or(self.abbrev),
            global_match: over.global_match.or(self.global_match),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading config {0}: {1}")]
    Read(PathBuf, std::io::Error),
    #[error("parsing config {0}: {1}")]
    Parse(PathBuf, String),
    #[error("missing required setting `{0}`")]
    Missing(&'static str),
    #[error("`workers` must be at least 1")]
    NoWorkers,
    #[error("`aux_timeout_secs` must be at least 1")]
    NoTimeout,
    #[error("`aux_cmd` is empty")]
    EmptyAuxCommand,
    #[error("{what} {path} is not a readable file")]
    Unreadable { what: &'static str, path: PathBuf },
    #[error("output directory {0} does not exist")]
    NoOutputDir(PathBuf),
}

/// Fully resolved build settings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub dump: PathBuf,
    pub catalog: PathBuf,
    pub out: PathBuf,
    pub workers: usize,
    pub aux_cmd: Option<String>,
    pub aux_timeout_secs: u64,
    pub with_origin: bool,
    pub blocklist: Option<PathBuf>,
    pub abbrev: Option<PathBuf>,
    pub global_match: bool,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl PipelineConfig {
    /// Fills defaults and checks required settings; does not touch the
    /// file system.
    pub fn resolve(p: PartialConfig) -> Result<Self, ConfigError> {
        let cfg = PipelineConfig {
            dump: p.dump.ok_or(ConfigError::Missing("dump"))?,
            catalog: p.catalog.ok_or(ConfigError::Missing("catalog"))?,
            out: p.out.ok_or(ConfigError::Missing("out"))?,
            workers: p.workers.unwrap_or_else(default_workers),
            aux_cmd: p.aux_cmd,
            aux_timeout_secs: p.aux_timeout_secs.unwrap_or(DEFAULT_AUX_TIMEOUT_SECS),
            with_origin: p.with_origin.unwrap_or(false),
            blocklist: p.blocklist,
            abbrev: p.abbrev,
            global_match: p.global_match.unwrap_or(false),
        };
        if cfg.workers == 0 {
            return Err(ConfigError::NoWorkers);
        }
        if cfg.aux_timeout_secs == 0 {
            return Err(ConfigError::NoTimeout);
        }
        if cfg.aux_cmd.as_deref().is_some_and(|c| c.trim().is_empty()) {
            return Err(ConfigError::EmptyAuxCommand);
        }
        Ok(cfg)
    }

    /// Checks that inputs are readable files and the output directory
    /// exists.
    pub fn validate_paths(&self) -> Result<(), ConfigError> {
        let inputs = [
            ("dump", Some(&self.dump)),
            ("catalog", Some(&self.catalog)),
            ("blocklist", self.blocklist.as_ref()),
            ("abbreviation list", self.abbrev.as_ref()),
        ];
        for (what, path) in inputs {
            if let Some(path) = path {
                if !path.is_file() || std::fs::File::open(path).is_err() {
                    return Err(ConfigError::Unreadable {
                        what,
                        path: path.clone(),
                    });
                }
            }
        }
        let dir = match self.out.parent() {
            Some(d) if !d.as_os_str().is_empty() => d,
            _ => Path::new("."),
        };
        if !dir.is_dir() {
            return Err(ConfigError::NoOutputDir(dir.to_path_buf()));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes to TOML")
    }
}
