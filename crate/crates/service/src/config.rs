use std::path::{Path, PathBuf};

use figment::providers::{Env, Format, Serialized, Toml};
use figment::Figment;
use serde::{Deserialize, Serialize};

/// Service settings. Every field can be overridden by an environment
/// variable named `QGEN_<FIELD>` (for example `QGEN_BEAM_WIDTH=3`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceConfig {
    pub qg_checkpoint: Option<PathBuf>,
    pub filter_checkpoint: Option<PathBuf>,
    /// Base URL of an external annotation service; the built-in heuristic
    /// annotator is used when unset.
    pub annotator_url: Option<String>,
    /// Overrides the beam width stored in the question generator checkpoint.
    pub beam_width: Option<usize>,
    pub intra_threshold: f64,
    pub inter_threshold: f64,
    /// Overrides the answerability threshold stored in the filter checkpoint.
    pub threshold: Option<f64>,
    /// Directory for session files; sessions live only in memory when unset.
    pub session_dir: Option<PathBuf>,
    pub host: String,
    pub port: u16,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            qg_checkpoint: None,
            filter_checkpoint: None,
            annotator_url: None,
            beam_width: None,
            intra_threshold: 0.0,
            inter_threshold: 0.0,
            threshold: None,
            session_dir: Some(PathBuf::from("sessions")),
            host: "127.0.0.1".into(),
            port: 8080,
        }
    }
}

impl ServiceConfig {
    /// Defaults, then the TOML file (if any), then `QGEN_*` variables.
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let mut fig = Figment::from(Serialized::defaults(Self::default()));
        if let Some(p) = path {
            if !p.exists() {
                anyhow::bail!("config file {} not found", p.display());
            }
            fig = fig.merge(Toml::file(p));
        }
        let cfg: Self = fig.merge(Env::prefixed("QGEN_")).extract()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        for (name, v) in [("intra_threshold", self.intra_threshold), ("inter_threshold", self.inter_threshold)] {
            if !(0.0..=1.0).contains(&v) {
                anyhow::bail!("{name} must be in [0, 1], got {v}");
            }
        }
        if self.beam_width == Some(0) {
            anyhow::bail!("beam_width must be positive");
        }
        if self.threshold.is_some_and(f64::is_nan) {
            anyhow::bail!("threshold must be a number");
        }
        Ok(())
    }
}
