//! Service configuration: a TOML file, then `MLTV_*` environment overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dialogue::DialogueConfig;
use crate::entities::DEFAULT_TITLE_THRESHOLD;
use crate::error::{Error, Result};
use crate::intent::DEFAULT_CONFIDENCE_THRESHOLD;
use crate::recsys::{DEFAULT_K, DEFAULT_MIN_SUPPORT};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Directory holding movies.csv, ratings.csv and optionally tags.csv.
    /// Unset means the bundled sample data.
    pub data_dir: Option<PathBuf>,
    /// Trained intent model; unset means train on `corpus` at startup.
    pub intent_model: Option<PathBuf>,
    /// Labeled utterances; unset means the bundled corpus.
    pub corpus: Option<PathBuf>,
    pub bind: String,
    pub page_size: usize,
    pub max_results: usize,
    pub k: usize,
    pub min_support: usize,
    pub confidence_threshold: f64,
    pub title_threshold: f64,
    pub session_timeout_s: u64,
    /// Secret mixed into per-session push tokens.
    pub token_secret: String,
    /// Per-client push queue length before the client is dropped.
    pub push_queue: usize,
}

impl Default for Config {
    fn default() -> Self {
        let dialogue = DialogueConfig::default();
        Config {
            data_dir: None,
            intent_model: None,
            corpus: None,
            bind: "127.0.0.1:8080".into(),
            page_size: dialogue.page_size,
            max_results: dialogue.max_results,
            k: DEFAULT_K,
            min_support: DEFAULT_MIN_SUPPORT,
            confidence_threshold: DEFAULT_CONFIDENCE_THRESHOLD,
            title_threshold: DEFAULT_TITLE_THRESHOLD,
            session_timeout_s: dialogue.session_timeout_s,
            token_secret: "mltv-dev-secret".into(),
            push_queue: 64,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path` when given (defaults otherwise) and applies the
    /// process environment.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                Config::from_toml(&text)?
            }
            None => Config::default(),
        };
        cfg.apply_env(std::env::vars())?;
        Ok(cfg)
    }

    /// Applies `MLTV_<FIELD>` overrides, e.g. `MLTV_PAGE_SIZE=12`.
    pub fn apply_env(&mut self, vars: impl IntoIterator<Item = (String, String)>) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
        }
        for (key, value) in vars {
            let Some(field) = key.strip_prefix("MLTV_") else {
                continue;
            };
            match field {
                "DATA_DIR" => self.data_dir = Some(value.into()),
                "INTENT_MODEL" => self.intent_model = Some(value.into()),
                "CORPUS" => self.corpus = Some(value.into()),
                "BIND" => self.bind = value,
                "PAGE_SIZE" => self.page_size = num(&key, &value)?,
                "MAX_RESULTS" => self.max_results = num(&key, &value)?,
                "K" => self.k = num(&key, &value)?,
                "MIN_SUPPORT" => self.min_support = num(&key, &value)?,
                "CONFIDENCE_THRESHOLD" => self.confidence_threshold = num(&key, &value)?,
                "TITLE_THRESHOLD" => self.title_threshold = num(&key, &value)?,
                "SESSION_TIMEOUT_S" => self.session_timeout_s = num(&key, &value)?,
                "TOKEN_SECRET" => self.token_secret = value,
                "PUSH_QUEUE" => self.push_queue = num(&key, &value)?,
                // unrelated variables sharing the prefix (e.g. MLTV_LOG) are not ours
                _ => {}
            }
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.page_size == 0 {
            return bad("page_size must be at least 1");
        }
        if self.k == 0 {
            return bad("k must be at least 1");
        }
        if self.min_support == 0 {
            return bad("min_support must be at least 1");
        }
        if self.push_queue == 0 {
            return bad("push_queue must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.confidence_threshold) {
            return bad("confidence_threshold must be within [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.title_threshold) {
            return bad("title_threshold must be within [0, 1]");
        }
        Ok(())
    }

    pub fn dialogue(&self) -> DialogueConfig {
        DialogueConfig {
            page_size: self.page_size,
            session_timeout_s: self.session_timeout_s,
            max_results: self.max_results,
        }
    }
}
