//! Experiment configuration and the `key=value` config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ppd_core::svm::{GridSpec, SmoOptions};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("stego directory and embedding rate are mutually exclusive")]
    ConflictingStegoSource,
    #[error("either a stego directory or an embedding rate is required")]
    MissingStegoSource,
    #[error("missing required setting `{0}`")]
    Missing(&'static str),
    #[error("invalid value for `{key}`: {msg}")]
    Invalid { key: String, msg: String },
    #[error("config line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// Where stego samples come from.
#[derive(Debug, Clone, PartialEq)]
pub enum StegoSource {
    /// Existing stego images (paired with covers by file name when names match).
    Dir(PathBuf),
    /// Synthesised from every cover by LSB matching at this rate.
    Embed { rate: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub cover_dir: PathBuf,
    pub stego: StegoSource,
    pub levels: u32,
    pub master_seed: u64,
    /// Fraction of each class used for training.
    pub train_fraction: f64,
    pub grid: GridSpec,
    pub smo: SmoOptions,
    pub output_dir: Option<PathBuf>,
}

/// Settings collected from a config file and/or flags before validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigBuilder {
    pub cover_dir: Option<PathBuf>,
    pub stego_dir: Option<PathBuf>,
    pub embed_rate: Option<f64>,
    pub levels: Option<u32>,
    pub seed: Option<u64>,
    pub split: Option<f64>,
    pub folds: Option<usize>,
    pub output_dir: Option<PathBuf>,
}

fn invalid(key: &str, msg: impl ToString) -> ConfigError {
    ConfigError::Invalid { key: key.into(), msg: msg.to_string() }
}

impl ConfigBuilder {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line: i + 1, msg: "expected key=value".into() })?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut b = ConfigBuilder::default();
        for (k, v) in map {
            match k.as_str() {
                "cover_dir" => b.cover_dir = Some(v.into()),
                "stego_dir" => b.stego_dir = Some(v.into()),
                "embed_rate" => b.embed_rate = Some(v.parse().map_err(|e| invalid(&k, e))?),
                "s" | "S" | "levels" => b.levels = Some(v.parse().map_err(|e| invalid(&k, e))?),
                "seed" => b.seed = Some(v.parse().map_err(|e| invalid(&k, e))?),
                "split" => b.split = Some(v.parse().map_err(|e| invalid(&k, e))?),
                "folds" => b.folds = Some(v.parse().map_err(|e| invalid(&k, e))?),
                "out" | "output_dir" => b.output_dir = Some(v.into()),
                _ => return Err(invalid(&k, "unknown setting")),
            }
        }
        Ok(b)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Values set in `other` win.
    pub fn overlay(mut self, other: ConfigBuilder) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(cover_dir, stego_dir, embed_rate, levels, seed, split, folds, output_dir);
        self
    }

    pub fn build(self) -> Result<ExperimentConfig, ConfigError> {
        let stego = match (self.stego_dir, self.embed_rate) {
            (Some(_), Some(_)) => return Err(ConfigError::ConflictingStegoSource),
            (None, None) => return Err(ConfigError::MissingStegoSource),
            (Some(d), None) => StegoSource::Dir(d),
            (None, Some(rate)) => {
                if !(rate > 0.0 && rate <= 1.0) {
                    return Err(invalid("embed_rate", "must be in (0, 1]"));
                }
                StegoSource::Embed { rate }
            }
        };
        let levels = self.levels.unwrap_or(4);
        if !(2..=16).contains(&levels) {
            return Err(invalid("s", "must be in [2, 16]"));
        }
        let train_fraction = self.split.unwrap_or(0.5);
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(invalid("split", "must be in (0, 1)"));
        }
        let mut grid = GridSpec::standard();
        if let Some(folds) = self.folds {
            if folds < 2 {
                return Err(invalid("folds", "must be at least 2"));
            }
            grid.folds = folds;
        }
        Ok(ExperimentConfig {
            cover_dir: self.cover_dir.ok_or(ConfigError::Missing("cover_dir"))?,
            stego,
            levels,
            master_seed: self.seed.ok_or(ConfigError::Missing("seed"))?,
            train_fraction,
            grid,
            smo: SmoOptions::default(),
            output_dir: self.output_dir,
        })
    }
}
