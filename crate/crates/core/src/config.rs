//! TOML run configuration. Every key is optional and defaults to the
//! production setup; a file only needs the values it changes.
//!
//! ```toml
//! [grid]
//! dx = 0.015
//! dz = 0.015
//! dt = 2.5e-6
//! n_steps = 1800
//!
//! [source]
//! position = { row = 8, col = 128 }
//! f0 = 40000.0
//! delay = 100
//!
//! [receivers]
//! record_start = 400
//! positions = [{ row = 8, col = 16 }, { row = 8, col = 38 }]  # ...
//!
//! [scene]
//! width = 256
//! height = 256
//! max_objects = 10
//!
//! [output]
//! workers = 4
//! samples_per_shard = 100
//! ```

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::DatasetConfig;
use crate::scenegen::SceneConfig;
use crate::wavesim::{GridSpec, ReceiverArray, SourceSpec, N_RECEIVERS};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{}: {source}", .path.display())]
    Read {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}[{section}]: {message}", line_prefix(*.line))]
    Invalid {
        section: &'static str,
        line: Option<usize>,
        message: String,
    },
}

fn line_prefix(line: Option<usize>) -> String {
    line.map_or(String::new(), |l| format!("line {l}: "))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Worker threads for corpus generation.
    pub workers: usize,
    pub samples_per_shard: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            samples_per_shard: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub source: SourceSpec,
    pub receivers: ReceiverArray,
    pub scene: SceneConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Parses and validates.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let (line, column) = e
                .span()
                .map_or((1, 1), |span| line_column(text, span.start));
            ConfigError::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate_in(Some(text))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.validate_in(None)
    }

    fn validate_in(&self, text: Option<&str>) -> Result<(), ConfigError> {
        let fail = |section: &'static str, key: &str, message: String| ConfigError::Invalid {
            section,
            line: text.and_then(|t| locate(t, section, key)),
            message,
        };
        let (w, h) = (self.scene.width, self.scene.height);
        self.scene.validate().map_err(|m| fail("scene", "", m))?;
        let fastest = self.scene.water_speed.max(self.scene.obstacle_speed) as f64;
        self.grid
            .check_stability(fastest)
            .map_err(|e| fail("grid", "dt", e.to_string()))?;
        self.source
            .validate(w, h)
            .map_err(|e| fail("source", "position", e.to_string()))?;
        self.receivers
            .validate(w, h, self.grid.n_steps)
            .map_err(|e| fail("receivers", "positions", e.to_string()))?;
        if self.receivers.len() != N_RECEIVERS {
            return Err(fail(
                "receivers",
                "positions",
                format!(
                    "expected {N_RECEIVERS} receivers, got {}",
                    self.receivers.len()
                ),
            ));
        }
        if self.output.workers == 0 {
            return Err(fail("output", "workers", "workers must be positive".into()));
        }
        if self.output.samples_per_shard == 0 {
            return Err(fail(
                "output",
                "samples_per_shard",
                "samples_per_shard must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn dataset(&self) -> DatasetConfig {
        DatasetConfig {
            grid: self.grid,
            source: self.source,
            receivers: self.receivers.clone(),
            scene: self.scene.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// 1-based line and column of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

/// Line of `key` inside `[section]`, or of the section header itself.
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let header = format!("[{section}]");
    let mut in_section = false;
    let mut header_line = None;
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            in_section = t == header;
            if in_section {
                header_line = Some(i + 1);
            }
            continue;
        }
        let is_key = t
            .strip_prefix(key)
            .is_some_and(|rest| rest.trim_start().starts_with('='));
        if in_section && !key.is_empty() && is_key {
            return Some(i + 1);
        }
    }
    header_line
}
