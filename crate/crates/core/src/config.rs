//! Configuration file loading.
//!
//! The file is flat sectioned `key = value` text (TOML): one section per
//! module, keys named exactly like the struct fields. Missing sections or keys
//! fall back to defaults; unknown keys are errors.
//!
//! ```text
//! [scenario]
//! cell_radius = 250.0
//! num_cues = 120
//!
//! [scma]
//! num_rbs = 100
//!
//! [experiment]
//! sweep_variable = "num_cues"
//! sweep_values = [50, 80, 100]
//! ```

use std::path::Path;

use crate::error::{Error, Result};
use crate::evaluation::ExperimentConfig;

pub fn parse_config(text: &str, origin: &Path) -> Result<ExperimentConfig> {
    toml::from_str(text).map_err(|e: toml::de::Error| Error::ConfigParse {
        path: origin.to_path_buf(),
        line: e.span().map_or(0, |s| text[..s.start].lines().count().max(1)),
        message: e.message().trim().to_string(),
    })
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, path)
}

pub fn to_config_text(cfg: &ExperimentConfig) -> String {
    toml::to_string(cfg).expect("config is always serializable")
}
