//! Experiment configuration file: one JSON document holding the synthetic
//! dataset parameters, the training parameters, and (for the noise command)
//! the sweep levels. The schema is documented in the repository README.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use trustfuse_core::{SyntheticConfig, TrainConfig};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub synthetic: SyntheticConfig,
    #[serde(default)]
    pub train: TrainConfig,
    /// Audio noise levels for the `noise` command; unused elsewhere.
    #[serde(default)]
    pub noise_levels: Vec<f64>,
}

impl RunConfig {
    /// Applies a command-line seed override to both the dataset and the
    /// training configuration.
    pub fn override_seed(&mut self, seed: Option<u64>) {
        if let Some(seed) = seed {
            self.synthetic.seed = seed;
            self.train.seed = seed;
        }
    }
}

/// Loads and validates a config file. Schema violations name the field.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let content = fs::read_to_string(path)?;
    let config: RunConfig =
        serde_json::from_str(&content).map_err(|e| CliError::Config(e.to_string()))?;
    config
        .synthetic
        .validate()
        .map_err(|e| CliError::Config(format!("synthetic: {e}")))?;
    config
        .train
        .validate()
        .map_err(|e| CliError::Config(format!("train: {e}")))?;
    Ok(config)
}
