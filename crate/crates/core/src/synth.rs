//! Synthetic two-modality classification data.
//!
//! Stands in for real video/audio feature extractors: per class, both
//! modalities draw features from a Gaussian around a class-specific mean, and
//! each modality carries its own noise level. Everything is a pure function
//! of the config, so identical seeds give identical datasets.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape and randomness of a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub classes: usize,
    pub feature_dim: usize,
    pub samples_per_class: usize,
    /// Gaussian feature-noise standard deviations `(video, audio)`.
    pub modality_noise: (f64, f64),
    /// Distance scale between class means.
    pub class_separation: f64,
    pub seed: u64,
}

impl SyntheticConfig {
    /// The benchmark used by the fixed-seed experiments: three classes in
    /// four dimensions, 200 samples per class, moderate noise.
    pub fn default_benchmark() -> Self {
        Self {
            classes: 3,
            feature_dim: 4,
            samples_per_class: 200,
            modality_noise: (0.5, 0.5),
            class_separation: 3.0,
            seed: 42,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.classes < 2 {
            return Err(Error::InvalidInput(format!(
                "classes must be >= 2, got {}",
                self.classes
            )));
        }
        if self.feature_dim < 1 {
            return Err(Error::InvalidInput("feature_dim must be >= 1".into()));
        }
        if self.samples_per_class < 1 {
            return Err(Error::InvalidInput("samples_per_class must be >= 1".into()));
        }
        let (sv, sa) = self.modality_noise;
        if !(sv >= 0.0 && sa >= 0.0 && sv.is_finite() && sa.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "modality_noise must be finite and >= 0, got ({sv}, {sa})"
            )));
        }
        if self.class_separation <= 0.0 || !self.class_separation.is_finite() {
            return Err(Error::InvalidInput(format!(
                "class_separation must be > 0, got {}",
                self.class_separation
            )));
        }
        Ok(())
    }
}

/// One labeled sample with a feature vector per modality.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub video: Vec<f64>,
    pub audio: Vec<f64>,
    pub label: usize,
}

/// A generated dataset, ordered class-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub classes: usize,
    pub feature_dim: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Mean feature vector of `class`: one coordinate at `+/-separation`, cycling
/// through dimensions and flipping sign on each wrap, so means stay distinct
/// for up to `2 * dim` classes.
fn class_mean(class: usize, dim: usize, separation: f64) -> Vec<f64> {
    let mut mean = vec![0.0; dim];
    let sign = if (class / dim).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    mean[class % dim] = sign * separation;
    mean
}

/// Generates the dataset described by `config`. Both modalities share class
/// means; they differ only in their noise draws and noise scale.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<Dataset> {
    config.validate()?;
    let mut rng = StdRng::seed_from_u64(config.seed);
    let (sigma_video, sigma_audio) = config.modality_noise;
    let mut samples = Vec::with_capacity(config.classes * config.samples_per_class);
    for class in 0..config.classes {
        let mean = class_mean(class, config.feature_dim, config.class_separation);
        for _ in 0..config.samples_per_class {
            let video = mean
                .iter()
                .map(|&m| m + sigma_video * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let audio = mean
                .iter()
                .map(|&m| m + sigma_audio * rng.sample::<f64, _>(StandardNormal))
                .collect();
            samples.push(Sample {
                video,
                audio,
                label: class,
            });
        }
    }
    Ok(Dataset {
        samples,
        classes: config.classes,
        feature_dim: config.feature_dim,
    })
}
