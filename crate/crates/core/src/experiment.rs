//! Fixed-seed experiments: the unimodal-vs-fused ablation, the loss-variant
//! comparison, and the audio noise-robustness sweep.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evidence::Opinion;
use crate::gradient::TrainingLoss;
use crate::metrics::{
    confusion, plain_metrics, pr_curve, select_threshold, trusted_accuracy, trusted_f1,
    trusted_precision, trusted_recall, TrustedConfusion, TrustedPrediction,
};
use crate::synth::{generate_synthetic, Dataset, Sample, SyntheticConfig};
use crate::train::{forward, run_training, train, Heads, TrainConfig, TrainHistory};

/// Stratified split: the leading `train_fraction` of every class block goes
/// to training, the remainder to evaluation. The dataset's class-major
/// ordering makes this deterministic for a given generation seed.
pub fn split_dataset(dataset: &Dataset, train_fraction: f64) -> (Dataset, Dataset) {
    let mut per_class: Vec<Vec<&Sample>> = vec![Vec::new(); dataset.classes];
    for sample in &dataset.samples {
        per_class[sample.label].push(sample);
    }
    let mut train_samples = Vec::new();
    let mut eval_samples = Vec::new();
    for class_samples in per_class {
        let cut = (class_samples.len() as f64 * train_fraction).floor() as usize;
        for (i, sample) in class_samples.into_iter().enumerate() {
            if i < cut {
                train_samples.push(sample.clone());
            } else {
                eval_samples.push(sample.clone());
            }
        }
    }
    let make = |samples: Vec<Sample>| Dataset {
        samples,
        classes: dataset.classes,
        feature_dim: dataset.feature_dim,
    };
    (make(train_samples), make(eval_samples))
}

/// Which opinion a report row is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Video,
    Audio,
    Fused,
}

impl Source {
    pub const ALL: [Source; 3] = [Source::Video, Source::Audio, Source::Fused];

    pub fn name(self) -> &'static str {
        match self {
            Source::Video => "video",
            Source::Audio => "audio",
            Source::Fused => "fused",
        }
    }
}

/// One evaluated source: plain metrics plus trusted metrics at the selected
/// threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceReport {
    pub source: Source,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub trusted_accuracy: Option<f64>,
    pub trusted_f1: Option<f64>,
    pub threshold: f64,
    pub confusion: TrustedConfusion,
}

/// Ablation over {video-only, audio-only, fused} on a held-out split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationReport {
    pub rows: Vec<SourceReport>,
    pub eval_samples: usize,
}

impl AblationReport {
    pub fn row(&self, source: Source) -> &SourceReport {
        self.rows
            .iter()
            .find(|r| r.source == source)
            .expect("report contains every source")
    }
}

/// Evaluated opinions for every source over one dataset.
fn collect_predictions(
    heads: &Heads,
    dataset: &Dataset,
) -> Result<Vec<(Source, Vec<TrustedPrediction>)>> {
    let mut per_source: Vec<(Source, Vec<TrustedPrediction>)> = Source::ALL
        .iter()
        .map(|&s| (s, Vec::with_capacity(dataset.len())))
        .collect();
    for sample in &dataset.samples {
        let (video, audio, fused) = forward(heads, &sample.video, &sample.audio)?;
        for (slot, opinion) in per_source.iter_mut().zip([video, audio, fused]) {
            slot.1.push(TrustedPrediction::new(
                opinion.predicted_class(),
                sample.label,
                opinion.uncertainty(),
            ));
        }
    }
    Ok(per_source)
}

/// Builds one report row: the threshold comes from the P-R curve of this
/// source's own predictions.
pub(crate) fn evaluate_source(
    source: Source,
    predictions: &[TrustedPrediction],
) -> Result<SourceReport> {
    let plain = plain_metrics(predictions)?;
    let threshold = select_threshold(&pr_curve(predictions)?)?;
    let counts = confusion(predictions, threshold)?;
    let tp = trusted_precision(&counts);
    let tr = trusted_recall(&counts);
    let f1 = match (tp, tr) {
        (Some(tp), Some(tr)) => Some(trusted_f1(tp, tr)),
        _ => None,
    };
    Ok(SourceReport {
        source,
        accuracy: plain.accuracy,
        macro_f1: plain.macro_f1,
        weighted_f1: plain.weighted_f1,
        trusted_accuracy: trusted_accuracy(&counts),
        trusted_f1: f1,
        threshold,
        confusion: counts,
    })
}

/// Trains on 80% of the data and compares video-only, audio-only, and fused
/// opinions on the held-out 20%.
pub fn run_ablation(dataset: &Dataset, config: &TrainConfig) -> Result<AblationReport> {
    let (train_split, eval_split) = split_dataset(dataset, 0.8);
    let (heads, _) = train(&train_split, config)?;
    let per_source = collect_predictions(&heads, &eval_split)?;
    let rows = per_source
        .iter()
        .map(|(source, preds)| evaluate_source(*source, preds))
        .collect::<Result<Vec<_>>>()?;
    Ok(AblationReport {
        rows,
        eval_samples: eval_split.len(),
    })
}

/// Outcome of training with one loss function.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantRun {
    pub loss: TrainingLoss,
    pub history: TrainHistory,
    /// Epoch at which the run produced a non-finite loss or gradient, if any.
    pub diverged_at: Option<usize>,
}

/// Trains once per loss function with identical initialization and data.
/// Divergence of a variant is recorded, not fatal.
pub fn run_loss_comparison(dataset: &Dataset, config: &TrainConfig) -> Result<Vec<VariantRun>> {
    TrainingLoss::ALL
        .iter()
        .map(|&kind| {
            let run = run_training(dataset, config, kind)?;
            Ok(VariantRun {
                loss: kind,
                history: run.history,
                diverged_at: run.diverged_at,
            })
        })
        .collect()
}

/// One evaluation of the clean-trained model under injected audio noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoisePoint {
    pub sigma: f64,
    pub mean_audio_uncertainty: f64,
    pub audio_accuracy: f64,
    pub fused_accuracy: f64,
}

/// Trains once on the clean dataset, then evaluates the held-out split with
/// Gaussian noise of each level added to the audio features. A zero level
/// adds exactly zero and reproduces the clean evaluation bit for bit.
pub fn run_noise_sweep(
    synthetic: &SyntheticConfig,
    config: &TrainConfig,
    noise_levels: &[f64],
) -> Result<Vec<NoisePoint>> {
    if noise_levels.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "noise sweep needs at least 3 levels, got {}",
            noise_levels.len()
        )));
    }
    if noise_levels.iter().any(|&s| !s.is_finite() || s < 0.0) {
        return Err(Error::InvalidInput(
            "noise levels must be finite and >= 0".into(),
        ));
    }
    let dataset = generate_synthetic(synthetic)?;
    let (train_split, eval_split) = split_dataset(&dataset, 0.8);
    let (heads, _) = train(&train_split, config)?;

    noise_levels
        .iter()
        .enumerate()
        .map(|(index, &sigma)| {
            let mut rng = StdRng::seed_from_u64(
                config.seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            );
            let mut audio_correct = 0usize;
            let mut fused_correct = 0usize;
            let mut uncertainty_sum = 0.0;
            for sample in &eval_split.samples {
                let noisy_audio: Vec<f64> = sample
                    .audio
                    .iter()
                    .map(|&x| x + sigma * rng.sample::<f64, _>(StandardNormal))
                    .collect();
                let (_, audio_opinion, fused) = forward(&heads, &sample.video, &noisy_audio)?;
                if audio_opinion.predicted_class() == sample.label {
                    audio_correct += 1;
                }
                if fused.predicted_class() == sample.label {
                    fused_correct += 1;
                }
                uncertainty_sum += audio_opinion.uncertainty();
            }
            let n = eval_split.len() as f64;
            Ok(NoisePoint {
                sigma,
                mean_audio_uncertainty: uncertainty_sum / n,
                audio_accuracy: audio_correct as f64 / n,
                fused_accuracy: fused_correct as f64 / n,
            })
        })
        .collect()
}

/// Extracts one source's opinions as trusted predictions, for callers that
/// evaluate datasets outside the ablation flow.
pub fn predictions_for(
    heads: &Heads,
    dataset: &Dataset,
    source: Source,
) -> Result<Vec<TrustedPrediction>> {
    dataset
        .samples
        .iter()
        .map(|sample| {
            let (video, audio, fused) = forward(heads, &sample.video, &sample.audio)?;
            let opinion: &Opinion = match source {
                Source::Video => &video,
                Source::Audio => &audio,
                Source::Fused => &fused,
            };
            Ok(TrustedPrediction::new(
                opinion.predicted_class(),
                sample.label,
                opinion.uncertainty(),
            ))
        })
        .collect()
}
