//! Joint training of two linear modality heads with the trusted loss.
//!
//! Each modality owns a linear classifier producing logits; the forward pass
//! turns both logit vectors into opinions and fuses them. Training is plain
//! full-batch gradient descent on the joint loss, deterministic end to end.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::{Logits, Opinion};
use crate::fusion::combine_pair;
use crate::gradient::{loss_gradient, TrainingLoss};
use crate::loss::TrustedTarget;
use crate::synth::Dataset;

/// Strength of the trust-region evidence envelope in [`ModalityHead::logits`].
///
/// A purely linear head extrapolates confidently off-distribution: softplus
/// is convex, so zero-mean feature noise inflates expected evidence and
/// *lowers* uncertainty, inverting the behavior the trusted stack exists to
/// provide. Subtracting a class-independent penalty for squared radius
/// beyond the training data's leaves the argmax (and hence all
/// classification behavior) untouched while damping evidence toward the
/// vacuous baseline as inputs leave the region the head was fitted on, so
/// corrupted inputs read as uncertain. The penalty is one-sided: inside the
/// trust region the head is exactly linear.
pub const RADIAL_EVIDENCE_DAMPING: f64 = 0.5;

/// Classifier head for one modality: a linear discriminant under a shared
/// one-sided radial confidence envelope,
/// `logits_c = w_c . x + bias_c - (damping/2) max(0, |x|^2 - r0^2)`,
/// where `r0^2` is the mean squared feature radius seen in training.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModalityHead {
    /// `weights[feature][class]`
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
    /// Squared radius of the head's trust region, fitted from training data.
    pub trust_radius_sq: f64,
}

impl ModalityHead {
    pub fn zeros(feature_dim: usize, classes: usize) -> Self {
        Self {
            weights: vec![vec![0.0; classes]; feature_dim],
            bias: vec![0.0; classes],
            trust_radius_sq: 0.0,
        }
    }

    pub fn logits(&self, features: &[f64]) -> Logits {
        let radius_sq: f64 = features.iter().map(|x| x * x).sum();
        let excess = (radius_sq - self.trust_radius_sq).max(0.0);
        let envelope = 0.5 * RADIAL_EVIDENCE_DAMPING * excess;
        let mut values: Vec<f64> = self.bias.iter().map(|b| b - envelope).collect();
        for (&x, row) in features.iter().zip(&self.weights) {
            for (v, &w) in values.iter_mut().zip(row) {
                *v += x * w;
            }
        }
        Logits::new(values).expect("finite parameters and features produce finite logits")
    }
}

fn mean_radius_sq<'a>(features: impl Iterator<Item = &'a Vec<f64>>) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for f in features {
        total += f.iter().map(|x| x * x).sum::<f64>();
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        total / count as f64
    }
}

/// The pair of trained heads.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Heads {
    pub video: ModalityHead,
    pub audio: ModalityHead,
}

impl Heads {
    pub fn zeros(feature_dim: usize, classes: usize) -> Self {
        Self {
            video: ModalityHead::zeros(feature_dim, classes),
            audio: ModalityHead::zeros(feature_dim, classes),
        }
    }
}

/// Gradient-descent settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    /// Uncertainty mass assigned to ground-truth targets.
    #[serde(default)]
    pub target_uncertainty: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_learning_rate() -> f64 {
    0.05
}

fn default_epochs() -> usize {
    200
}

fn default_seed() -> u64 {
    42
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: default_learning_rate(),
            epochs: default_epochs(),
            target_uncertainty: 0.0,
            seed: default_seed(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        // A zero rate is a permitted degenerate (no-op steps); negative is not.
        if self.learning_rate < 0.0 || !self.learning_rate.is_finite() {
            return Err(Error::InvalidInput(format!(
                "learning_rate must be >= 0, got {}",
                self.learning_rate
            )));
        }
        if self.epochs < 1 {
            return Err(Error::InvalidInput("epochs must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.target_uncertainty) {
            return Err(Error::InvalidInput(format!(
                "target_uncertainty must be in [0, 1), got {}",
                self.target_uncertainty
            )));
        }
        Ok(())
    }
}

/// State of one training epoch, recorded before that epoch's update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub overall_loss: f64,
    pub video_loss: f64,
    pub audio_loss: f64,
    pub combined_loss: f64,
    pub accuracy: f64,
    pub mean_fused_uncertainty: f64,
}

/// Per-epoch training trace.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
}

impl TrainHistory {
    pub fn final_record(&self) -> Option<&EpochRecord> {
        self.records.last()
    }
}

/// Per-modality opinions and their fusion for one sample.
pub fn forward(heads: &Heads, video: &[f64], audio: &[f64]) -> Result<(Opinion, Opinion, Opinion)> {
    let video_opinion = Opinion::from_logits(&heads.video.logits(video));
    let audio_opinion = Opinion::from_logits(&heads.audio.logits(audio));
    let fused = combine_pair(&video_opinion, &audio_opinion)?;
    Ok((video_opinion, audio_opinion, fused))
}

struct HeadGradient {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

impl HeadGradient {
    fn zeros(feature_dim: usize, classes: usize) -> Self {
        Self {
            weights: vec![vec![0.0; classes]; feature_dim],
            bias: vec![0.0; classes],
        }
    }

    fn accumulate(&mut self, features: &[f64], logit_grad: &[f64], scale: f64) {
        for (row, &x) in self.weights.iter_mut().zip(features) {
            for (w, &g) in row.iter_mut().zip(logit_grad) {
                *w += scale * x * g;
            }
        }
        for (b, &g) in self.bias.iter_mut().zip(logit_grad) {
            *b += scale * g;
        }
    }

    fn is_finite(&self) -> bool {
        self.bias.iter().all(|b| b.is_finite())
            && self.weights.iter().flatten().all(|w| w.is_finite())
    }
}

fn apply_update(head: &mut ModalityHead, grad: &HeadGradient, learning_rate: f64) {
    for (row, grow) in head.weights.iter_mut().zip(&grad.weights) {
        for (w, &g) in row.iter_mut().zip(grow) {
            *w -= learning_rate * g;
        }
    }
    for (b, &g) in head.bias.iter_mut().zip(&grad.bias) {
        *b -= learning_rate * g;
    }
}

pub(crate) struct TrainingRun {
    pub heads: Heads,
    pub history: TrainHistory,
    pub diverged_at: Option<usize>,
}

/// Full-batch gradient descent with an arbitrary branch loss. On divergence
/// the partial history up to the failing epoch is kept.
pub(crate) fn run_training(
    dataset: &Dataset,
    config: &TrainConfig,
    kind: TrainingLoss,
) -> Result<TrainingRun> {
    config.validate()?;
    if dataset.is_empty() {
        return Err(Error::InvalidInput(
            "cannot train on an empty dataset".into(),
        ));
    }
    let classes = dataset.classes;
    let feature_dim = dataset.feature_dim;
    let inverse_n = 1.0 / dataset.len() as f64;
    let mut heads = Heads::zeros(feature_dim, classes);
    heads.video.trust_radius_sq = mean_radius_sq(dataset.samples.iter().map(|s| &s.video));
    heads.audio.trust_radius_sq = mean_radius_sq(dataset.samples.iter().map(|s| &s.audio));
    let mut history = TrainHistory::default();

    for epoch in 1..=config.epochs {
        let mut video_grad = HeadGradient::zeros(feature_dim, classes);
        let mut audio_grad = HeadGradient::zeros(feature_dim, classes);
        let mut loss_sums = [0.0f64; 3]; // video, audio, combined
        let mut correct = 0usize;
        let mut uncertainty_sum = 0.0;

        for sample in &dataset.samples {
            let target = TrustedTarget::one_hot(sample.label, classes, config.target_uncertainty)?;
            let logits = [
                heads.video.logits(&sample.video),
                heads.audio.logits(&sample.audio),
            ];
            let grad = loss_gradient(kind, &logits, &target)?;
            loss_sums[0] += grad.branch_losses[0];
            loss_sums[1] += grad.branch_losses[1];
            loss_sums[2] += grad.branch_losses[2];
            video_grad.accumulate(&sample.video, &grad.per_modality[0], inverse_n);
            audio_grad.accumulate(&sample.audio, &grad.per_modality[1], inverse_n);

            let fused = combine_pair(
                &Opinion::from_logits(&logits[0]),
                &Opinion::from_logits(&logits[1]),
            )?;
            if fused.predicted_class() == sample.label {
                correct += 1;
            }
            uncertainty_sum += fused.uncertainty();
        }

        let record = EpochRecord {
            epoch,
            overall_loss: (loss_sums[0] + loss_sums[1] + loss_sums[2]) * inverse_n,
            video_loss: loss_sums[0] * inverse_n,
            audio_loss: loss_sums[1] * inverse_n,
            combined_loss: loss_sums[2] * inverse_n,
            accuracy: correct as f64 * inverse_n,
            mean_fused_uncertainty: uncertainty_sum * inverse_n,
        };
        let finite =
            record.overall_loss.is_finite() && video_grad.is_finite() && audio_grad.is_finite();
        history.records.push(record);
        if !finite {
            return Ok(TrainingRun {
                heads,
                history,
                diverged_at: Some(epoch),
            });
        }

        apply_update(&mut heads.video, &video_grad, config.learning_rate);
        apply_update(&mut heads.audio, &audio_grad, config.learning_rate);
    }

    Ok(TrainingRun {
        heads,
        history,
        diverged_at: None,
    })
}

/// Trains both heads jointly with the trusted cross-entropy.
pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<(Heads, TrainHistory)> {
    let run = run_training(dataset, config, TrainingLoss::TrustedCe)?;
    match run.diverged_at {
        Some(epoch) => Err(Error::TrainingDiverged { epoch }),
        None => Ok((run.heads, run.history)),
    }
}

/// Same as [`train`] but with one of the ablation losses on every branch.
pub fn train_with_loss(
    dataset: &Dataset,
    config: &TrainConfig,
    kind: TrainingLoss,
) -> Result<(Heads, TrainHistory)> {
    let run = run_training(dataset, config, kind)?;
    match run.diverged_at {
        Some(epoch) => Err(Error::TrainingDiverged { epoch }),
        None => Ok((run.heads, run.history)),
    }
}
