//! Error type shared by every module in the crate.

use thiserror::Error;

/// Errors produced by opinion construction, fusion, loss evaluation and the
/// toy training harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A precondition on plain input data was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An evidence entry fell below the baseline of 1.
    #[error("invalid evidence: entry {index} is {value}, every entry must be >= 1")]
    InvalidEvidence { index: usize, value: f64 },

    /// An opinion component was negative or otherwise out of range.
    #[error("invalid opinion: {0}")]
    InvalidOpinion(String),

    /// Belief masses plus uncertainty strayed too far from 1.
    #[error("opinion components sum to {sum}, expected 1 within {tolerance}")]
    NotNormalized { sum: f64, tolerance: f64 },

    /// Two multi-class values disagree on the number of classes.
    #[error("dimension mismatch: {left} classes vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// The two opinions assign all their mass to incompatible classes, so the
    /// combination rule has no meaningful normalizer.
    #[error("total conflict: k = {conflict}, opinions cannot be combined")]
    TotalConflict { conflict: f64 },

    /// A class label was outside `0..classes`.
    #[error("invalid label {label}: must be < {classes}")]
    InvalidLabel { label: usize, classes: usize },

    /// Training produced a non-finite loss or gradient.
    #[error("training diverged at epoch {epoch}")]
    TrainingDiverged { epoch: usize },

    /// A trusted P-R curve needs at least one correct prediction.
    #[error("no correct predictions: trusted recall is undefined everywhere")]
    NoCorrectPredictions,

    /// Every point on the curve has an undefined trusted precision.
    #[error("no valid threshold: trusted precision is undefined at every candidate")]
    NoValidThreshold,
}

pub type Result<T> = std::result::Result<T, Error>;
