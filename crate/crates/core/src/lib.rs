//! Trusted multimodal classification: evidential opinions, belief fusion,
//! trusted losses, and confidence-aware evaluation.
//!
//! The pipeline turns per-modality classifier logits into subjective-logic
//! opinions (belief masses plus an uncertainty mass), fuses modalities with a
//! reduced Dempster-Shafer rule, trains with a cross-entropy that also
//! penalizes misplaced uncertainty, and evaluates with confidence-aware
//! metrics that pick an operating threshold from the trusted P-R curve.
//!
//! Modules:
//! - [`evidence`]: logits -> evidence -> opinion.
//! - [`fusion`]: pairwise and n-ary opinion combination.
//! - [`loss`]: trusted cross-entropy, the joint loss, ablation variants.
//! - [`gradient`]: exact analytic gradients through the whole stack.
//! - [`metrics`]: trusted confusion matrix, P-R curve, threshold selection.
//! - [`synth`], [`train`], [`experiment`]: the desk-scale benchmark harness.

pub mod error;
pub mod evidence;
pub mod experiment;
pub mod fusion;
pub mod gradient;
pub mod loss;
pub mod metrics;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
pub use evidence::{Evidence, Logits, Opinion};
pub use fusion::{combine_many, combine_pair, conflict, Conflict};
pub use gradient::{loss_gradient, trusted_ce_gradient, LossGradient, TrainingLoss};
pub use loss::{overall_loss, trusted_ce, variant_loss, LossBreakdown, LossVariant, TrustedTarget};
pub use metrics::{
    classify_trust, confusion, plain_metrics, pr_curve, select_threshold, trusted_accuracy,
    trusted_f1, trusted_precision, trusted_recall, PlainMetrics, PrCurve, PrPoint, TrustCell,
    TrustedConfusion, TrustedPrediction,
};
pub use synth::{generate_synthetic, Dataset, Sample, SyntheticConfig};
pub use train::{forward, train, train_with_loss, Heads, ModalityHead, TrainConfig, TrainHistory};
