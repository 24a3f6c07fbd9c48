//! Trusted cross-entropy, the joint multi-branch loss, and the ablation loss
//! variants.
//!
//! The trusted cross-entropy of a predicted opinion against a trusted target
//! is `-sum_c b_c log b̂_c - u log û`: ordinary cross-entropy over belief
//! masses plus a matching term for the uncertainty mass. Training sums that
//! loss over the video branch, the audio branch, and the fused result.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evidence::Opinion;

/// Lower clamp applied to every logarithm argument. Belief masses of exactly
/// zero are reachable (evidence exactly at baseline), and `log 0` is `-inf`.
pub const LOG_EPSILON: f64 = 1e-12;

/// Upper clamp on the `tan` argument used by the tangent loss variants; the
/// raw formula diverges as the uncertainty approaches 1.
pub const TAN_ARG_MAX: f64 = FRAC_PI_2 - 1e-6;

/// Ground-truth label in trusted form: target belief masses plus a target
/// uncertainty, summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrustedTarget {
    beliefs: Vec<f64>,
    uncertainty: f64,
}

impl TrustedTarget {
    /// Builds a target from raw components, which must be nonnegative and sum
    /// to 1 within `1e-12`.
    pub fn new(beliefs: Vec<f64>, uncertainty: f64) -> Result<Self> {
        if beliefs.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "target needs at least 2 classes, got {}",
                beliefs.len()
            )));
        }
        if beliefs.iter().any(|&b| !b.is_finite() || b < 0.0)
            || !uncertainty.is_finite()
            || uncertainty < 0.0
        {
            return Err(Error::InvalidInput(
                "target components must be finite and nonnegative".into(),
            ));
        }
        let sum = beliefs.iter().sum::<f64>() + uncertainty;
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized {
                sum,
                tolerance: 1e-12,
            });
        }
        Ok(Self {
            beliefs,
            uncertainty,
        })
    }

    /// One-hot target for `label`: the labeled class receives
    /// `1 - target_uncertainty` belief, everything else zero.
    pub fn one_hot(label: usize, classes: usize, target_uncertainty: f64) -> Result<Self> {
        if classes < 2 {
            return Err(Error::InvalidInput(format!(
                "target needs at least 2 classes, got {classes}"
            )));
        }
        if label >= classes {
            return Err(Error::InvalidLabel { label, classes });
        }
        if !(0.0..1.0).contains(&target_uncertainty) {
            return Err(Error::InvalidInput(format!(
                "target uncertainty must be in [0, 1), got {target_uncertainty}"
            )));
        }
        let mut beliefs = vec![0.0; classes];
        beliefs[label] = 1.0 - target_uncertainty;
        Ok(Self {
            beliefs,
            uncertainty: target_uncertainty,
        })
    }

    pub fn beliefs(&self) -> &[f64] {
        &self.beliefs
    }

    pub fn uncertainty(&self) -> f64 {
        self.uncertainty
    }

    pub fn class_count(&self) -> usize {
        self.beliefs.len()
    }
}

fn check_dims(prediction: &Opinion, target: &TrustedTarget) -> Result<()> {
    if prediction.class_count() != target.class_count() {
        return Err(Error::DimensionMismatch {
            left: prediction.class_count(),
            right: target.class_count(),
        });
    }
    Ok(())
}

/// Trusted cross-entropy `-sum_c b_c log b̂_c - u log û`.
///
/// Log arguments are clamped below at [`LOG_EPSILON`]; terms whose target
/// coefficient is exactly zero are skipped (`0 log x = 0`).
pub fn trusted_ce(prediction: &Opinion, target: &TrustedTarget) -> Result<f64> {
    check_dims(prediction, target)?;
    let mut loss = 0.0;
    for (&predicted, &coeff) in prediction.beliefs().iter().zip(target.beliefs()) {
        if coeff != 0.0 {
            loss -= coeff * predicted.max(LOG_EPSILON).ln();
        }
    }
    if target.uncertainty() != 0.0 {
        loss -= target.uncertainty() * prediction.uncertainty().max(LOG_EPSILON).ln();
    }
    Ok(loss)
}

/// Per-branch trusted cross-entropy values and their sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossBreakdown {
    pub video_loss: f64,
    pub audio_loss: f64,
    pub combined_loss: f64,
    pub overall: f64,
}

/// Joint loss over the two modality branches and the fused result:
/// `overall = video + audio + combined`.
pub fn overall_loss(
    video: &Opinion,
    audio: &Opinion,
    fused: &Opinion,
    target: &TrustedTarget,
) -> Result<LossBreakdown> {
    let video_loss = trusted_ce(video, target)?;
    let audio_loss = trusted_ce(audio, target)?;
    let combined_loss = trusted_ce(fused, target)?;
    Ok(LossBreakdown {
        video_loss,
        audio_loss,
        combined_loss,
        overall: video_loss + audio_loss + combined_loss,
    })
}

/// The ablation loss variants compared against the trusted cross-entropy.
///
/// Every variant shares a plain cross-entropy core computed over beliefs
/// renormalized to a probability vector (divide by `1 - û`), then folds the
/// predicted uncertainty in differently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossVariant {
    /// `-sum_c y_c log ŷ_c`
    Ce,
    /// `CE + û`
    AddTrusted,
    /// `CE * tan(û * pi/2)`
    TanMulTrusted,
    /// `CE + tan(û * pi/2)`
    TanAddTrusted,
    /// `CE + exp(û)`
    ExpMulTrusted,
}

impl LossVariant {
    pub const ALL: [LossVariant; 5] = [
        LossVariant::Ce,
        LossVariant::AddTrusted,
        LossVariant::TanMulTrusted,
        LossVariant::TanAddTrusted,
        LossVariant::ExpMulTrusted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LossVariant::Ce => "ce",
            LossVariant::AddTrusted => "add_trusted",
            LossVariant::TanMulTrusted => "tan_mul_trusted",
            LossVariant::TanAddTrusted => "tan_add_trusted",
            LossVariant::ExpMulTrusted => "exp_mul_trusted",
        }
    }
}

/// Cross-entropy over class probabilities `b_c / (1 - û)`, shared by all
/// variants. Probabilities are clamped to `[LOG_EPSILON, 1]`.
pub(crate) fn class_cross_entropy(prediction: &Opinion, target: &TrustedTarget) -> f64 {
    let scale = (1.0 - prediction.uncertainty()).max(LOG_EPSILON);
    let mut loss = 0.0;
    for (&predicted, &coeff) in prediction.beliefs().iter().zip(target.beliefs()) {
        if coeff != 0.0 {
            let p = (predicted / scale).clamp(LOG_EPSILON, 1.0);
            loss -= coeff * p.ln();
        }
    }
    loss
}

pub(crate) fn clamped_half_pi_tan(uncertainty: f64) -> f64 {
    (uncertainty * FRAC_PI_2).min(TAN_ARG_MAX).tan()
}

/// Evaluates one ablation loss variant.
pub fn variant_loss(
    kind: LossVariant,
    prediction: &Opinion,
    target: &TrustedTarget,
) -> Result<f64> {
    check_dims(prediction, target)?;
    let ce = class_cross_entropy(prediction, target);
    let u = prediction.uncertainty();
    Ok(match kind {
        LossVariant::Ce => ce,
        LossVariant::AddTrusted => ce + u,
        LossVariant::TanMulTrusted => ce * clamped_half_pi_tan(u),
        LossVariant::TanAddTrusted => ce + clamped_half_pi_tan(u),
        // The exponential variant adds the term despite its "Mul" label.
        LossVariant::ExpMulTrusted => ce + u.exp(),
    })
}
