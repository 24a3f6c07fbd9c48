//! Analytic gradients of the joint loss with respect to per-modality logits.
//!
//! The derivative chain is hand-derived for the fixed composition used here:
//! logits -> softplus evidence -> opinion -> pairwise fusion fold -> one loss
//! term per modality plus one for the fused result. No general autodiff; each
//! stage exposes a vector-Jacobian product and the backward pass walks the
//! fold in reverse.

use crate::error::{Error, Result};
use crate::evidence::{sigmoid, Logits, Opinion};
use crate::fusion::combine_pair;
use crate::loss::{
    clamped_half_pi_tan, trusted_ce, variant_loss, LossVariant, TrustedTarget, LOG_EPSILON,
    TAN_ARG_MAX,
};

/// Loss applied to every branch (each modality and the fused result) during
/// training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainingLoss {
    TrustedCe,
    Variant(LossVariant),
}

impl TrainingLoss {
    /// Trusted cross-entropy first, then the ablation variants.
    pub const ALL: [TrainingLoss; 6] = [
        TrainingLoss::TrustedCe,
        TrainingLoss::Variant(LossVariant::Ce),
        TrainingLoss::Variant(LossVariant::AddTrusted),
        TrainingLoss::Variant(LossVariant::TanMulTrusted),
        TrainingLoss::Variant(LossVariant::TanAddTrusted),
        TrainingLoss::Variant(LossVariant::ExpMulTrusted),
    ];

    pub fn name(self) -> &'static str {
        match self {
            TrainingLoss::TrustedCe => "trusted_ce",
            TrainingLoss::Variant(v) => v.name(),
        }
    }

    fn branch_loss(self, prediction: &Opinion, target: &TrustedTarget) -> Result<f64> {
        match self {
            TrainingLoss::TrustedCe => trusted_ce(prediction, target),
            TrainingLoss::Variant(v) => variant_loss(v, prediction, target),
        }
    }
}

/// Joint loss value and its gradient with respect to every logit entry.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGradient {
    /// Sum over all branches.
    pub loss: f64,
    /// One loss per modality branch, then the fused branch last.
    pub branch_losses: Vec<f64>,
    /// `d loss / d logits`, one vector per modality.
    pub per_modality: Vec<Vec<f64>>,
}

/// Cotangent (adjoint) of the loss with respect to one opinion's components.
#[derive(Debug, Clone)]
struct OpinionCotangent {
    beliefs: Vec<f64>,
    uncertainty: f64,
}

impl OpinionCotangent {
    fn zeros(classes: usize) -> Self {
        Self {
            beliefs: vec![0.0; classes],
            uncertainty: 0.0,
        }
    }

    fn add(&mut self, other: &OpinionCotangent) {
        for (a, b) in self.beliefs.iter_mut().zip(&other.beliefs) {
            *a += b;
        }
        self.uncertainty += other.uncertainty;
    }
}

/// Adjoint of one branch loss at `prediction`.
///
/// Terms whose log argument sits at a clamp are constants there, so their
/// contribution is zero — mirroring the clamped forward formulas exactly.
fn branch_cotangent(
    kind: TrainingLoss,
    prediction: &Opinion,
    target: &TrustedTarget,
) -> OpinionCotangent {
    let classes = prediction.class_count();
    let mut cot = OpinionCotangent::zeros(classes);
    match kind {
        TrainingLoss::TrustedCe => {
            for (c, (&b, &coeff)) in prediction
                .beliefs()
                .iter()
                .zip(target.beliefs())
                .enumerate()
            {
                if coeff != 0.0 && b > LOG_EPSILON {
                    cot.beliefs[c] = -coeff / b;
                }
            }
            let u = prediction.uncertainty();
            if target.uncertainty() != 0.0 && u > LOG_EPSILON {
                cot.uncertainty = -target.uncertainty() / u;
            }
        }
        TrainingLoss::Variant(variant) => {
            let u = prediction.uncertainty();
            let raw_scale = 1.0 - u;
            let scale = raw_scale.max(LOG_EPSILON);
            let scale_active = raw_scale > LOG_EPSILON;
            let mut ce = 0.0;
            let mut ce_beliefs = vec![0.0; classes];
            let mut ce_uncertainty = 0.0;
            for (c, (&b, &coeff)) in prediction
                .beliefs()
                .iter()
                .zip(target.beliefs())
                .enumerate()
            {
                if coeff == 0.0 {
                    continue;
                }
                let p = (b / scale).clamp(LOG_EPSILON, 1.0);
                ce -= coeff * p.ln();
                if b / scale > LOG_EPSILON && b / scale < 1.0 {
                    ce_beliefs[c] = -coeff / b;
                    if scale_active {
                        ce_uncertainty -= coeff / scale;
                    }
                }
            }
            // Slope of the clamped tan argument: pi/2 inside the clamp, zero past it.
            let theta_slope = if u * std::f64::consts::FRAC_PI_2 < TAN_ARG_MAX {
                std::f64::consts::FRAC_PI_2
            } else {
                0.0
            };
            match variant {
                LossVariant::Ce => {
                    cot.beliefs = ce_beliefs;
                    cot.uncertainty = ce_uncertainty;
                }
                LossVariant::AddTrusted => {
                    cot.beliefs = ce_beliefs;
                    cot.uncertainty = ce_uncertainty + 1.0;
                }
                LossVariant::TanMulTrusted => {
                    let tan = clamped_half_pi_tan(u);
                    let sec_sq = 1.0 + tan * tan;
                    for (out, g) in cot.beliefs.iter_mut().zip(&ce_beliefs) {
                        *out = tan * g;
                    }
                    cot.uncertainty = tan * ce_uncertainty + ce * sec_sq * theta_slope;
                }
                LossVariant::TanAddTrusted => {
                    let tan = clamped_half_pi_tan(u);
                    let sec_sq = 1.0 + tan * tan;
                    cot.beliefs = ce_beliefs;
                    cot.uncertainty = ce_uncertainty + sec_sq * theta_slope;
                }
                LossVariant::ExpMulTrusted => {
                    cot.beliefs = ce_beliefs;
                    cot.uncertainty = ce_uncertainty + u.exp();
                }
            }
        }
    }
    cot
}

/// Vector-Jacobian product of [`combine_pair`] at `(a, b)`.
///
/// The trailing renormalization inside `combine_pair` is the identity for
/// valid opinions (the combined components already sum to one), so its
/// derivative contribution is zero and the adjoint is taken through the raw
/// combination formula.
fn combine_pair_vjp(
    a: &Opinion,
    b: &Opinion,
    cot: &OpinionCotangent,
) -> (OpinionCotangent, OpinionCotangent) {
    let classes = a.class_count();
    let (ua, ub) = (a.uncertainty(), b.uncertainty());
    let mut k = 0.0;
    for (i, &ba) in a.beliefs().iter().enumerate() {
        for (j, &bb) in b.beliefs().iter().enumerate() {
            if i != j {
                k += ba * bb;
            }
        }
    }
    let denom = 1.0 - k;
    debug_assert!(denom > 0.0, "vjp reached a totally conflicting pair");
    let sum_ba: f64 = a.beliefs().iter().sum();
    let sum_bb: f64 = b.beliefs().iter().sum();

    let fused_u = ua * ub / denom;
    // inner = <cot, fused output>, the common factor from differentiating 1/(1-k).
    let mut inner = cot.uncertainty * fused_u;
    for (c, &g) in cot.beliefs.iter().enumerate() {
        let raw = a.beliefs()[c] * b.beliefs()[c] + a.beliefs()[c] * ub + b.beliefs()[c] * ua;
        inner += g * raw / denom;
    }

    let mut cot_a = OpinionCotangent::zeros(classes);
    let mut cot_b = OpinionCotangent::zeros(classes);
    for c in 0..classes {
        let g = cot.beliefs[c];
        cot_a.beliefs[c] = (g * (b.beliefs()[c] + ub) + inner * (sum_bb - b.beliefs()[c])) / denom;
        cot_b.beliefs[c] = (g * (a.beliefs()[c] + ua) + inner * (sum_ba - a.beliefs()[c])) / denom;
        cot_a.uncertainty += g * b.beliefs()[c] / denom;
        cot_b.uncertainty += g * a.beliefs()[c] / denom;
    }
    cot_a.uncertainty += cot.uncertainty * ub / denom;
    cot_b.uncertainty += cot.uncertainty * ua / denom;
    (cot_a, cot_b)
}

/// Pulls an opinion cotangent back to the modality's logits through the
/// opinion map (`b_c = (e_c - 1)/S`, `u = C/S`) and the softplus.
fn pull_back_to_logits(logits: &Logits, opinion: &Opinion, cot: &OpinionCotangent) -> Vec<f64> {
    let total = opinion.class_count() as f64 / opinion.uncertainty();
    let mut inner = cot.uncertainty * opinion.uncertainty();
    for (&g, &b) in cot.beliefs.iter().zip(opinion.beliefs()) {
        inner += g * b;
    }
    logits
        .values()
        .iter()
        .enumerate()
        .map(|(c, &x)| (cot.beliefs[c] - inner) / total * sigmoid(x))
        .collect()
}

/// Loss and exact analytic gradient for an arbitrary branch loss.
///
/// The joint loss is the branch loss summed over every modality's opinion
/// plus the fused opinion; the fused term backpropagates into every modality.
pub fn loss_gradient(
    kind: TrainingLoss,
    logits: &[Logits],
    target: &TrustedTarget,
) -> Result<LossGradient> {
    if logits.is_empty() {
        return Err(Error::InvalidInput(
            "gradient needs at least one modality".into(),
        ));
    }
    let classes = target.class_count();
    for l in logits {
        if l.class_count() != classes {
            return Err(Error::DimensionMismatch {
                left: l.class_count(),
                right: classes,
            });
        }
    }

    let opinions: Vec<Opinion> = logits.iter().map(Opinion::from_logits).collect();

    // Forward fold, keeping every intermediate for the reverse sweep.
    let mut folds: Vec<Opinion> = Vec::with_capacity(opinions.len());
    folds.push(opinions[0].clone());
    for op in &opinions[1..] {
        let next = combine_pair(folds.last().unwrap(), op)?;
        folds.push(next);
    }
    let fused = folds.last().unwrap();

    let mut branch_losses = Vec::with_capacity(opinions.len() + 1);
    for op in &opinions {
        branch_losses.push(kind.branch_loss(op, target)?);
    }
    branch_losses.push(kind.branch_loss(fused, target)?);
    let loss = branch_losses.iter().sum();

    // Per-modality adjoints from the modality branches.
    let mut cots: Vec<OpinionCotangent> = opinions
        .iter()
        .map(|op| branch_cotangent(kind, op, target))
        .collect();

    // Fused branch, swept backwards through the fold.
    let mut carry = branch_cotangent(kind, fused, target);
    for i in (1..opinions.len()).rev() {
        let (prev, modal) = combine_pair_vjp(&folds[i - 1], &opinions[i], &carry);
        cots[i].add(&modal);
        carry = prev;
    }
    cots[0].add(&carry);

    let per_modality = logits
        .iter()
        .zip(&opinions)
        .zip(&cots)
        .map(|((l, op), cot)| pull_back_to_logits(l, op, cot))
        .collect();

    Ok(LossGradient {
        loss,
        branch_losses,
        per_modality,
    })
}

/// Gradient of the joint trusted cross-entropy, one vector per modality.
pub fn trusted_ce_gradient(logits: &[Logits], target: &TrustedTarget) -> Result<LossGradient> {
    loss_gradient(TrainingLoss::TrustedCe, logits, target)
}
