//! Logits, evidence vectors, and subjective-logic opinions.
//!
//! Raw classifier outputs become per-class evidence through a shifted
//! softplus, `e_c = softplus(x_c) + 1`, and evidence becomes an opinion by
//! splitting its mass into per-class beliefs `b_c = (e_c - 1) / S` and an
//! uncertainty mass `u = C / S`, where `S` is the evidence total. Beliefs and
//! uncertainty always sum to 1.

use serde::Serialize;

use crate::error::{Error, Result};

/// Bound enforced on `|sum(beliefs) + uncertainty - 1|` for every opinion.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

/// Slack allowed when an opinion is assembled from externally supplied parts
/// (file-sourced values carry decimal rounding).
pub const PARTS_TOLERANCE: f64 = 1e-9;

/// Overflow-safe softplus: `ln(1 + e^x)`.
///
/// Piecewise so that large positive inputs never overflow `exp` and large
/// negative inputs keep full relative precision.
pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else if x < -30.0 {
        x.exp()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic sigmoid, the derivative of [`softplus`].
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Raw per-class classifier outputs for one modality.
#[derive(Debug, Clone, PartialEq)]
pub struct Logits(Vec<f64>);

impl Logits {
    /// Validates a logit vector: at least two classes, every entry finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "logits need at least 2 classes, got {}",
                values.len()
            )));
        }
        if let Some((index, value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "logit {index} is {value}, all entries must be finite"
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn class_count(&self) -> usize {
        self.0.len()
    }
}

/// Per-class evidence, each entry at least 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Evidence(Vec<f64>);

impl Evidence {
    /// Validates an evidence vector: length >= 2, entries finite and >= 1.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "evidence needs at least 2 classes, got {}",
                values.len()
            )));
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || value < 1.0 {
                return Err(Error::InvalidEvidence { index, value });
            }
        }
        Ok(Self(values))
    }

    /// Maps logits to evidence, `e_c = softplus(x_c) + 1`.
    pub fn from_logits(logits: &Logits) -> Self {
        Self(logits.values().iter().map(|&x| softplus(x) + 1.0).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn class_count(&self) -> usize {
        self.0.len()
    }

    /// Evidence total `S`.
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// A subjective-logic opinion: per-class belief masses plus one uncertainty
/// mass, summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Opinion {
    beliefs: Vec<f64>,
    uncertainty: f64,
}

impl Opinion {
    /// Derives the opinion of an evidence vector: `b_c = (e_c - 1) / S`,
    /// `u = C / S`.
    pub fn from_evidence(evidence: &Evidence) -> Self {
        let total = evidence.total();
        let beliefs = evidence
            .values()
            .iter()
            .map(|&e| (e - 1.0) / total)
            .collect();
        let uncertainty = evidence.class_count() as f64 / total;
        Self::renormalized(beliefs, uncertainty)
    }

    /// Shorthand for [`Evidence::from_logits`] followed by
    /// [`Opinion::from_evidence`].
    pub fn from_logits(logits: &Logits) -> Self {
        Self::from_evidence(&Evidence::from_logits(logits))
    }

    /// Assembles an opinion from externally supplied components.
    ///
    /// Components must be nonnegative and sum to 1 within
    /// [`PARTS_TOLERANCE`]; the residual is renormalized away.
    pub fn from_parts(beliefs: Vec<f64>, uncertainty: f64) -> Result<Self> {
        if beliefs.len() < 2 {
            return Err(Error::InvalidOpinion(format!(
                "opinion needs at least 2 classes, got {}",
                beliefs.len()
            )));
        }
        for (index, &b) in beliefs.iter().enumerate() {
            if !b.is_finite() || b < 0.0 {
                return Err(Error::InvalidOpinion(format!("belief {index} is {b}")));
            }
        }
        if !uncertainty.is_finite() || uncertainty < 0.0 {
            return Err(Error::InvalidOpinion(format!(
                "uncertainty is {uncertainty}"
            )));
        }
        let sum = beliefs.iter().sum::<f64>() + uncertainty;
        if (sum - 1.0).abs() > PARTS_TOLERANCE {
            return Err(Error::NotNormalized {
                sum,
                tolerance: PARTS_TOLERANCE,
            });
        }
        Ok(Self::renormalized(beliefs, uncertainty))
    }

    /// The opinion that commits all mass to "don't know".
    pub fn vacuous(classes: usize) -> Self {
        Opinion {
            beliefs: vec![0.0; classes],
            uncertainty: 1.0,
        }
    }

    /// Divides all components by their exact sum so the normalization
    /// invariant holds to working precision. Callers must pass components
    /// already summing to 1 up to rounding.
    pub(crate) fn renormalized(mut beliefs: Vec<f64>, mut uncertainty: f64) -> Self {
        let sum = beliefs.iter().sum::<f64>() + uncertainty;
        for b in &mut beliefs {
            *b /= sum;
        }
        uncertainty /= sum;
        Opinion {
            beliefs,
            uncertainty,
        }
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

    /// Index of the largest belief mass; ties break to the lowest index.
    pub fn predicted_class(&self) -> usize {
        let mut best = 0;
        for (index, &b) in self.beliefs.iter().enumerate() {
            if b > self.beliefs[best] {
                best = index;
            }
        }
        best
    }
}
