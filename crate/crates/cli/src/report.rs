//! Evaluation report: per-source metric blocks serialized as JSON.

use serde::{Deserialize, Serialize};
use trustfuse_core::experiment::AblationReport;
use trustfuse_core::TrustedConfusion;

/// Metrics for one opinion source (a modality name or "fused").
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceBlock {
    pub source: String,
    pub samples: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub trusted_accuracy: Option<f64>,
    pub trusted_f1: Option<f64>,
    pub selected_threshold: f64,
    pub ht: usize,
    pub lt: usize,
    pub hf: usize,
    pub lf: usize,
}

impl SourceBlock {
    pub fn confusion_total(&self) -> usize {
        self.ht + self.lt + self.hf + self.lf
    }

    pub(crate) fn from_parts(
        source: String,
        plain: trustfuse_core::PlainMetrics,
        trusted_accuracy: Option<f64>,
        trusted_f1: Option<f64>,
        selected_threshold: f64,
        confusion: TrustedConfusion,
    ) -> Self {
        Self {
            source,
            samples: confusion.n,
            accuracy: plain.accuracy,
            macro_f1: plain.macro_f1,
            weighted_f1: plain.weighted_f1,
            trusted_accuracy,
            trusted_f1,
            selected_threshold,
            ht: confusion.ht,
            lt: confusion.lt,
            hf: confusion.hf,
            lf: confusion.lf,
        }
    }
}

/// The full report: one block per modality plus one for the fused result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub sources: Vec<SourceBlock>,
}

impl EvaluationReport {
    /// Deterministic pretty-printed JSON with a trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }

    pub fn source(&self, name: &str) -> Option<&SourceBlock> {
        self.sources.iter().find(|b| b.source == name)
    }
}

impl From<&AblationReport> for EvaluationReport {
    fn from(report: &AblationReport) -> Self {
        let sources = report
            .rows
            .iter()
            .map(|row| SourceBlock {
                source: row.source.name().to_string(),
                samples: row.confusion.n,
                accuracy: row.accuracy,
                macro_f1: row.macro_f1,
                weighted_f1: row.weighted_f1,
                trusted_accuracy: row.trusted_accuracy,
                trusted_f1: row.trusted_f1,
                selected_threshold: row.threshold,
                ht: row.confusion.ht,
                lt: row.confusion.lt,
                hf: row.confusion.hf,
                lf: row.confusion.lf,
            })
            .collect();
        Self { sources }
    }
}
