//! Line-delimited prediction records.
//!
//! Input files carry one JSON object per line: an id, an optional label, and
//! a map from modality name to a logits vector. All logit vectors must share
//! one class count, within a record and across the whole file. Modalities are
//! keyed by a sorted map so every downstream iteration order, including the
//! fusion fold, is deterministic.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// One input record: per-modality classifier logits for one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
    pub modalities: BTreeMap<String, Vec<f64>>,
}

/// A record paired with the input line it came from, for error reporting.
#[derive(Debug, Clone, PartialEq)]
pub struct LocatedRecord {
    pub line: usize,
    pub record: PredictionRecord,
}

/// Reads and validates a record file. Blank lines are skipped; every failure
/// names the offending line.
pub fn read_records(path: &Path) -> Result<Vec<LocatedRecord>> {
    let content = fs::read_to_string(path)?;
    let mut records = Vec::new();
    let mut class_count: Option<(usize, usize)> = None; // (C, line fixing it)
    for (index, raw) in content.lines().enumerate() {
        let line = index + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let record: PredictionRecord = serde_json::from_str(raw).map_err(|e| CliError::Parse {
            line,
            message: e.to_string(),
        })?;
        if record.modalities.is_empty() {
            return Err(CliError::Schema {
                line,
                message: format!("record '{}' has no modalities", record.id),
            });
        }
        let mut lengths = record.modalities.iter().map(|(name, v)| (name, v.len()));
        let (first_name, first_len) = lengths.next().expect("nonempty map");
        for (name, len) in lengths {
            if len != first_len {
                return Err(CliError::Schema {
                    line,
                    message: format!(
                        "modality '{name}' has {len} logits but '{first_name}' has {first_len}"
                    ),
                });
            }
        }
        if first_len < 2 {
            return Err(CliError::Schema {
                line,
                message: format!("logit vectors need at least 2 classes, got {first_len}"),
            });
        }
        match class_count {
            None => class_count = Some((first_len, line)),
            Some((expected, fixed_at)) if expected != first_len => {
                return Err(CliError::Schema {
                    line,
                    message: format!(
                        "record has {first_len} classes but line {fixed_at} established {expected}"
                    ),
                });
            }
            Some(_) => {}
        }
        if let Some(label) = record.label {
            if label >= first_len {
                return Err(CliError::Schema {
                    line,
                    message: format!("label {label} out of range for {first_len} classes"),
                });
            }
        }
        records.push(LocatedRecord { line, record });
    }
    Ok(records)
}

/// An opinion as written to fused-output files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpinionRecord {
    pub beliefs: Vec<f64>,
    pub uncertainty: f64,
    pub predicted_class: usize,
}

impl From<&trustfuse_core::Opinion> for OpinionRecord {
    fn from(opinion: &trustfuse_core::Opinion) -> Self {
        Self {
            beliefs: opinion.beliefs().to_vec(),
            uncertainty: opinion.uncertainty(),
            predicted_class: opinion.predicted_class(),
        }
    }
}

/// One output line of the fuse command: per-modality opinions plus the fused
/// opinion, or a per-record error when combination is impossible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
    pub modalities: BTreeMap<String, OpinionRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fused: Option<OpinionRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Parses a fused-output file back in (the round-trip direction).
pub fn read_fused_records(path: &Path) -> Result<Vec<FusedRecord>> {
    let content = fs::read_to_string(path)?;
    let mut records = Vec::new();
    for (index, raw) in content.lines().enumerate() {
        if raw.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(raw).map_err(|e| CliError::Parse {
            line: index + 1,
            message: e.to_string(),
        })?);
    }
    Ok(records)
}
