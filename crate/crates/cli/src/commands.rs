//! The six subcommands, written as library functions so tests can drive them
//! directly. Every command is deterministic: identical inputs and flags
//! produce identical output bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use trustfuse_core::experiment::{run_ablation, run_loss_comparison, run_noise_sweep};
use trustfuse_core::metrics::{
    confusion, plain_metrics, pr_curve, select_threshold, trusted_accuracy, trusted_f1,
    trusted_precision, trusted_recall, PrCurve, TrustedPrediction,
};
use trustfuse_core::train::{train, TrainHistory};
use trustfuse_core::{combine_many, generate_synthetic, Logits, Opinion};

use crate::config::load_config;
use crate::error::{CliError, Result};
use crate::records::{read_records, FusedRecord, LocatedRecord, OpinionRecord};
use crate::report::{EvaluationReport, SourceBlock};

/// Uncertainty cutoff selection for `eval`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdArg {
    /// Pick the cutoff from each source's own trusted P-R curve.
    Auto,
    /// Use one fixed cutoff for every source.
    Fixed(f64),
}

impl ThresholdArg {
    /// Parses the `--threshold` flag value.
    pub fn parse(raw: &str) -> Result<Self> {
        if raw == "auto" {
            return Ok(ThresholdArg::Auto);
        }
        let value: f64 = raw.parse().map_err(|_| {
            CliError::Usage(format!(
                "--threshold must be 'auto' or a number, got '{raw}'"
            ))
        })?;
        if !(0.0..=1.0).contains(&value) {
            return Err(CliError::Usage(format!(
                "--threshold must lie in [0, 1], got {value}"
            )));
        }
        Ok(ThresholdArg::Fixed(value))
    }
}

fn opinions_for_record(record: &LocatedRecord) -> Result<BTreeMap<String, Opinion>> {
    record
        .record
        .modalities
        .iter()
        .map(|(name, logits)| {
            let logits = Logits::new(logits.clone()).map_err(|e| CliError::Schema {
                line: record.line,
                message: e.to_string(),
            })?;
            Ok((name.clone(), Opinion::from_logits(&logits)))
        })
        .collect()
}

/// Turns each record's per-modality logits into opinions, fuses them, and
/// writes one JSON line per record. A record whose opinions cannot be
/// combined carries an error field instead of sinking the whole run.
pub fn cmd_fuse(input: &Path, output: &Path) -> Result<usize> {
    let records = read_records(input)?;
    let mut out = String::new();
    for located in &records {
        let opinions = opinions_for_record(located)?;
        let ordered: Vec<Opinion> = opinions.values().cloned().collect();
        let (fused, error) = match combine_many(&ordered) {
            Ok(fused) => (Some(OpinionRecord::from(&fused)), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let fused_record = FusedRecord {
            id: located.record.id.clone(),
            label: located.record.label,
            modalities: opinions
                .iter()
                .map(|(name, op)| (name.clone(), OpinionRecord::from(op)))
                .collect(),
            fused,
            error,
        };
        let line = serde_json::to_string(&fused_record).expect("record serializes");
        out.push_str(&line);
        out.push('\n');
    }
    fs::write(output, out)?;
    Ok(records.len())
}

/// Per-source predictions: every modality name plus "fused", in that order.
fn predictions_by_source(
    records: &[LocatedRecord],
) -> Result<Vec<(String, Vec<TrustedPrediction>)>> {
    let mut sources: Vec<(String, Vec<TrustedPrediction>)> = Vec::new();
    for located in records {
        let label = located
            .record
            .label
            .ok_or_else(|| CliError::MissingLabels {
                id: located.record.id.clone(),
                line: located.line,
            })?;
        let opinions = opinions_for_record(located)?;
        let ordered: Vec<Opinion> = opinions.values().cloned().collect();
        let fused = combine_many(&ordered).map_err(CliError::Numerical)?;
        if sources.is_empty() {
            for name in opinions.keys() {
                sources.push((name.clone(), Vec::with_capacity(records.len())));
            }
            sources.push(("fused".to_string(), Vec::with_capacity(records.len())));
        } else {
            // Per-source accumulation needs one shared modality set.
            let matches = sources.len() == opinions.len() + 1
                && sources.iter().zip(opinions.keys()).all(|(s, k)| &s.0 == k);
            if !matches {
                return Err(CliError::Schema {
                    line: located.line,
                    message: format!(
                        "record '{}' has modalities [{}] but earlier records had [{}]",
                        located.record.id,
                        opinions.keys().cloned().collect::<Vec<_>>().join(", "),
                        sources[..sources.len() - 1]
                            .iter()
                            .map(|(n, _)| n.clone())
                            .collect::<Vec<_>>()
                            .join(", ")
                    ),
                });
            }
        }
        for (slot, opinion) in sources
            .iter_mut()
            .zip(opinions.values().chain(std::iter::once(&fused)))
        {
            slot.1.push(TrustedPrediction::new(
                opinion.predicted_class(),
                label,
                opinion.uncertainty(),
            ));
        }
    }
    Ok(sources)
}

fn block_for(
    name: &str,
    predictions: &[TrustedPrediction],
    threshold: ThresholdArg,
) -> Result<SourceBlock> {
    let plain = plain_metrics(predictions).map_err(CliError::Numerical)?;
    let cutoff = match threshold {
        ThresholdArg::Fixed(value) => value,
        ThresholdArg::Auto => {
            select_threshold(&pr_curve(predictions).map_err(CliError::Numerical)?)
                .map_err(CliError::Numerical)?
        }
    };
    let counts = confusion(predictions, cutoff).map_err(CliError::Numerical)?;
    let tp = trusted_precision(&counts);
    let tr = trusted_recall(&counts);
    let f1 = match (tp, tr) {
        (Some(tp), Some(tr)) => Some(trusted_f1(tp, tr)),
        _ => None,
    };
    Ok(SourceBlock::from_parts(
        name.to_string(),
        plain,
        trusted_accuracy(&counts),
        f1,
        cutoff,
        counts,
    ))
}

fn curve_to_tsv(curve: &PrCurve) -> String {
    let mut out = String::from("threshold\ttrusted_recall\ttrusted_precision\n");
    for point in curve.points() {
        writeln!(
            out,
            "{}\t{}\t{}",
            point.threshold, point.trusted_recall, point.trusted_precision
        )
        .expect("string write");
    }
    out
}

/// Evaluates labeled records with trusted metrics, one block per source.
/// With [`ThresholdArg::Auto`] each source gets the cutoff from its own
/// trusted P-R curve. The fused source's curve is exported when requested.
pub fn cmd_eval(
    input: &Path,
    threshold: ThresholdArg,
    output: Option<&Path>,
    curve_output: Option<&Path>,
) -> Result<EvaluationReport> {
    let records = read_records(input)?;
    if records.is_empty() {
        return Err(CliError::Schema {
            line: 0,
            message: "input contains no records".into(),
        });
    }
    let sources = predictions_by_source(&records)?;
    let blocks = sources
        .iter()
        .map(|(name, preds)| block_for(name, preds, threshold))
        .collect::<Result<Vec<_>>>()?;
    let report = EvaluationReport { sources: blocks };

    if let Some(path) = curve_output {
        let fused = &sources.last().expect("fused source always present").1;
        let curve = pr_curve(fused).map_err(CliError::Numerical)?;
        fs::write(path, curve_to_tsv(&curve))?;
    }
    match output {
        Some(path) => fs::write(path, report.to_json_string())?,
        None => print!("{}", report.to_json_string()),
    }
    Ok(report)
}

fn history_rows(out: &mut String, prefix: &str, history: &TrainHistory) {
    for r in &history.records {
        writeln!(
            out,
            "{prefix}{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.epoch,
            r.overall_loss,
            r.video_loss,
            r.audio_loss,
            r.combined_loss,
            r.accuracy,
            r.mean_fused_uncertainty
        )
        .expect("string write");
    }
}

/// Trains on the configured synthetic dataset and writes the per-epoch
/// history as TSV.
pub fn cmd_train(config_path: &Path, output: &Path, seed: Option<u64>) -> Result<()> {
    let mut config = load_config(config_path)?;
    config.override_seed(seed);
    let dataset = generate_synthetic(&config.synthetic).map_err(CliError::Numerical)?;
    let (_, history) = train(&dataset, &config.train).map_err(CliError::Numerical)?;
    let mut out = String::from(
        "epoch\toverall_loss\tvideo_loss\taudio_loss\tcombined_loss\taccuracy\tmean_fused_uncertainty\n",
    );
    history_rows(&mut out, "", &history);
    fs::write(output, out)?;
    Ok(())
}

/// Runs the unimodal-vs-fused ablation and writes the evaluation report.
pub fn cmd_ablation(
    config_path: &Path,
    output: &Path,
    seed: Option<u64>,
) -> Result<EvaluationReport> {
    let mut config = load_config(config_path)?;
    config.override_seed(seed);
    let dataset = generate_synthetic(&config.synthetic).map_err(CliError::Numerical)?;
    let ablation = run_ablation(&dataset, &config.train).map_err(CliError::Numerical)?;
    let report = EvaluationReport::from(&ablation);
    fs::write(output, report.to_json_string())?;
    Ok(report)
}

/// Trains once per loss function and writes all histories as one TSV with a
/// leading variant column.
pub fn cmd_losses(config_path: &Path, output: &Path, seed: Option<u64>) -> Result<()> {
    let mut config = load_config(config_path)?;
    config.override_seed(seed);
    let dataset = generate_synthetic(&config.synthetic).map_err(CliError::Numerical)?;
    let runs = run_loss_comparison(&dataset, &config.train).map_err(CliError::Numerical)?;
    let mut out = String::from(
        "variant\tepoch\toverall_loss\tvideo_loss\taudio_loss\tcombined_loss\taccuracy\tmean_fused_uncertainty\n",
    );
    for run in &runs {
        history_rows(&mut out, &format!("{}\t", run.loss.name()), &run.history);
    }
    fs::write(output, out)?;
    Ok(())
}

/// Runs the audio noise sweep and writes one TSV row per level.
pub fn cmd_noise(config_path: &Path, output: &Path, seed: Option<u64>) -> Result<()> {
    let mut config = load_config(config_path)?;
    config.override_seed(seed);
    if config.noise_levels.len() < 3 {
        return Err(CliError::Config(format!(
            "noise_levels: need at least 3 levels, got {}",
            config.noise_levels.len()
        )));
    }
    let points = run_noise_sweep(&config.synthetic, &config.train, &config.noise_levels)
        .map_err(CliError::Numerical)?;
    let mut out = String::from("sigma\tmean_audio_uncertainty\taudio_accuracy\tfused_accuracy\n");
    for p in &points {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            p.sigma, p.mean_audio_uncertainty, p.audio_accuracy, p.fused_accuracy
        )
        .expect("string write");
    }
    fs::write(output, out)?;
    Ok(())
}
