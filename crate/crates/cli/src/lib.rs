//! Command-line front end for the trusted multimodal classification stack:
//! record parsing, evaluation reports, and the experiment subcommands.

pub mod commands;
pub mod config;
pub mod error;
pub mod records;
pub mod report;

pub use commands::{
    cmd_ablation, cmd_eval, cmd_fuse, cmd_losses, cmd_noise, cmd_train, ThresholdArg,
};
pub use config::{load_config, RunConfig};
pub use error::{CliError, Result};
pub use records::{read_fused_records, read_records, FusedRecord, OpinionRecord, PredictionRecord};
pub use report::{EvaluationReport, SourceBlock};
