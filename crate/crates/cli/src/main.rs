use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use trustfuse_cli::{cmd_ablation, cmd_eval, cmd_fuse, cmd_losses, cmd_noise, cmd_train};
use trustfuse_cli::{CliError, ThresholdArg};

/// Trusted multimodal classification: fuse per-modality predictions into
/// opinions with explicit uncertainty, evaluate them with trusted metrics,
/// and run the synthetic benchmark experiments.
#[derive(Parser, Debug)]
#[command(name = "trustfuse", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fuse per-modality logits into opinions, one JSON line per record.
    Fuse {
        /// Line-delimited prediction records.
        #[arg(long)]
        input: PathBuf,
        /// Fused-opinion output file.
        #[arg(long)]
        output: PathBuf,
    },
    /// Evaluate labeled records with trusted metrics.
    Eval {
        /// Line-delimited prediction records; every record needs a label.
        #[arg(long)]
        input: PathBuf,
        /// Report output file (stdout when omitted).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Uncertainty cutoff: 'auto' selects it from each source's P-R curve.
        #[arg(long, default_value = "auto")]
        threshold: String,
        /// Optional TSV export of the fused source's trusted P-R curve.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Train on the configured synthetic dataset; write the epoch history.
    Train {
        #[arg(long)]
        config: PathBuf,
        /// History TSV output file.
        #[arg(long)]
        output: PathBuf,
        /// Overrides the config's dataset and training seeds.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare video-only, audio-only, and fused on a held-out split.
    Ablation {
        #[arg(long)]
        config: PathBuf,
        /// Report output file.
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train once per loss function; write all histories as one TSV.
    Losses {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate a clean-trained model under increasing audio noise.
    Noise {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fuse { input, output } => {
            cmd_fuse(&input, &output)?;
        }
        Command::Eval {
            input,
            output,
            threshold,
            curve,
        } => {
            let threshold = ThresholdArg::parse(&threshold)?;
            cmd_eval(&input, threshold, output.as_deref(), curve.as_deref())?;
        }
        Command::Train {
            config,
            output,
            seed,
        } => cmd_train(&config, &output, seed)?,
        Command::Ablation {
            config,
            output,
            seed,
        } => {
            cmd_ablation(&config, &output, seed)?;
        }
        Command::Losses {
            config,
            output,
            seed,
        } => cmd_losses(&config, &output, seed)?,
        Command::Noise {
            config,
            output,
            seed,
        } => cmd_noise(&config, &output, seed)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
