//! Command-line surface: `score`, `schedule`, `train`, `report` and `synth`.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use spdcl_core::difficulty::{delta_scores, initial_scores, score_dump, DifficultyHistory};
use spdcl_core::{build_epoch_plan, AlignmentMode, CurriculumConfig, DeltaOrdering};

use crate::error::{Error, Result};
use crate::formats::{
    read_dataset, read_dump, read_scores, write_dataset, write_manifest, write_scores,
    PreparedData, RunConfigFile,
};
use crate::fsutil::{write_atomic, write_json};
use crate::report::{build_report, report_csv};
use crate::rundir::{train_run, RunMode};
use crate::synth::{generate, SynthSpec};

/// Self-paced dynamic curriculum learning toolkit.
///
/// Set SPDCL_LOG (error, warn, info, debug) to control log output.
#[derive(Debug, Parser)]
#[command(name = "spdcl", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Alignment {
    RankAligned,
    IdentityAligned,
}

impl From<Alignment> for AlignmentMode {
    fn from(a: Alignment) -> Self {
        match a {
            Alignment::RankAligned => AlignmentMode::RankAligned,
            Alignment::IdentityAligned => AlignmentMode::IdentityAligned,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Ordering {
    Magnitude,
    Signed,
}

impl From<Ordering> for DeltaOrdering {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Magnitude => DeltaOrdering::Magnitude,
            Ordering::Signed => DeltaOrdering::Signed,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score an embedding dump: raw nuclear norms at epoch 1, norm deltas
    /// against the previous epoch's score file afterwards.
    Score {
        #[arg(long)]
        embeddings: PathBuf,
        /// Score file of epoch N-1; required when N >= 2.
        #[arg(long)]
        prev_scores: Option<PathBuf>,
        #[arg(long)]
        epoch: u32,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "rank-aligned")]
        alignment: Alignment,
        #[arg(long, value_enum, default_value = "magnitude")]
        ordering: Ordering,
    },
    /// Turn a score file into the epoch's training manifest.
    Schedule {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        bins: usize,
        #[arg(long)]
        epoch: u32,
        #[arg(long, default_value_t = 2)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Present the visible bins in rank order instead of shuffling.
        #[arg(long)]
        no_shuffle: bool,
    },
    /// Train the toy classifier with the curriculum (or without, --baseline).
    Train {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        valid: PathBuf,
        /// JSON run configuration; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Plain full-data training without difficulty scoring.
        #[arg(long)]
        baseline: bool,
    },
    /// Aggregate a finished run directory into one JSON report.
    Report {
        #[arg(long)]
        run_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Finished baseline run to compare final metrics against.
        #[arg(long)]
        baseline_dir: Option<PathBuf>,
        /// Also write a per-epoch CSV table here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Write a synthetic long-tail dataset (train.jsonl, valid.jsonl).
    Synth {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 10)]
        classes: usize,
        #[arg(long, default_value_t = 1000)]
        train: usize,
        #[arg(long, default_value_t = 200)]
        valid: usize,
        #[arg(long, default_value_t = 2)]
        seed: u64,
        #[arg(long)]
        multilabel: bool,
        #[arg(long, default_value_t = 0.0)]
        label_noise: f64,
    },
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Score {
            embeddings,
            prev_scores,
            epoch,
            out,
            alignment,
            ordering,
        } => score(
            &embeddings,
            prev_scores.as_deref(),
            epoch,
            &out,
            alignment.into(),
            ordering.into(),
        ),
        Command::Schedule {
            scores,
            bins,
            epoch,
            seed,
            out,
            no_shuffle,
        } => schedule(&scores, bins, epoch, seed, &out, !no_shuffle),
        Command::Train {
            dataset,
            valid,
            config,
            out_dir,
            baseline,
        } => {
            let config = match config {
                Some(path) => RunConfigFile::load(&path)?,
                None => RunConfigFile::default(),
            };
            let mode = if baseline {
                RunMode::Baseline
            } else {
                RunMode::Spdcl
            };
            train(&dataset, &valid, &config, &out_dir, mode)
        }
        Command::Report {
            run_dir,
            out,
            baseline_dir,
            csv,
        } => {
            let report = build_report(&run_dir, baseline_dir.as_deref())?;
            write_json(&out, &report)?;
            if let Some(csv) = csv {
                write_atomic(&csv, report_csv(&report).as_bytes())?;
            }
            Ok(())
        }
        Command::Synth {
            out_dir,
            classes,
            train,
            valid,
            seed,
            multilabel,
            label_noise,
        } => {
            if classes < 2 || !(0.0..=1.0).contains(&label_noise) || train == 0 {
                return Err(Error::Validation(
                    "synth needs classes >= 2, train >= 1 and label_noise in [0, 1]".into(),
                ));
            }
            let spec = SynthSpec {
                classes,
                train,
                valid,
                seed,
                multilabel,
                label_noise,
                ..SynthSpec::default()
            };
            let (train, valid) = generate(&spec);
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            write_dataset(&out_dir.join("train.jsonl"), &train)?;
            write_dataset(&out_dir.join("valid.jsonl"), &valid)
        }
    }
}

pub fn score(
    embeddings: &Path,
    prev_scores: Option<&Path>,
    epoch: u32,
    out: &Path,
    alignment: AlignmentMode,
    ordering: DeltaOrdering,
) -> Result<()> {
    if epoch == 0 {
        return Err(Error::Validation("epochs are numbered from 1".into()));
    }
    let dump = read_dump(embeddings)?;
    let records = if epoch == 1 {
        initial_scores(&dump)?
    } else {
        let prev_path = prev_scores.ok_or_else(|| {
            Error::History(format!(
                "epoch {epoch} needs --prev-scores from epoch {}",
                epoch - 1
            ))
        })?;
        let prev = read_scores(prev_path)?;
        if prev[0].epoch != epoch - 1 {
            return Err(Error::History(format!(
                "previous scores are from epoch {}, expected {}",
                prev[0].epoch,
                epoch - 1
            )));
        }
        let mut history = DifficultyHistory::from_records(&prev)?;
        delta_scores(
            &score_dump(&dump)?,
            &mut history,
            epoch,
            alignment,
            ordering,
        )?
    };
    write_scores(out, &records)
}

pub fn schedule(
    scores: &Path,
    bins: usize,
    epoch: u32,
    seed: u64,
    out: &Path,
    shuffle: bool,
) -> Result<()> {
    let records = read_scores(scores)?;
    if records[0].epoch != epoch {
        return Err(Error::History(format!(
            "score file is for epoch {}, not {epoch}",
            records[0].epoch
        )));
    }
    let config = CurriculumConfig {
        bins_k: bins,
        total_epochs: epoch.max(bins as u32),
        shuffle_seed: seed,
        shuffle_within_epoch: shuffle,
        ..CurriculumConfig::default()
    };
    let plan = build_epoch_plan(&records, &config, epoch)?;
    write_manifest(out, &plan)
}

pub fn train(
    dataset: &Path,
    valid: &Path,
    config: &RunConfigFile,
    out_dir: &Path,
    mode: RunMode,
) -> Result<()> {
    let train_records = read_dataset(dataset)?;
    let valid_records = read_dataset(valid)?;
    config.validate(train_records.len())?;
    let data = PreparedData::new(
        &train_records,
        &valid_records,
        config.task_kind,
        config.max_len,
    )?;
    log::info!(
        "{} training samples, {} labels",
        data.train.len(),
        data.labels.len()
    );
    train_run(&data, config, out_dir, mode)?;
    Ok(())
}

/// Formats an error as the single stderr line the CLI prints.
pub fn error_line(err: &Error) -> String {
    let message = err.to_string().replace('\n', " ");
    format!("error: {}: {message}", err.category())
}
