//! Layout of a training run directory and the observer that fills it.
//!
//! ```text
//! run.json              mode, epoch count, label names, frequency groups
//! config.json           effective run configuration
//! vocab.json            vocabulary words in id order (ids start at 2)
//! dump_NNN.bin          embeddings scored before epoch NNN (curriculum runs)
//! scores_NNN.jsonl      difficulty records of epoch NNN (curriculum runs)
//! manifest_NNN.jsonl    training order of epoch NNN
//! report_NNN.jsonl      training loss and validation metrics after epoch NNN
//! timing.jsonl          wall-clock time per epoch (not reproducible)
//! params.bin            final parameters
//! ```
//! `run.json` is written last and marks the run as complete.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use spdcl_core::difficulty::DifficultyRecord;
use spdcl_core::trainer::EpochSummary;
use spdcl_core::{
    run_baseline, run_spdcl, EmbeddingMatrix, EpochPlan, ModelParams, RunObserver, RunOutput,
};

use crate::error::{Error, Result};
use crate::formats::{
    write_dump, write_manifest, write_params, write_scores, PreparedData, RunConfigFile,
};
use crate::fsutil::{write_json, write_jsonl};

#[derive(Debug, Clone)]
pub struct RunLayout {
    dir: PathBuf,
}

impl RunLayout {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn meta(&self) -> PathBuf {
        self.dir.join("run.json")
    }

    pub fn config(&self) -> PathBuf {
        self.dir.join("config.json")
    }

    pub fn vocab(&self) -> PathBuf {
        self.dir.join("vocab.json")
    }

    pub fn params(&self) -> PathBuf {
        self.dir.join("params.bin")
    }

    pub fn timing(&self) -> PathBuf {
        self.dir.join("timing.jsonl")
    }

    pub fn dump(&self, epoch: u32) -> PathBuf {
        self.dir.join(format!("dump_{epoch:03}.bin"))
    }

    pub fn scores(&self, epoch: u32) -> PathBuf {
        self.dir.join(format!("scores_{epoch:03}.jsonl"))
    }

    pub fn manifest(&self, epoch: u32) -> PathBuf {
        self.dir.join(format!("manifest_{epoch:03}.jsonl"))
    }

    pub fn report(&self, epoch: u32) -> PathBuf {
        self.dir.join(format!("report_{epoch:03}.jsonl"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Spdcl,
    Baseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub mode: RunMode,
    pub epochs: u32,
    pub labels: Vec<String>,
    /// Label indices per frequency group, most frequent group first.
    pub groups: Vec<Vec<usize>>,
}

/// One line of `report_NNN.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochReportRecord {
    pub epoch: u32,
    pub mean_loss: f64,
    pub samples_seen: usize,
    pub visible_bins: usize,
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub hamming_loss: f64,
    pub subset_accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matthews: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binary_f1: Option<f64>,
    pub group_macro_f1: Vec<f64>,
}

impl EpochReportRecord {
    fn new(summary: &EpochSummary, visible_bins: usize) -> Self {
        let e = &summary.eval;
        Self {
            epoch: summary.stats.epoch,
            mean_loss: summary.stats.mean_loss,
            samples_seen: summary.stats.samples_seen,
            visible_bins,
            micro_f1: e.micro_f1,
            macro_f1: e.macro_f1,
            hamming_loss: e.hamming_loss,
            subset_accuracy: e.subset_accuracy,
            matthews: e.matthews,
            binary_f1: e.binary_f1,
            group_macro_f1: e.group_macro_f1.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TimingRecord {
    epoch: u32,
    seconds: f64,
}

/// Persists every artifact of a run as it is produced.
pub struct RunDirObserver {
    layout: RunLayout,
    epoch_started: Option<Instant>,
    visible_bins: usize,
    timings: Vec<TimingRecord>,
}

impl RunDirObserver {
    pub fn new(layout: RunLayout) -> Self {
        Self {
            layout,
            epoch_started: None,
            visible_bins: 0,
            timings: Vec::new(),
        }
    }
}

impl RunObserver for RunDirObserver {
    type Error = Error;

    fn on_dump(&mut self, epoch: u32, dump: &[EmbeddingMatrix]) -> Result<()> {
        self.epoch_started = Some(Instant::now());
        write_dump(&self.layout.dump(epoch), dump)
    }

    fn on_scores(&mut self, epoch: u32, records: &[DifficultyRecord]) -> Result<()> {
        write_scores(&self.layout.scores(epoch), records)
    }

    fn on_plan(&mut self, plan: &EpochPlan) -> Result<()> {
        self.epoch_started.get_or_insert_with(Instant::now);
        self.visible_bins = plan.visible_bins;
        write_manifest(&self.layout.manifest(plan.epoch), plan)
    }

    fn on_epoch_end(&mut self, summary: &EpochSummary) -> Result<()> {
        let epoch = summary.stats.epoch;
        let record = EpochReportRecord::new(summary, self.visible_bins);
        write_jsonl(&self.layout.report(epoch), &[record])?;
        let seconds = self
            .epoch_started
            .take()
            .map_or(0.0, |t| t.elapsed().as_secs_f64());
        log::info!(
            "epoch {epoch}: loss {:.4}, micro-F1 {:.4}, {} samples, {seconds:.3}s",
            summary.stats.mean_loss,
            summary.eval.micro_f1,
            summary.stats.samples_seen
        );
        self.timings.push(TimingRecord { epoch, seconds });
        write_jsonl(&self.layout.timing(), &self.timings)
    }

    fn on_finish(&mut self, params: &ModelParams) -> Result<()> {
        write_params(&self.layout.params(), params)
    }
}

/// Trains into `out_dir`, which must be empty or not yet exist.
pub fn train_run(
    data: &PreparedData,
    config: &RunConfigFile,
    out_dir: &Path,
    mode: RunMode,
) -> Result<RunOutput> {
    config.validate(data.train.len())?;
    prepare_out_dir(out_dir)?;
    let layout = RunLayout::new(out_dir);
    write_json(&layout.config(), config)?;
    write_json(&layout.vocab(), &data.vocab.words().collect::<Vec<_>>())?;

    let run_config = config.to_run_config();
    let mut observer = RunDirObserver::new(layout.clone());
    let (vocab, labels) = (data.vocab.len(), data.labels.len());
    let output = match mode {
        RunMode::Spdcl => run_spdcl(
            &data.train,
            &data.valid,
            vocab,
            labels,
            &run_config,
            &mut observer,
        )?,
        RunMode::Baseline => run_baseline(
            &data.train,
            &data.valid,
            vocab,
            labels,
            &run_config,
            &mut observer,
        )?,
    };
    let meta = RunMeta {
        mode,
        epochs: config.epochs_t,
        labels: data.labels.names().to_vec(),
        groups: output.groups.clone(),
    };
    write_json(&layout.meta(), &meta)?;
    Ok(output)
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    match fs::read_dir(dir) {
        Ok(mut entries) => {
            if entries.next().is_some() {
                return Err(Error::Validation(format!(
                    "output directory {} is not empty",
                    dir.display()
                )));
            }
            Ok(())
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
        }
        Err(e) => Err(Error::io(dir, e)),
    }
}
