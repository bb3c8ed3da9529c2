use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::time::Duration;

use super::model::{clear_gradients, new_gradients, ModelParams, Target, TaskKind};
use crate::difficulty::{
    delta_scores, initial_scores_from_norms, score_dump, DifficultyHistory, DifficultyRecord,
};
use crate::error::{Error, Result};
use crate::metrics::{label_frequency_groups, EvalReport, LabelMatrix};
use crate::nucnorm::EmbeddingMatrix;
use crate::scheduler::{build_epoch_plan, full_data_plan, CurriculumConfig, EpochPlan};

/// One tokenized training or validation sample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub id: String,
    pub tokens: Vec<u32>,
    pub target: Target,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub curriculum: CurriculumConfig,
    pub lr: f64,
    pub batch: usize,
    pub hidden_d: usize,
    pub task: TaskKind,
    /// Sigmoid cut-off for multi-label predictions.
    pub threshold: f64,
    /// Number of label-frequency groups in the long-tail breakdown.
    pub n_groups: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            curriculum: CurriculumConfig::default(),
            lr: 0.1,
            batch: 25,
            hidden_d: 16,
            task: TaskKind::Multiclass,
            threshold: 0.5,
            n_groups: 4,
        }
    }
}

impl RunConfig {
    pub fn validate(&self, n_train: usize) -> Result<()> {
        self.curriculum.validate(n_train)?;
        if !(self.lr.is_finite() && self.lr >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "lr must be finite and >= 0, got {}",
                self.lr
            )));
        }
        if self.batch == 0 {
            return Err(Error::InvalidConfig("batch must be at least 1".into()));
        }
        if self.hidden_d == 0 {
            return Err(Error::InvalidConfig("hidden_d must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::InvalidConfig(format!(
                "threshold must lie in [0, 1], got {}",
                self.threshold
            )));
        }
        if self.n_groups == 0 {
            return Err(Error::InvalidConfig("n_groups must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainStats {
    pub epoch: u32,
    pub mean_loss: f64,
    pub samples_seen: usize,
    /// Filled in by callers that own a clock.
    pub wall_time: Option<Duration>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochSummary {
    pub stats: TrainStats,
    pub eval: EvalReport,
}

/// Hooks called while a run progresses, in the order dump, scores, plan,
/// epoch end, and finally `on_finish`. Baseline runs skip dump and scores.
pub trait RunObserver {
    type Error: From<Error>;

    fn on_dump(&mut self, _epoch: u32, _dump: &[EmbeddingMatrix]) -> Result<(), Self::Error> {
        Ok(())
    }

    fn on_scores(&mut self, _epoch: u32, _records: &[DifficultyRecord]) -> Result<(), Self::Error> {
        Ok(())
    }

    fn on_plan(&mut self, _plan: &EpochPlan) -> Result<(), Self::Error> {
        Ok(())
    }

    fn on_epoch_end(&mut self, _summary: &EpochSummary) -> Result<(), Self::Error> {
        Ok(())
    }

    fn on_finish(&mut self, _params: &ModelParams) -> Result<(), Self::Error> {
        Ok(())
    }
}

/// Observer that ignores every event.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoopObserver;

impl RunObserver for NoopObserver {
    type Error = Error;
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub params: ModelParams,
    pub epochs: Vec<EpochSummary>,
    pub plans: Vec<EpochPlan>,
    /// Label-frequency groups the per-group F1 refers to.
    pub groups: Vec<Vec<usize>>,
}

/// Plain mini-batch SGD over `plan.ordered_ids` in order. Each batch takes
/// the mean gradient of its samples; the last batch may be short.
pub fn train_epoch(
    params: &ModelParams,
    plan: &EpochPlan,
    dataset: &[Example],
    lr: f64,
    batch: usize,
) -> Result<(ModelParams, TrainStats)> {
    if batch == 0 {
        return Err(Error::InvalidConfig("batch must be at least 1".into()));
    }
    let index: BTreeMap<&str, &Example> = dataset.iter().map(|e| (e.id.as_str(), e)).collect();
    let examples = plan
        .ordered_ids
        .iter()
        .map(|id| {
            index
                .get(id.as_str())
                .copied()
                .ok_or_else(|| Error::MissingSample(id.clone()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut params = params.clone();
    let mut grads = new_gradients(&params);
    let mut total_loss = 0.0;
    for chunk in examples.chunks(batch) {
        clear_gradients(&mut grads);
        let weight = 1.0 / chunk.len() as f64;
        for ex in chunk {
            total_loss += params.accumulate_grad(&ex.tokens, &ex.target, weight, &mut grads)?;
        }
        params.apply(&grads, lr);
    }
    let samples_seen = examples.len();
    let mean_loss = if samples_seen == 0 {
        0.0
    } else {
        total_loss / samples_seen as f64
    };
    Ok((
        params,
        TrainStats {
            epoch: plan.epoch,
            mean_loss,
            samples_seen,
            wall_time: None,
        },
    ))
}

/// Label matrix of the examples' targets (multiclass targets one-hot).
pub fn truth_matrix(examples: &[Example], task: TaskKind, n_labels: usize) -> Result<LabelMatrix> {
    match task {
        TaskKind::Multiclass => {
            let classes = examples
                .iter()
                .map(|e| match e.target {
                    Target::Class(c) => Ok(c),
                    _ => Err(Error::InvalidTarget(format!(
                        "`{}` is not single-label",
                        e.id
                    ))),
                })
                .collect::<Result<Vec<_>>>()?;
            LabelMatrix::from_class_indices(&classes, n_labels)
        }
        TaskKind::Multilabel => {
            let mut data = Vec::with_capacity(examples.len() * n_labels);
            for e in examples {
                match &e.target {
                    Target::Labels(y) if y.len() == n_labels => data.extend_from_slice(y),
                    _ => {
                        return Err(Error::InvalidTarget(format!(
                            "`{}` needs a {n_labels}-label target",
                            e.id
                        )))
                    }
                }
            }
            LabelMatrix::new(examples.len(), n_labels, data)
        }
    }
}

pub fn predict_matrix(
    params: &ModelParams,
    examples: &[Example],
    threshold: f64,
) -> Result<LabelMatrix> {
    let mut data = Vec::with_capacity(examples.len() * params.n_labels);
    for e in examples {
        data.extend(params.predict(&e.tokens, threshold)?);
    }
    LabelMatrix::new(examples.len(), params.n_labels, data)
}

pub fn evaluate(
    params: &ModelParams,
    examples: &[Example],
    groups: &[Vec<usize>],
    threshold: f64,
) -> Result<EvalReport> {
    let truth = truth_matrix(examples, params.task, params.n_labels)?;
    let pred = predict_matrix(params, examples, threshold)?;
    let binary = params.task == TaskKind::Multiclass && params.n_labels == 2;
    EvalReport::compute(&truth, &pred, groups, binary)
}

/// Embedding matrix of every sample, rounded to the `f32` precision dumps
/// are stored at.
pub fn embedding_dump(params: &ModelParams, examples: &[Example]) -> Result<Vec<EmbeddingMatrix>> {
    examples
        .iter()
        .map(|e| Ok(params.embed_sample(&e.id, &e.tokens)?.quantized_f32()))
        .collect()
}

fn frequency_groups(
    train: &[Example],
    config: &RunConfig,
    n_labels: usize,
) -> Result<Vec<Vec<usize>>> {
    let truth = truth_matrix(train, config.task, n_labels)?;
    label_frequency_groups(&truth, config.n_groups.min(n_labels))
}

/// Self-paced dynamic curriculum run.
///
/// Every epoch re-scores the training set from the current embeddings
/// (raw nuclear norm at epoch 1, norm delta afterwards), rebuilds the bins,
/// trains on the visible bins and evaluates on `valid`. Scores for epoch `t`
/// are taken before epoch `t` trains.
pub fn run_spdcl<O: RunObserver>(
    train: &[Example],
    valid: &[Example],
    vocab_size: usize,
    n_labels: usize,
    config: &RunConfig,
    observer: &mut O,
) -> Result<RunOutput, O::Error> {
    run(train, valid, vocab_size, n_labels, config, observer, true)
}

/// Full-data training with the same initialization and per-epoch shuffle as
/// [`run_spdcl`], without any difficulty scoring.
pub fn run_baseline<O: RunObserver>(
    train: &[Example],
    valid: &[Example],
    vocab_size: usize,
    n_labels: usize,
    config: &RunConfig,
    observer: &mut O,
) -> Result<RunOutput, O::Error> {
    run(train, valid, vocab_size, n_labels, config, observer, false)
}

fn run<O: RunObserver>(
    train: &[Example],
    valid: &[Example],
    vocab_size: usize,
    n_labels: usize,
    config: &RunConfig,
    observer: &mut O,
    curriculum: bool,
) -> Result<RunOutput, O::Error> {
    config.validate(train.len())?;
    let cc = &config.curriculum;
    let groups = frequency_groups(train, config, n_labels)?;
    let mut params = ModelParams::init(
        config.task,
        vocab_size,
        config.hidden_d,
        n_labels,
        cc.shuffle_seed,
    )?;
    let train_ids: Vec<String> = train.iter().map(|e| e.id.clone()).collect();

    let mut history: Option<DifficultyHistory> = None;
    let mut epochs = Vec::new();
    let mut plans = Vec::new();
    for epoch in 1..=cc.total_epochs {
        let plan = if curriculum {
            let dump = embedding_dump(&params, train)?;
            observer.on_dump(epoch, &dump)?;
            let norms = score_dump(&dump)?;
            let records = match history.as_mut() {
                None => {
                    history = Some(DifficultyHistory::new(epoch, &norms)?);
                    initial_scores_from_norms(&norms)?
                }
                Some(h) => delta_scores(&norms, h, epoch, cc.alignment, cc.delta_ordering)?,
            };
            observer.on_scores(epoch, &records)?;
            build_epoch_plan(&records, cc, epoch)?
        } else {
            full_data_plan(&train_ids, cc, epoch)?
        };
        observer.on_plan(&plan)?;

        let (next, stats) = train_epoch(&params, &plan, train, config.lr, config.batch)?;
        params = next;
        if !params.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "parameters diverged in epoch {epoch}; lower the learning rate"
            ))
            .into());
        }
        let eval = evaluate(&params, valid, &groups, config.threshold)?;
        let summary = EpochSummary { stats, eval };
        observer.on_epoch_end(&summary)?;
        epochs.push(summary);
        plans.push(plan);
    }
    observer.on_finish(&params)?;
    Ok(RunOutput {
        params,
        epochs,
        plans,
        groups,
    })
}
