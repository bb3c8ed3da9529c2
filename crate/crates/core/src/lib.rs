//! Self-paced dynamic curriculum learning primitives.
//!
//! Everything in this crate is pure computation over in-memory data and builds
//! without `std`: nuclear-norm scoring of token-embedding matrices, epoch-wise
//! difficulty ranking, bin-based pacing schedules, a small bag-of-embeddings
//! classifier that drives the loop, and imbalanced-classification metrics.
//! File formats and the command-line tool live in the `spdcl` crate.

#![no_std]

extern crate alloc;

pub mod difficulty;
pub mod error;
pub mod metrics;
pub mod nucnorm;
pub mod scheduler;
pub mod trainer;

pub use difficulty::{
    delta_scores, initial_scores, rank_samples, AlignmentMode, DeltaOrdering, DifficultyHistory,
    DifficultyRecord,
};
pub use error::{Error, Result};
pub use metrics::{EvalReport, LabelMatrix};
pub use nucnorm::{nuclear_norm, singular_values, EmbeddingMatrix, SingularSpectrum};
pub use scheduler::{
    build_epoch_plan, full_data_plan, partition_bins, visible_set, CurriculumConfig, EpochPlan,
};
pub use trainer::{
    run_baseline, run_spdcl, Example, ModelParams, RunConfig, RunObserver, RunOutput, Target,
    TaskKind, TrainStats, Vocabulary,
};
