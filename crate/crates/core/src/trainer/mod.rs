//! Desk-scale text classifier that exercises the curriculum loop end to end.

mod model;
mod run;
mod vocab;

pub use model::{sigmoid, softmax, Gradients, ModelParams, Target, TaskKind};
pub use run::{
    embedding_dump, evaluate, predict_matrix, run_baseline, run_spdcl, train_epoch, truth_matrix,
    EpochSummary, Example, NoopObserver, RunConfig, RunObserver, RunOutput, TrainStats,
};
pub use vocab::{Vocabulary, PAD, UNK};
