use std::path::Path;

use serde::{Deserialize, Serialize};
use spdcl_core::{AlignmentMode, CurriculumConfig, DeltaOrdering, RunConfig, TaskKind};

use crate::error::{Error, Result};
use crate::fsutil::read_json;

/// JSON run configuration. Missing keys take the defaults below; unknown
/// keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfigFile {
    pub bins_k: usize,
    #[serde(rename = "epochs_T")]
    pub epochs_t: u32,
    pub seed: u64,
    pub lr: f64,
    pub batch: usize,
    pub hidden_d: usize,
    pub max_len: usize,
    pub task_kind: TaskKind,
    pub alignment_mode: AlignmentMode,
    pub delta_ordering: DeltaOrdering,
    pub shuffle_within_epoch: bool,
    pub threshold: f64,
    pub n_groups: usize,
}

impl Default for RunConfigFile {
    fn default() -> Self {
        Self {
            bins_k: 5,
            epochs_t: 10,
            seed: 2,
            lr: 0.1,
            batch: 25,
            hidden_d: 16,
            max_len: 250,
            task_kind: TaskKind::Multiclass,
            alignment_mode: AlignmentMode::RankAligned,
            delta_ordering: DeltaOrdering::Magnitude,
            shuffle_within_epoch: true,
            threshold: 0.5,
            n_groups: 4,
        }
    }
}

impl RunConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    pub fn to_run_config(&self) -> RunConfig {
        RunConfig {
            curriculum: CurriculumConfig {
                bins_k: self.bins_k,
                total_epochs: self.epochs_t,
                shuffle_seed: self.seed,
                alignment: self.alignment_mode,
                delta_ordering: self.delta_ordering,
                shuffle_within_epoch: self.shuffle_within_epoch,
            },
            lr: self.lr,
            batch: self.batch,
            hidden_d: self.hidden_d,
            task: self.task_kind,
            threshold: self.threshold,
            n_groups: self.n_groups,
        }
    }

    /// Checks every field against a training set of `n_train` samples.
    pub fn validate(&self, n_train: usize) -> Result<()> {
        if self.max_len == 0 {
            return Err(Error::Validation("max_len must be at least 1".into()));
        }
        self.to_run_config()
            .validate(n_train)
            .map_err(|e| Error::Validation(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_names() {
        let c: RunConfigFile = serde_json::from_str(
            r#"{"bins_k": 3, "epochs_T": 7, "task_kind": "multilabel", "alignment_mode": "identity-aligned", "delta_ordering": "signed"}"#,
        )
        .unwrap();
        assert_eq!(c.bins_k, 3);
        assert_eq!(c.epochs_t, 7);
        assert_eq!(c.task_kind, TaskKind::Multilabel);
        assert_eq!(c.alignment_mode, AlignmentMode::IdentityAligned);
        assert_eq!(c.delta_ordering, DeltaOrdering::Signed);
        assert_eq!((c.seed, c.batch, c.max_len), (2, 25, 250));
    }

    #[test]
    fn rejects_unknown_and_invalid() {
        assert!(serde_json::from_str::<RunConfigFile>(r#"{"bins": 3}"#).is_err());
        let c = RunConfigFile {
            bins_k: 20,
            ..Default::default()
        };
        assert!(matches!(c.validate(10), Err(Error::Validation(_))));
        let c = RunConfigFile {
            max_len: 0,
            ..Default::default()
        };
        assert!(c.validate(10).is_err());
        assert!(RunConfigFile::default().validate(10).is_ok());
    }
}
