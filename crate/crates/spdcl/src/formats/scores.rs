use std::path::Path;

use serde::{Deserialize, Serialize};
use spdcl_core::{rank_samples, DifficultyRecord};

use crate::error::{Error, Result};
use crate::fsutil::{read_jsonl, write_jsonl};

/// One line of a score file. `norm` is the raw nuclear norm, which the next
/// epoch's delta is computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRecord {
    pub id: String,
    pub epoch: u32,
    pub score: f64,
    pub rank: usize,
    pub norm: f64,
}

impl From<&DifficultyRecord> for ScoreRecord {
    fn from(r: &DifficultyRecord) -> Self {
        Self {
            id: r.sample_id.clone(),
            epoch: r.epoch,
            score: r.score,
            rank: r.rank,
            norm: r.norm,
        }
    }
}

impl From<ScoreRecord> for DifficultyRecord {
    fn from(r: ScoreRecord) -> Self {
        Self {
            sample_id: r.id,
            epoch: r.epoch,
            score: r.score,
            norm: r.norm,
            rank: r.rank,
        }
    }
}

/// Writes records easiest first.
pub fn write_scores(path: &Path, records: &[DifficultyRecord]) -> Result<()> {
    let mut lines: Vec<ScoreRecord> = records.iter().map(ScoreRecord::from).collect();
    lines.sort_by_key(|r| r.rank);
    write_jsonl(path, &lines)
}

/// Reads a score file and checks that it covers one epoch with a valid rank
/// permutation.
pub fn read_scores(path: &Path) -> Result<Vec<DifficultyRecord>> {
    let records: Vec<DifficultyRecord> = read_jsonl::<ScoreRecord>(path)?
        .into_iter()
        .map(DifficultyRecord::from)
        .collect();
    if records.is_empty() {
        return Err(Error::format(path, "score file is empty"));
    }
    rank_samples(&records).map_err(|e| Error::format(path, e.to_string()))?;
    Ok(records)
}
