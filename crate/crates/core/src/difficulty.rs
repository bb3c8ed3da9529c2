//! Per-epoch difficulty scores and easy-to-hard orderings.
//!
//! Epoch 1 ranks samples by raw nuclear norm, smallest first. From epoch 2 on
//! the score is the epoch-over-epoch change of the norm, and samples whose
//! norm moved the most are treated as the easiest.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::nucnorm::{nuclear_norm, EmbeddingMatrix};

/// How the norm change of a sample is paired across two epochs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "kebab-case")
)]
pub enum AlignmentMode {
    /// Subtract the norm that occupied the same sorted position last epoch.
    #[default]
    RankAligned,
    /// Subtract the same sample's norm from last epoch.
    IdentityAligned,
}

/// Which way deltas are sorted into an easy-to-hard order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "kebab-case")
)]
pub enum DeltaOrdering {
    /// Largest absolute change first.
    #[default]
    Magnitude,
    /// Largest signed change first.
    Signed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DifficultyRecord {
    pub sample_id: String,
    pub epoch: u32,
    /// Raw nuclear norm at epoch 1, norm delta afterwards.
    pub score: f64,
    /// Raw nuclear norm of the sample at this epoch.
    pub norm: f64,
    /// 0 is the easiest sample.
    pub rank: usize,
}

/// Raw norms of every epoch seen so far, each table sorted by ascending norm
/// with ties broken by sample id.
#[derive(Debug, Clone, PartialEq)]
pub struct DifficultyHistory {
    first_epoch: u32,
    epochs: Vec<Vec<(String, f64)>>,
}

impl DifficultyHistory {
    /// Starts a history at `epoch` (normally 1) from that epoch's raw norms.
    pub fn new(epoch: u32, norms: &[(String, f64)]) -> Result<Self> {
        if epoch == 0 {
            return Err(Error::InvalidConfig("epochs are numbered from 1".into()));
        }
        check_unique(norms)?;
        Ok(Self {
            first_epoch: epoch,
            epochs: vec![sorted_by_norm(norms)],
        })
    }

    pub fn from_records(records: &[DifficultyRecord]) -> Result<Self> {
        let epoch = common_epoch(records)?;
        let norms: Vec<(String, f64)> = records
            .iter()
            .map(|r| (r.sample_id.clone(), r.norm))
            .collect();
        Self::new(epoch, &norms)
    }

    pub fn first_epoch(&self) -> u32 {
        self.first_epoch
    }

    pub fn latest_epoch(&self) -> u32 {
        self.first_epoch + self.epochs.len() as u32 - 1
    }

    /// Position-ordered `(sample_id, norm)` table for one epoch.
    pub fn table(&self, epoch: u32) -> Option<&[(String, f64)]> {
        let idx = epoch.checked_sub(self.first_epoch)? as usize;
        self.epochs.get(idx).map(Vec::as_slice)
    }

    fn push(&mut self, norms: &[(String, f64)]) {
        self.epochs.push(sorted_by_norm(norms));
    }
}

/// Nuclear norm of every matrix in a dump, in dump order.
pub fn score_dump(dump: &[EmbeddingMatrix]) -> Result<Vec<(String, f64)>> {
    let norms: Vec<(String, f64)> = dump
        .iter()
        .map(|m| (String::from(m.sample_id()), nuclear_norm(m)))
        .collect();
    check_unique(&norms)?;
    Ok(norms)
}

/// Epoch-1 records: smaller nuclear norm is easier.
pub fn initial_scores(dump: &[EmbeddingMatrix]) -> Result<Vec<DifficultyRecord>> {
    initial_scores_from_norms(&score_dump(dump)?)
}

pub fn initial_scores_from_norms(norms: &[(String, f64)]) -> Result<Vec<DifficultyRecord>> {
    check_unique(norms)?;
    Ok(sorted_by_norm(norms)
        .into_iter()
        .enumerate()
        .map(|(rank, (sample_id, norm))| DifficultyRecord {
            sample_id,
            epoch: 1,
            score: norm,
            norm,
            rank,
        })
        .collect())
}

/// Records for `epoch ≥ 2` from this epoch's raw norms. The norms are
/// appended to `history` on success.
pub fn delta_scores(
    current: &[(String, f64)],
    history: &mut DifficultyHistory,
    epoch: u32,
    alignment: AlignmentMode,
    ordering: DeltaOrdering,
) -> Result<Vec<DifficultyRecord>> {
    if epoch < 2 {
        return Err(Error::InvalidConfig(format!(
            "delta scores need epoch >= 2, got {epoch}"
        )));
    }
    let previous = match history.table(epoch - 1) {
        Some(t) if history.latest_epoch() == epoch - 1 => t,
        _ => return Err(Error::MissingEpoch(epoch - 1)),
    };
    check_unique(current)?;
    check_same_samples(previous, current)?;

    let current_sorted = sorted_by_norm(current);
    let deltas: Vec<(String, f64, f64)> = match alignment {
        AlignmentMode::RankAligned => current_sorted
            .iter()
            .zip(previous)
            .map(|((id, now), (_, before))| (id.clone(), now - before, *now))
            .collect(),
        AlignmentMode::IdentityAligned => {
            let before: BTreeMap<&str, f64> =
                previous.iter().map(|(id, n)| (id.as_str(), *n)).collect();
            current_sorted
                .iter()
                .map(|(id, now)| (id.clone(), now - before[id.as_str()], *now))
                .collect()
        }
    };

    let mut order: Vec<usize> = (0..deltas.len()).collect();
    order.sort_by(|&a, &b| {
        let (ida, da, _) = &deltas[a];
        let (idb, db, _) = &deltas[b];
        let key = match ordering {
            DeltaOrdering::Magnitude => db.abs().total_cmp(&da.abs()),
            DeltaOrdering::Signed => db.total_cmp(da),
        };
        key.then_with(|| ida.cmp(idb))
    });

    let records = order
        .into_iter()
        .enumerate()
        .map(|(rank, i)| {
            let (sample_id, score, norm) = deltas[i].clone();
            DifficultyRecord {
                sample_id,
                epoch,
                score,
                norm,
                rank,
            }
        })
        .collect();

    history.push(current);
    Ok(records)
}

/// Sample ids from easiest to hardest.
pub fn rank_samples(records: &[DifficultyRecord]) -> Result<Vec<String>> {
    if records.is_empty() {
        return Ok(Vec::new());
    }
    common_epoch(records)?;
    let len = records.len();
    let mut slots: Vec<Option<&str>> = vec![None; len];
    for r in records {
        match slots.get_mut(r.rank) {
            Some(slot @ None) => *slot = Some(&r.sample_id),
            _ => return Err(Error::RankCollision { rank: r.rank, len }),
        }
    }
    Ok(slots.into_iter().flatten().map(String::from).collect())
}

fn common_epoch(records: &[DifficultyRecord]) -> Result<u32> {
    let first = records.first().ok_or(Error::EmptyDump)?.epoch;
    match records.iter().find(|r| r.epoch != first) {
        Some(other) => Err(Error::MixedEpochs(first, other.epoch)),
        None => Ok(first),
    }
}

fn cmp_norm(a: &(String, f64), b: &(String, f64)) -> Ordering {
    a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0))
}

fn sorted_by_norm(norms: &[(String, f64)]) -> Vec<(String, f64)> {
    let mut sorted = norms.to_vec();
    sorted.sort_by(cmp_norm);
    sorted
}

fn check_unique(norms: &[(String, f64)]) -> Result<()> {
    if norms.is_empty() {
        return Err(Error::EmptyDump);
    }
    let mut seen = BTreeSet::new();
    for (id, _) in norms {
        if !seen.insert(id.as_str()) {
            return Err(Error::DuplicateSample(id.clone()));
        }
    }
    Ok(())
}

fn check_same_samples(previous: &[(String, f64)], current: &[(String, f64)]) -> Result<()> {
    let before: BTreeSet<&str> = previous.iter().map(|(id, _)| id.as_str()).collect();
    let now: BTreeSet<&str> = current.iter().map(|(id, _)| id.as_str()).collect();
    if let Some(id) = now.difference(&before).next() {
        return Err(Error::SampleSetMismatch(format!("`{id}` is new")));
    }
    if let Some(id) = before.difference(&now).next() {
        return Err(Error::SampleSetMismatch(format!("`{id}` is missing")));
    }
    Ok(())
}
