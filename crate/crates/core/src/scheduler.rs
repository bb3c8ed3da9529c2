//! Learning pace: the easy-to-hard ordering is cut into `k` contiguous bins
//! and epoch `t` trains on bins `1..=min(t, k)`. Earlier bins stay visible in
//! every later epoch, so easy samples keep being reviewed while harder ones
//! are added.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::difficulty::{rank_samples, AlignmentMode, DeltaOrdering, DifficultyRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CurriculumConfig {
    pub bins_k: usize,
    pub total_epochs: u32,
    pub shuffle_seed: u64,
    pub alignment: AlignmentMode,
    pub delta_ordering: DeltaOrdering,
    /// When false the visible set is presented in rank order.
    pub shuffle_within_epoch: bool,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        Self {
            bins_k: 5,
            total_epochs: 10,
            shuffle_seed: 2,
            alignment: AlignmentMode::default(),
            delta_ordering: DeltaOrdering::default(),
            shuffle_within_epoch: true,
        }
    }
}

impl CurriculumConfig {
    pub fn validate(&self, n_samples: usize) -> Result<()> {
        if self.bins_k == 0 {
            return Err(Error::InvalidConfig("bins_k must be at least 1".into()));
        }
        if self.total_epochs == 0 {
            return Err(Error::InvalidConfig("epochs_T must be at least 1".into()));
        }
        if self.bins_k > n_samples {
            return Err(Error::TooManyBins {
                bins: self.bins_k,
                len: n_samples,
            });
        }
        if (self.total_epochs as usize) < self.bins_k {
            log::warn!(
                "epochs_T = {} < bins_k = {}: the hardest bins are never trained on",
                self.total_epochs,
                self.bins_k
            );
        }
        Ok(())
    }
}

/// Training order for one epoch.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EpochPlan {
    pub epoch: u32,
    /// Number of bins (counted from the easiest) in this epoch's training set.
    pub visible_bins: usize,
    pub ordered_ids: Vec<String>,
    /// 1-based bin of every sample in `ordered_ids`.
    pub bin_of: BTreeMap<String, usize>,
}

/// Splits an easy-to-hard ordering into `k` contiguous slices whose sizes
/// differ by at most one; the first `len % k` slices get the extra element.
pub fn partition_bins<T: Clone>(ordered: &[T], k: usize) -> Result<Vec<Vec<T>>> {
    let len = ordered.len();
    if k == 0 || k > len {
        return Err(Error::TooManyBins { bins: k, len });
    }
    let (base, extra) = (len / k, len % k);
    let mut bins = Vec::with_capacity(k);
    let mut start = 0;
    for b in 0..k {
        let size = base + usize::from(b < extra);
        bins.push(ordered[start..start + size].to_vec());
        start += size;
    }
    Ok(bins)
}

/// Samples visible at `epoch`: bins `1..=min(epoch, k)` concatenated.
pub fn visible_set<T: Clone>(epoch: u32, bins: &[Vec<T>]) -> Result<Vec<T>> {
    if epoch == 0 {
        return Err(Error::InvalidConfig("epochs are numbered from 1".into()));
    }
    let shown = (epoch as usize).min(bins.len());
    Ok(bins[..shown].concat())
}

pub fn build_epoch_plan(
    records: &[DifficultyRecord],
    config: &CurriculumConfig,
    epoch: u32,
) -> Result<EpochPlan> {
    config.validate(records.len())?;
    if let Some(r) = records.iter().find(|r| r.epoch != epoch) {
        return Err(Error::InvalidConfig(format!(
            "planning epoch {epoch} from records of epoch {}",
            r.epoch
        )));
    }
    let ordered = rank_samples(records)?;
    let bins = partition_bins(&ordered, config.bins_k)?;
    let shown = visible_set(epoch, &bins)?;
    let visible_bins = (epoch as usize).min(bins.len());
    Ok(finish_plan(epoch, &bins[..visible_bins], shown, config))
}

/// Plan that trains on every sample as a single bin, used for the
/// no-curriculum baseline. The shuffle matches what `build_epoch_plan` does
/// with `bins_k = 1`.
pub fn full_data_plan(ids: &[String], config: &CurriculumConfig, epoch: u32) -> Result<EpochPlan> {
    if ids.is_empty() {
        return Err(Error::EmptyDump);
    }
    if epoch == 0 {
        return Err(Error::InvalidConfig("epochs are numbered from 1".into()));
    }
    let bins = [ids.to_vec()];
    Ok(finish_plan(epoch, &bins, ids.to_vec(), config))
}

fn finish_plan(
    epoch: u32,
    bins: &[Vec<String>],
    mut ordered_ids: Vec<String>,
    config: &CurriculumConfig,
) -> EpochPlan {
    let bin_of = bins
        .iter()
        .enumerate()
        .flat_map(|(b, ids)| ids.iter().map(move |id| (id.clone(), b + 1)))
        .collect();
    if config.shuffle_within_epoch {
        // Start from a canonical order so the shuffle depends only on the
        // visible set, the seed and the epoch.
        ordered_ids.sort_unstable();
        ordered_ids.shuffle(&mut epoch_rng(config.shuffle_seed, epoch));
    }
    EpochPlan {
        epoch,
        visible_bins: bins.len(),
        ordered_ids,
        bin_of,
    }
}

fn epoch_rng(seed: u64, epoch: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::from(epoch));
    rng
}
