use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use spdcl_core::EpochPlan;

use crate::error::{Error, Result};
use crate::fsutil::{read_jsonl, write_jsonl};

/// Single-line manifest of one epoch's training order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestRecord {
    pub epoch: u32,
    pub order: Vec<String>,
    pub bin_of: BTreeMap<String, usize>,
}

impl From<&EpochPlan> for ManifestRecord {
    fn from(plan: &EpochPlan) -> Self {
        Self {
            epoch: plan.epoch,
            order: plan.ordered_ids.clone(),
            bin_of: plan.bin_of.clone(),
        }
    }
}

impl ManifestRecord {
    pub fn into_plan(self) -> Result<EpochPlan, String> {
        let mut seen = BTreeSet::new();
        if let Some(dup) = self.order.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(format!("`{dup}` appears twice in the order"));
        }
        if !self
            .bin_of
            .keys()
            .map(String::as_str)
            .eq(seen.iter().copied())
        {
            return Err("bin_of keys differ from the ordered ids".into());
        }
        if self.bin_of.values().any(|&b| b == 0) {
            return Err("bins are numbered from 1".into());
        }
        Ok(EpochPlan {
            epoch: self.epoch,
            visible_bins: self.bin_of.values().copied().max().unwrap_or(0),
            ordered_ids: self.order,
            bin_of: self.bin_of,
        })
    }
}

pub fn write_manifest(path: &Path, plan: &EpochPlan) -> Result<()> {
    write_jsonl(path, &[ManifestRecord::from(plan)])
}

pub fn read_manifest(path: &Path) -> Result<EpochPlan> {
    let mut records: Vec<ManifestRecord> = read_jsonl(path)?;
    if records.len() != 1 {
        return Err(Error::format(
            path,
            format!("expected one manifest record, found {}", records.len()),
        ));
    }
    records
        .pop()
        .unwrap()
        .into_plan()
        .map_err(|m| Error::format(path, m))
}
