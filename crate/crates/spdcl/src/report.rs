//! Aggregates a run directory into a single JSON report: per-epoch metrics,
//! the per-epoch distribution of training-sample nuclear norms, the long-tail
//! group breakdown and, optionally, a comparison against a baseline run.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formats::read_scores;
use crate::fsutil::{read_json, read_jsonl};
use crate::rundir::{EpochReportRecord, RunLayout, RunMeta, RunMode};

/// Five-number summary plus mean of one epoch's nuclear norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormSummary {
    pub epoch: u32,
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LongTail {
    /// Label names per group, most frequent group first.
    pub groups: Vec<Vec<String>>,
    /// Final-epoch macro-F1 of each group.
    pub group_macro_f1: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub metric: String,
    pub run: f64,
    pub baseline: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub mode: RunMode,
    pub epochs: Vec<EpochReportRecord>,
    pub norm_trajectory: Vec<NormSummary>,
    pub long_tail: LongTail,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Vec<ComparisonRow>>,
}

/// Linearly interpolated percentile of sorted data, `q` in `[0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty data");
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn norm_summary(epoch: u32, norms: &[f64]) -> NormSummary {
    let mut sorted = norms.to_vec();
    sorted.sort_by(f64::total_cmp);
    NormSummary {
        epoch,
        count: sorted.len(),
        mean: sorted.iter().sum::<f64>() / sorted.len() as f64,
        min: sorted[0],
        q1: percentile(&sorted, 0.25),
        median: percentile(&sorted, 0.5),
        q3: percentile(&sorted, 0.75),
        max: sorted[sorted.len() - 1],
    }
}

struct LoadedRun {
    meta: RunMeta,
    epochs: Vec<EpochReportRecord>,
    norms: Vec<NormSummary>,
}

fn load_run(dir: &Path) -> Result<LoadedRun> {
    let layout = RunLayout::new(dir);
    if !layout.meta().exists() {
        return Err(Error::Incomplete {
            dir: dir.to_owned(),
            missing: "run.json".into(),
        });
    }
    let meta: RunMeta = read_json(&layout.meta())?;
    let mut missing = Vec::new();
    for epoch in 1..=meta.epochs {
        let mut needed = vec![layout.manifest(epoch), layout.report(epoch)];
        if meta.mode == RunMode::Spdcl {
            needed.push(layout.scores(epoch));
        }
        missing.extend(needed.into_iter().filter(|p| !p.exists()));
    }
    if !layout.params().exists() {
        missing.push(layout.params());
    }
    if !missing.is_empty() {
        let names: Vec<String> = missing
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        return Err(Error::Incomplete {
            dir: dir.to_owned(),
            missing: names.join(", "),
        });
    }

    let mut epochs = Vec::new();
    let mut norms = Vec::new();
    for epoch in 1..=meta.epochs {
        let path = layout.report(epoch);
        let mut lines: Vec<EpochReportRecord> = read_jsonl(&path)?;
        if lines.len() != 1 || lines[0].epoch != epoch {
            return Err(Error::format(
                &path,
                format!("expected one record for epoch {epoch}"),
            ));
        }
        epochs.push(lines.pop().unwrap());
        if meta.mode == RunMode::Spdcl {
            let records = read_scores(&layout.scores(epoch))?;
            let values: Vec<f64> = records.iter().map(|r| r.norm).collect();
            norms.push(norm_summary(epoch, &values));
        }
    }
    Ok(LoadedRun {
        meta,
        epochs,
        norms,
    })
}

fn final_metrics(r: &EpochReportRecord) -> Vec<(&'static str, f64)> {
    let mut m = vec![
        ("micro_f1", r.micro_f1),
        ("macro_f1", r.macro_f1),
        ("subset_accuracy", r.subset_accuracy),
        ("hamming_loss", r.hamming_loss),
        ("mean_loss", r.mean_loss),
    ];
    if let Some(v) = r.matthews {
        m.push(("matthews", v));
    }
    if let Some(v) = r.binary_f1 {
        m.push(("binary_f1", v));
    }
    m
}

pub fn build_report(run_dir: &Path, baseline_dir: Option<&Path>) -> Result<RunReport> {
    let run = load_run(run_dir)?;
    let last = run.epochs.last().ok_or_else(|| Error::Incomplete {
        dir: run_dir.to_owned(),
        missing: "epoch reports".into(),
    })?;
    let long_tail = LongTail {
        groups: run
            .meta
            .groups
            .iter()
            .map(|g| g.iter().map(|&l| run.meta.labels[l].clone()).collect())
            .collect(),
        group_macro_f1: last.group_macro_f1.clone(),
    };
    let comparison = match baseline_dir {
        Some(dir) => {
            let base = load_run(dir)?;
            let base_last = base.epochs.last().expect("complete run has epochs");
            let base_metrics = final_metrics(base_last);
            Some(
                final_metrics(last)
                    .into_iter()
                    .filter_map(|(name, value)| {
                        let (_, b) = base_metrics.iter().find(|(n, _)| *n == name)?;
                        Some(ComparisonRow {
                            metric: name.to_owned(),
                            run: value,
                            baseline: *b,
                            delta: value - b,
                        })
                    })
                    .collect(),
            )
        }
        None => None,
    };
    Ok(RunReport {
        mode: run.meta.mode,
        epochs: run.epochs,
        norm_trajectory: run.norms,
        long_tail,
        comparison,
    })
}

/// Plot-ready per-epoch table; norm columns are empty for baseline runs.
pub fn report_csv(report: &RunReport) -> String {
    let mut out = String::from(
        "epoch,mean_loss,micro_f1,macro_f1,hamming_loss,subset_accuracy,norm_mean,norm_min,norm_q1,norm_median,norm_q3,norm_max\n",
    );
    for e in &report.epochs {
        let _ = write!(
            out,
            "{},{},{},{},{},{}",
            e.epoch, e.mean_loss, e.micro_f1, e.macro_f1, e.hamming_loss, e.subset_accuracy
        );
        match report.norm_trajectory.iter().find(|n| n.epoch == e.epoch) {
            Some(n) => {
                let _ = writeln!(
                    out,
                    ",{},{},{},{},{},{}",
                    n.mean, n.min, n.q1, n.median, n.q3, n.max
                );
            }
            None => out.push_str(",,,,,,\n"),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 0.0), 1.0);
        assert_eq!(percentile(&v, 1.0), 4.0);
        assert_eq!(percentile(&v, 0.5), 2.5);
        assert_eq!(percentile(&v, 0.25), 1.75);
        assert_eq!(percentile(&[5.0], 0.75), 5.0);
    }

    #[test]
    fn summary_of_unsorted() {
        let s = norm_summary(3, &[4.0, 1.0, 3.0, 2.0, 5.0]);
        assert_eq!(
            (s.min, s.q1, s.median, s.q3, s.max),
            (1.0, 2.0, 3.0, 4.0, 5.0)
        );
        assert_eq!(s.mean, 3.0);
        assert_eq!(s.count, 5);
    }
}
