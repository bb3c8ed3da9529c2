//! Metrics for imbalanced single- and multi-label classification.
//!
//! Every ratio whose denominator is zero evaluates to 0.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Binary `n_samples × n_labels` matrix. Multiclass targets are stored
/// one-hot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMatrix {
    n_samples: usize,
    n_labels: usize,
    data: Vec<u8>,
}

impl LabelMatrix {
    pub fn new(n_samples: usize, n_labels: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != n_samples * n_labels {
            return Err(Error::LabelShapeMismatch {
                left: (n_samples, n_labels),
                right: (data.len(), 1),
            });
        }
        check_binary(&data)?;
        Ok(Self {
            n_samples,
            n_labels,
            data,
        })
    }

    pub fn from_class_indices(classes: &[usize], n_labels: usize) -> Result<Self> {
        let mut data = vec![0u8; classes.len() * n_labels];
        for (i, &c) in classes.iter().enumerate() {
            if c >= n_labels {
                return Err(Error::InvalidTarget(format!(
                    "class {c} of sample {i} is outside 0..{n_labels}"
                )));
            }
            data[i * n_labels + c] = 1;
        }
        Ok(Self {
            n_samples: classes.len(),
            n_labels,
            data,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_samples, self.n_labels)
    }

    pub fn get(&self, sample: usize, label: usize) -> u8 {
        self.data[sample * self.n_labels + label]
    }

    pub fn row(&self, sample: usize) -> &[u8] {
        &self.data[sample * self.n_labels..(sample + 1) * self.n_labels]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub fn complement(&self) -> Self {
        Self {
            data: self.data.iter().map(|v| 1 - v).collect(),
            ..self.clone()
        }
    }

    /// Positive count of each label.
    pub fn label_frequencies(&self) -> Vec<usize> {
        let mut freq = vec![0usize; self.n_labels];
        for row in self.data.chunks(self.n_labels.max(1)) {
            for (f, &v) in freq.iter_mut().zip(row) {
                *f += usize::from(v);
            }
        }
        freq
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    tp: usize,
    fp: usize,
    fn_: usize,
    tn: usize,
}

impl Counts {
    fn add(&mut self, truth: u8, pred: u8) {
        match (truth, pred) {
            (1, 1) => self.tp += 1,
            (0, 1) => self.fp += 1,
            (1, 0) => self.fn_ += 1,
            _ => self.tn += 1,
        }
    }

    fn f1(&self) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            0.0
        } else {
            (2 * self.tp) as f64 / denom as f64
        }
    }
}

fn check_binary(values: &[u8]) -> Result<()> {
    match values.iter().position(|&v| v > 1) {
        Some(position) => Err(Error::NonBinaryLabel {
            value: values[position],
            position,
        }),
        None => Ok(()),
    }
}

fn check_shape(truth: &LabelMatrix, pred: &LabelMatrix) -> Result<()> {
    if truth.shape() != pred.shape() {
        return Err(Error::LabelShapeMismatch {
            left: truth.shape(),
            right: pred.shape(),
        });
    }
    Ok(())
}

fn per_label_counts(truth: &LabelMatrix, pred: &LabelMatrix) -> Vec<Counts> {
    let mut counts = vec![Counts::default(); truth.n_labels];
    for i in 0..truth.n_samples {
        for (c, (&t, &p)) in counts.iter_mut().zip(truth.row(i).iter().zip(pred.row(i))) {
            c.add(t, p);
        }
    }
    counts
}

pub fn per_label_f1(truth: &LabelMatrix, pred: &LabelMatrix) -> Result<Vec<f64>> {
    check_shape(truth, pred)?;
    Ok(per_label_counts(truth, pred)
        .iter()
        .map(Counts::f1)
        .collect())
}

/// F1 over true/false positives pooled across all labels.
pub fn micro_f1(truth: &LabelMatrix, pred: &LabelMatrix) -> Result<f64> {
    check_shape(truth, pred)?;
    let mut pooled = Counts::default();
    for (&t, &p) in truth.data.iter().zip(&pred.data) {
        pooled.add(t, p);
    }
    Ok(pooled.f1())
}

/// Unweighted mean of per-label F1.
pub fn macro_f1(truth: &LabelMatrix, pred: &LabelMatrix) -> Result<f64> {
    let f1 = per_label_f1(truth, pred)?;
    Ok(mean(&f1))
}

pub fn hamming_loss(truth: &LabelMatrix, pred: &LabelMatrix) -> Result<f64> {
    check_shape(truth, pred)?;
    if truth.data.is_empty() {
        return Ok(0.0);
    }
    let wrong = truth
        .data
        .iter()
        .zip(&pred.data)
        .filter(|(t, p)| t != p)
        .count();
    Ok(wrong as f64 / truth.data.len() as f64)
}

/// Fraction of samples whose whole label vector is predicted exactly.
pub fn subset_accuracy(truth: &LabelMatrix, pred: &LabelMatrix) -> Result<f64> {
    check_shape(truth, pred)?;
    if truth.n_samples == 0 {
        return Ok(0.0);
    }
    let exact = (0..truth.n_samples)
        .filter(|&i| truth.row(i) == pred.row(i))
        .count();
    Ok(exact as f64 / truth.n_samples as f64)
}

fn binary_counts(truth: &[u8], pred: &[u8]) -> Result<Counts> {
    if truth.len() != pred.len() {
        return Err(Error::LabelShapeMismatch {
            left: (truth.len(), 1),
            right: (pred.len(), 1),
        });
    }
    check_binary(truth)?;
    check_binary(pred)?;
    let mut c = Counts::default();
    for (&t, &p) in truth.iter().zip(pred) {
        c.add(t, p);
    }
    Ok(c)
}

/// Matthews correlation of a binary task, 1 marking the positive class.
pub fn matthews(truth: &[u8], pred: &[u8]) -> Result<f64> {
    let c = binary_counts(truth, pred)?;
    let (tp, fp, fn_, tn) = (c.tp as f64, c.fp as f64, c.fn_ as f64, c.tn as f64);
    let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
    if factors.contains(&0.0) {
        return Ok(0.0);
    }
    let denom = libm::sqrt(factors.iter().product());
    Ok((tp * tn - fp * fn_) / denom)
}

/// F1 of the positive class of a binary task.
pub fn binary_f1(truth: &[u8], pred: &[u8]) -> Result<f64> {
    Ok(binary_counts(truth, pred)?.f1())
}

/// Sorts labels by descending training frequency (ties by label index) and
/// cuts them into `n_groups` contiguous groups of near-equal label count,
/// earlier groups taking the remainder.
pub fn label_frequency_groups(train: &LabelMatrix, n_groups: usize) -> Result<Vec<Vec<usize>>> {
    let n_labels = train.n_labels;
    if n_groups == 0 || n_groups > n_labels {
        return Err(Error::TooManyGroups {
            groups: n_groups,
            labels: n_labels,
        });
    }
    let freq = train.label_frequencies();
    let mut labels: Vec<usize> = (0..n_labels).collect();
    labels.sort_by(|&a, &b| freq[b].cmp(&freq[a]).then(a.cmp(&b)));
    let (base, extra) = (n_labels / n_groups, n_labels % n_groups);
    let mut groups = Vec::with_capacity(n_groups);
    let mut rest = labels.as_slice();
    for g in 0..n_groups {
        let (head, tail) = rest.split_at(base + usize::from(g < extra));
        groups.push(head.to_vec());
        rest = tail;
    }
    Ok(groups)
}

/// Macro-F1 restricted to the labels of each group.
pub fn macro_f1_per_group(
    truth: &LabelMatrix,
    pred: &LabelMatrix,
    groups: &[Vec<usize>],
) -> Result<Vec<f64>> {
    let f1 = per_label_f1(truth, pred)?;
    let mut seen = BTreeSet::new();
    for group in groups {
        if group.is_empty() {
            return Err(Error::InvalidGroups("empty group".into()));
        }
        for &label in group {
            if label >= f1.len() {
                return Err(Error::InvalidGroups(format!(
                    "label {label} does not exist"
                )));
            }
            if !seen.insert(label) {
                return Err(Error::InvalidGroups(format!(
                    "label {label} is in two groups"
                )));
            }
        }
    }
    if seen.len() != f1.len() {
        return Err(Error::InvalidGroups(format!(
            "{} of {} labels are grouped",
            seen.len(),
            f1.len()
        )));
    }
    Ok(groups
        .iter()
        .map(|g| g.iter().map(|&l| f1[l]).sum::<f64>() / g.len() as f64)
        .collect())
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Validation metrics for one epoch.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub hamming_loss: f64,
    pub subset_accuracy: f64,
    /// Only for two-class single-label tasks (class 1 is positive).
    pub matthews: Option<f64>,
    pub binary_f1: Option<f64>,
    /// Macro-F1 per label-frequency group, most frequent group first.
    pub group_macro_f1: Vec<f64>,
}

impl EvalReport {
    /// `binary` treats the matrices as a two-class one-hot task and fills in
    /// the Matthews correlation and positive-class F1.
    pub fn compute(
        truth: &LabelMatrix,
        pred: &LabelMatrix,
        groups: &[Vec<usize>],
        binary: bool,
    ) -> Result<Self> {
        let (matthews_cc, f1_pos) = if binary {
            if truth.n_labels != 2 {
                return Err(Error::InvalidTarget(format!(
                    "binary metrics need 2 classes, got {}",
                    truth.n_labels
                )));
            }
            let t: Vec<u8> = (0..truth.n_samples).map(|i| truth.get(i, 1)).collect();
            let p: Vec<u8> = (0..pred.n_samples).map(|i| pred.get(i, 1)).collect();
            (Some(matthews(&t, &p)?), Some(binary_f1(&t, &p)?))
        } else {
            (None, None)
        };
        Ok(Self {
            micro_f1: micro_f1(truth, pred)?,
            macro_f1: macro_f1(truth, pred)?,
            hamming_loss: hamming_loss(truth, pred)?,
            subset_accuracy: subset_accuracy(truth, pred)?,
            matthews: matthews_cc,
            binary_f1: f1_pos,
            group_macro_f1: macro_f1_per_group(truth, pred, groups)?,
        })
    }
}
