//! Bag-of-embeddings classifier: token embeddings are mean-pooled and fed to
//! a linear head, with softmax cross-entropy for single-label tasks and
//! per-label sigmoid cross-entropy for multi-label tasks.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nucnorm::EmbeddingMatrix;

const EMBEDDING_INIT_SCALE: f64 = 0.5;
const HEAD_INIT_SCALE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(
    feature = "serde",
    derive(serde::Serialize, serde::Deserialize),
    serde(rename_all = "kebab-case")
)]
pub enum TaskKind {
    #[default]
    Multiclass,
    Multilabel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    Class(usize),
    /// One 0/1 entry per label.
    Labels(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub task: TaskKind,
    pub vocab_size: usize,
    pub dim: usize,
    pub n_labels: usize,
    /// `vocab_size × dim`, row-major.
    pub embedding: Vec<f64>,
    /// `dim × n_labels`, row-major.
    pub head_weights: Vec<f64>,
    pub head_bias: Vec<f64>,
}

/// Gradient of the loss with the same layout as [`ModelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub embedding: Vec<f64>,
    pub head_weights: Vec<f64>,
    pub head_bias: Vec<f64>,
}

impl Gradients {
    fn zeros_like(p: &ModelParams) -> Self {
        Self {
            embedding: vec![0.0; p.embedding.len()],
            head_weights: vec![0.0; p.head_weights.len()],
            head_bias: vec![0.0; p.head_bias.len()],
        }
    }

    fn clear(&mut self) {
        self.embedding.fill(0.0);
        self.head_weights.fill(0.0);
        self.head_bias.fill(0.0);
    }
}

impl ModelParams {
    pub fn zeros(task: TaskKind, vocab_size: usize, dim: usize, n_labels: usize) -> Result<Self> {
        if vocab_size == 0 || dim == 0 || n_labels == 0 {
            return Err(Error::InvalidConfig(format!(
                "model needs vocab, dim and labels >= 1, got {vocab_size}, {dim}, {n_labels}"
            )));
        }
        Ok(Self {
            task,
            vocab_size,
            dim,
            n_labels,
            embedding: vec![0.0; vocab_size * dim],
            head_weights: vec![0.0; dim * n_labels],
            head_bias: vec![0.0; n_labels],
        })
    }

    /// Uniform random embeddings and head weights, zero bias.
    pub fn init(
        task: TaskKind,
        vocab_size: usize,
        dim: usize,
        n_labels: usize,
        seed: u64,
    ) -> Result<Self> {
        let mut p = Self::zeros(task, vocab_size, dim, n_labels)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in &mut p.embedding {
            *v = rng.gen_range(-EMBEDDING_INIT_SCALE..EMBEDDING_INIT_SCALE);
        }
        for v in &mut p.head_weights {
            *v = rng.gen_range(-HEAD_INIT_SCALE..HEAD_INIT_SCALE);
        }
        Ok(p)
    }

    pub fn is_finite(&self) -> bool {
        self.embedding
            .iter()
            .chain(&self.head_weights)
            .chain(&self.head_bias)
            .all(|v| v.is_finite())
    }

    fn embedding_row(&self, id: u32) -> &[f64] {
        let start = id as usize * self.dim;
        &self.embedding[start..start + self.dim]
    }

    fn check_ids(&self, ids: &[u32]) -> Result<()> {
        if ids.is_empty() {
            return Err(Error::EmptySequence("<input>".into()));
        }
        match ids.iter().find(|&&id| id as usize >= self.vocab_size) {
            Some(&id) => Err(Error::TokenOutOfRange {
                id,
                vocab_size: self.vocab_size,
            }),
            None => Ok(()),
        }
    }

    /// One embedding row per token, in order. This is the matrix whose
    /// nuclear norm scores the sample.
    pub fn embed_sample(&self, sample_id: &str, ids: &[u32]) -> Result<EmbeddingMatrix> {
        self.check_ids(ids).map_err(|e| match e {
            Error::EmptySequence(_) => Error::EmptySequence(sample_id.into()),
            other => other,
        })?;
        let mut values = Vec::with_capacity(ids.len() * self.dim);
        for &id in ids {
            values.extend_from_slice(self.embedding_row(id));
        }
        EmbeddingMatrix::new(sample_id, ids.len(), self.dim, values)
    }

    fn pooled(&self, ids: &[u32]) -> Vec<f64> {
        let mut h = vec![0.0; self.dim];
        for &id in ids {
            for (acc, v) in h.iter_mut().zip(self.embedding_row(id)) {
                *acc += v;
            }
        }
        let inv = 1.0 / ids.len() as f64;
        h.iter_mut().for_each(|v| *v *= inv);
        h
    }

    fn logits_of(&self, h: &[f64]) -> Vec<f64> {
        let l = self.n_labels;
        let mut z = self.head_bias.clone();
        for (k, &hk) in h.iter().enumerate() {
            let row = &self.head_weights[k * l..(k + 1) * l];
            for (zj, w) in z.iter_mut().zip(row) {
                *zj += hk * w;
            }
        }
        z
    }

    /// `mean_rows(embed_sample) · head_weights + head_bias`.
    pub fn forward(&self, ids: &[u32]) -> Result<Vec<f64>> {
        self.check_ids(ids)?;
        Ok(self.logits_of(&self.pooled(ids)))
    }

    fn check_target(&self, target: &Target) -> Result<()> {
        match (self.task, target) {
            (TaskKind::Multiclass, Target::Class(c)) if *c < self.n_labels => Ok(()),
            (TaskKind::Multilabel, Target::Labels(y))
                if y.len() == self.n_labels && y.iter().all(|&v| v <= 1) =>
            {
                Ok(())
            }
            (task, target) => Err(Error::InvalidTarget(format!(
                "{target:?} does not fit a {task:?} head with {} labels",
                self.n_labels
            ))),
        }
    }

    /// Loss on one sample and its exact gradient.
    pub fn loss_and_grad(&self, ids: &[u32], target: &Target) -> Result<(f64, Gradients)> {
        let mut grads = Gradients::zeros_like(self);
        let loss = self.accumulate_grad(ids, target, 1.0, &mut grads)?;
        Ok((loss, grads))
    }

    pub fn loss(&self, ids: &[u32], target: &Target) -> Result<f64> {
        self.check_target(target)?;
        let z = self.forward(ids)?;
        Ok(loss_and_dlogits(self.task, &z, target).0)
    }

    /// Adds `weight · ∇loss` into `grads` and returns the unweighted loss.
    pub(crate) fn accumulate_grad(
        &self,
        ids: &[u32],
        target: &Target,
        weight: f64,
        grads: &mut Gradients,
    ) -> Result<f64> {
        self.check_ids(ids)?;
        self.check_target(target)?;
        let (l, d) = (self.n_labels, self.dim);
        let h = self.pooled(ids);
        let z = self.logits_of(&h);
        let (loss, dz) = loss_and_dlogits(self.task, &z, target);

        let mut dh = vec![0.0; d];
        for k in 0..d {
            let w_row = &self.head_weights[k * l..(k + 1) * l];
            let g_row = &mut grads.head_weights[k * l..(k + 1) * l];
            let mut acc = 0.0;
            for j in 0..l {
                g_row[j] += weight * h[k] * dz[j];
                acc += w_row[j] * dz[j];
            }
            dh[k] = acc;
        }
        for (g, dzj) in grads.head_bias.iter_mut().zip(&dz) {
            *g += weight * dzj;
        }
        let per_token = weight / ids.len() as f64;
        for &id in ids {
            let start = id as usize * d;
            for (g, dhk) in grads.embedding[start..start + d].iter_mut().zip(&dh) {
                *g += per_token * dhk;
            }
        }
        Ok(loss)
    }

    /// `self -= step · grads`.
    pub fn apply(&mut self, grads: &Gradients, step: f64) {
        let pairs = [
            (&mut self.embedding, &grads.embedding),
            (&mut self.head_weights, &grads.head_weights),
            (&mut self.head_bias, &grads.head_bias),
        ];
        for (params, g) in pairs {
            for (p, gi) in params.iter_mut().zip(g) {
                *p -= step * gi;
            }
        }
    }

    /// 0/1 prediction row: argmax (lowest index on ties) for multiclass,
    /// `sigmoid(z) >= threshold` per label for multilabel.
    pub fn predict(&self, ids: &[u32], threshold: f64) -> Result<Vec<u8>> {
        let z = self.forward(ids)?;
        Ok(match self.task {
            TaskKind::Multiclass => {
                let best = argmax(&z);
                (0..z.len()).map(|j| u8::from(j == best)).collect()
            }
            TaskKind::Multilabel => z
                .iter()
                .map(|&zj| u8::from(sigmoid(zj) >= threshold))
                .collect(),
        })
    }
}

pub(crate) fn new_gradients(p: &ModelParams) -> Gradients {
    Gradients::zeros_like(p)
}

pub(crate) fn clear_gradients(g: &mut Gradients) {
    g.clear();
}

fn argmax(z: &[f64]) -> usize {
    let mut best = 0;
    for (j, v) in z.iter().enumerate() {
        if *v > z[best] {
            best = j;
        }
    }
    best
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = z.iter().map(|v| libm::exp(v - max)).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

fn loss_and_dlogits(task: TaskKind, z: &[f64], target: &Target) -> (f64, Vec<f64>) {
    match (task, target) {
        (TaskKind::Multiclass, Target::Class(c)) => {
            let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = z.iter().map(|v| libm::exp(v - max)).sum();
            let log_norm = max + libm::log(sum);
            let mut dz: Vec<f64> = z.iter().map(|v| libm::exp(v - log_norm)).collect();
            dz[*c] -= 1.0;
            (log_norm - z[*c], dz)
        }
        (TaskKind::Multilabel, Target::Labels(y)) => {
            let inv = 1.0 / z.len() as f64;
            let mut loss = 0.0;
            let dz = z
                .iter()
                .zip(y)
                .map(|(&zj, &yj)| {
                    let yj = f64::from(yj);
                    loss += zj.max(0.0) - zj * yj + libm::log1p(libm::exp(-zj.abs()));
                    (sigmoid(zj) - yj) * inv
                })
                .collect();
            (loss * inv, dz)
        }
        _ => unreachable!("target checked against task"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nucnorm::nuclear_norm;

    #[test]
    fn uniform_logits_multiclass_loss() {
        let p = ModelParams::zeros(TaskKind::Multiclass, 3, 2, 4).unwrap();
        let (loss, _) = p.loss_and_grad(&[1, 2], &Target::Class(3)).unwrap();
        assert!((loss - libm::log(4.0)).abs() < 1e-15);
    }

    #[test]
    fn zero_logits_multilabel_loss() {
        let p = ModelParams::zeros(TaskKind::Multilabel, 3, 2, 3).unwrap();
        let (loss, _) = p
            .loss_and_grad(&[2], &Target::Labels(vec![0, 0, 0]))
            .unwrap();
        assert!((loss - libm::log(2.0)).abs() < 1e-15);
    }

    #[test]
    fn zero_params_give_bias() {
        let mut p = ModelParams::zeros(TaskKind::Multiclass, 4, 3, 2).unwrap();
        p.head_bias = vec![0.25, -1.5];
        assert_eq!(p.forward(&[2, 3]).unwrap(), [0.25, -1.5]);
    }

    #[test]
    fn identity_head_returns_embedding_row() {
        let mut p = ModelParams::init(TaskKind::Multiclass, 5, 3, 3, 7).unwrap();
        p.head_weights = vec![1., 0., 0., 0., 1., 0., 0., 0., 1.];
        p.head_bias = vec![0.0; 3];
        let z = p.forward(&[4]).unwrap();
        assert_eq!(z, p.embedding[12..15]);
    }

    #[test]
    fn hand_computed_forward() {
        let mut p = ModelParams::zeros(TaskKind::Multiclass, 3, 2, 2).unwrap();
        // rows for ids 1 and 2
        p.embedding = vec![0., 0., 1., 2., 3., -4.];
        p.head_weights = vec![1., 2., 3., 4.];
        p.head_bias = vec![0.5, -0.5];
        // mean = (2, -1); z0 = 2*1 + -1*3 + 0.5 = -0.5; z1 = 2*2 + -1*4 - 0.5 = -0.5
        assert_eq!(p.forward(&[1, 2]).unwrap(), [-0.5, -0.5]);
    }

    #[test]
    fn softmax_sums_to_one() {
        let s = softmax(&[1000.0, -3.0, 2.5, 0.0]);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn embed_rows_and_errors() {
        let p = ModelParams::init(TaskKind::Multiclass, 4, 3, 2, 1).unwrap();
        let e = p.embed_sample("s", &[2, 2]).unwrap();
        assert_eq!(e.row(0), e.row(1));
        assert!(matches!(
            p.embed_sample("s", &[9]),
            Err(Error::TokenOutOfRange { id: 9, .. })
        ));
        assert_eq!(
            p.embed_sample("s", &[]),
            Err(Error::EmptySequence("s".into()))
        );
        let z = ModelParams::zeros(TaskKind::Multiclass, 4, 3, 2).unwrap();
        assert_eq!(nuclear_norm(&z.embed_sample("s", &[1, 2, 3]).unwrap()), 0.0);
    }

    #[test]
    fn invalid_targets() {
        let p = ModelParams::zeros(TaskKind::Multiclass, 3, 2, 2).unwrap();
        assert!(p.loss_and_grad(&[1], &Target::Class(2)).is_err());
        assert!(p.loss_and_grad(&[1], &Target::Labels(vec![1, 0])).is_err());
        let q = ModelParams::zeros(TaskKind::Multilabel, 3, 2, 2).unwrap();
        assert!(q.loss_and_grad(&[1], &Target::Labels(vec![1])).is_err());
        assert!(q.loss_and_grad(&[1], &Target::Labels(vec![1, 2])).is_err());
        assert!(ModelParams::zeros(TaskKind::Multiclass, 3, 0, 2).is_err());
    }

    #[test]
    fn predictions() {
        let mut p = ModelParams::zeros(TaskKind::Multiclass, 3, 1, 3).unwrap();
        p.head_bias = vec![0.0, 2.0, 2.0];
        assert_eq!(p.predict(&[1], 0.5).unwrap(), [0, 1, 0]);
        let mut q = ModelParams::zeros(TaskKind::Multilabel, 3, 1, 3).unwrap();
        q.head_bias = vec![-1.0, 0.0, 3.0];
        assert_eq!(q.predict(&[1], 0.5).unwrap(), [0, 1, 1]);
    }
}
