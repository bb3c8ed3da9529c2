//! Synthetic long-tail text datasets for smoke runs and demos.
//!
//! Class `c` is drawn with probability proportional to `1 / (c + 1)^s`. Each
//! text is a handful of shared filler words plus the keyword `topicNN` of
//! every label it carries, which makes the task linearly separable in the
//! bag-of-words sense unless `label_noise` swaps keywords.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formats::{DatasetRecord, LabelField};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub classes: usize,
    pub train: usize,
    pub valid: usize,
    pub seed: u64,
    pub multilabel: bool,
    pub zipf_exponent: f64,
    pub filler_vocab: usize,
    pub min_words: usize,
    pub max_words: usize,
    /// Probability that a keyword is replaced by a random class's keyword.
    pub label_noise: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            classes: 10,
            train: 1000,
            valid: 200,
            seed: 2,
            multilabel: false,
            zipf_exponent: 1.0,
            filler_vocab: 200,
            min_words: 4,
            max_words: 16,
            label_noise: 0.0,
        }
    }
}

fn label_name(c: usize) -> String {
    format!("c{c:02}")
}

fn keyword(c: usize) -> String {
    format!("topic{c:02}")
}

/// Returns `(train, valid)` records.
pub fn generate(spec: &SynthSpec) -> (Vec<DatasetRecord>, Vec<DatasetRecord>) {
    assert!(spec.classes >= 2, "need at least two classes");
    assert!(spec.min_words <= spec.max_words);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let weights: Vec<f64> = (0..spec.classes)
        .map(|c| 1.0 / ((c + 1) as f64).powf(spec.zipf_exponent))
        .collect();
    let class_dist = WeightedIndex::new(&weights).expect("positive weights");

    let mut make = |prefix: &str, n: usize| -> Vec<DatasetRecord> {
        (0..n)
            .map(|i| {
                let mut labels = vec![class_dist.sample(&mut rng)];
                if spec.multilabel {
                    let extra = rng.gen_range(0..=2);
                    for _ in 0..extra {
                        let c = class_dist.sample(&mut rng);
                        if !labels.contains(&c) {
                            labels.push(c);
                        }
                    }
                    labels.sort_unstable();
                }
                let n_words = rng.gen_range(spec.min_words..=spec.max_words);
                let mut words: Vec<String> = (0..n_words)
                    .map(|_| format!("w{}", rng.gen_range(0..spec.filler_vocab)))
                    .collect();
                for &c in &labels {
                    let shown = if rng.gen_bool(spec.label_noise) {
                        rng.gen_range(0..spec.classes)
                    } else {
                        c
                    };
                    words.push(keyword(shown));
                }
                words.shuffle(&mut rng);
                let names: Vec<String> = labels.iter().map(|&c| label_name(c)).collect();
                DatasetRecord {
                    id: format!("{prefix}-{i:05}"),
                    text: words.join(" "),
                    labels: if spec.multilabel {
                        LabelField::Many(names)
                    } else {
                        LabelField::One(names.into_iter().next().unwrap())
                    },
                }
            })
            .collect()
    };
    let train = make("train", spec.train);
    let valid = make("valid", spec.valid);
    (train, valid)
}
