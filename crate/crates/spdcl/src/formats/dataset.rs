use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use spdcl_core::{Example, Target, TaskKind, Vocabulary};

use crate::error::{Error, Result};
use crate::fsutil::{read_jsonl, write_jsonl};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LabelField {
    One(String),
    Many(Vec<String>),
}

impl LabelField {
    pub fn as_slice(&self) -> &[String] {
        match self {
            LabelField::One(l) => std::slice::from_ref(l),
            LabelField::Many(ls) => ls,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRecord {
    pub id: String,
    pub text: String,
    pub labels: LabelField,
}

pub fn read_dataset(path: &Path) -> Result<Vec<DatasetRecord>> {
    let records: Vec<DatasetRecord> = read_jsonl(path)?;
    if records.is_empty() {
        return Err(Error::format(path, "dataset has no records"));
    }
    let mut ids = BTreeSet::new();
    for r in &records {
        if !ids.insert(r.id.as_str()) {
            return Err(Error::format(path, format!("duplicate id `{}`", r.id)));
        }
        if r.labels.as_slice().is_empty() {
            return Err(Error::format(
                path,
                format!("record `{}` has no labels", r.id),
            ));
        }
    }
    Ok(records)
}

pub fn write_dataset(path: &Path, records: &[DatasetRecord]) -> Result<()> {
    write_jsonl(path, records)
}

/// Label names in sorted order; a label's index is its position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSpace(Vec<String>);

impl LabelSpace {
    pub fn from_records<'a>(records: impl IntoIterator<Item = &'a DatasetRecord>) -> Self {
        let names: BTreeSet<&String> = records
            .into_iter()
            .flat_map(|r| r.labels.as_slice())
            .collect();
        Self(names.into_iter().cloned().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.0.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }
}

/// Tokenized train and validation splits with their shared vocabulary
/// (built from the training texts only) and label space.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub vocab: Vocabulary,
    pub labels: LabelSpace,
    pub train: Vec<Example>,
    pub valid: Vec<Example>,
}

impl PreparedData {
    pub fn new(
        train: &[DatasetRecord],
        valid: &[DatasetRecord],
        task: TaskKind,
        max_len: usize,
    ) -> Result<Self> {
        let vocab = Vocabulary::build(train.iter().map(|r| r.text.as_str()), max_len);
        let labels = LabelSpace::from_records(train.iter().chain(valid));
        if task == TaskKind::Multiclass && labels.len() < 2 {
            return Err(Error::Validation(format!(
                "a multiclass task needs at least 2 labels, found {}",
                labels.len()
            )));
        }
        let train = to_examples(train, &vocab, &labels, task)?;
        let valid = to_examples(valid, &vocab, &labels, task)?;
        Ok(Self {
            vocab,
            labels,
            train,
            valid,
        })
    }
}

pub fn to_examples(
    records: &[DatasetRecord],
    vocab: &Vocabulary,
    labels: &LabelSpace,
    task: TaskKind,
) -> Result<Vec<Example>> {
    records
        .iter()
        .map(|r| {
            let names = r.labels.as_slice();
            let index = |n: &String| {
                labels
                    .index(n)
                    .ok_or_else(|| Error::Validation(format!("unknown label `{n}` on `{}`", r.id)))
            };
            let target = match task {
                TaskKind::Multiclass => match names {
                    [one] => Target::Class(index(one)?),
                    _ => {
                        return Err(Error::Validation(format!(
                            "multiclass record `{}` has {} labels",
                            r.id,
                            names.len()
                        )))
                    }
                },
                TaskKind::Multilabel => {
                    let mut y = vec![0u8; labels.len()];
                    for n in names {
                        y[index(n)?] = 1;
                    }
                    Target::Labels(y)
                }
            };
            Ok(Example {
                id: r.id.clone(),
                tokens: vocab.tokenize(&r.text),
                target,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, text: &str, labels: LabelField) -> DatasetRecord {
        DatasetRecord {
            id: id.into(),
            text: text.into(),
            labels,
        }
    }

    #[test]
    fn parses_both_label_shapes() {
        let one: DatasetRecord =
            serde_json::from_str(r#"{"id":"a","text":"x y","labels":"pos"}"#).unwrap();
        assert_eq!(one.labels, LabelField::One("pos".into()));
        let many: DatasetRecord =
            serde_json::from_str(r#"{"id":"b","text":"","labels":["cs.AI","cs.LG"]}"#).unwrap();
        assert_eq!(many.labels.as_slice().len(), 2);
        assert!(
            serde_json::from_str::<DatasetRecord>(r#"{"id":"c","text":"","labels":3}"#).is_err()
        );
    }

    #[test]
    fn prepares_multilabel() {
        let train = [
            rec(
                "a",
                "Deep nets",
                LabelField::Many(vec!["lg".into(), "ai".into()]),
            ),
            rec("b", "graphs", LabelField::One("dm".into())),
        ];
        let data = PreparedData::new(&train, &train[1..], TaskKind::Multilabel, 250).unwrap();
        assert_eq!(data.labels.names(), ["ai", "dm", "lg"]);
        assert_eq!(data.train[0].target, Target::Labels(vec![1, 0, 1]));
        assert_eq!(data.train[0].tokens, [2, 4]);
        assert_eq!(data.valid[0].target, Target::Labels(vec![0, 1, 0]));
    }

    #[test]
    fn multiclass_needs_single_label() {
        let train = [
            rec("a", "x", LabelField::Many(vec!["p".into(), "q".into()])),
            rec("b", "y", LabelField::One("q".into())),
        ];
        assert!(matches!(
            PreparedData::new(&train, &[], TaskKind::Multiclass, 10),
            Err(Error::Validation(_))
        ));
    }
}
