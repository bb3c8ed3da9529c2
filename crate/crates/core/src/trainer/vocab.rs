use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

pub const PAD: u32 = 0;
pub const UNK: u32 = 1;
const FIRST_WORD: u32 = 2;

/// Lower-cased whitespace tokens mapped to dense ids. Ids 0 and 1 are
/// reserved for padding and unknown words; the rest follow the sorted word
/// list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    index: BTreeMap<String, u32>,
    max_len: usize,
}

impl Vocabulary {
    pub fn build<'a>(texts: impl IntoIterator<Item = &'a str>, max_len: usize) -> Self {
        let words: BTreeSet<String> = texts.into_iter().flat_map(words).collect();
        Self::from_words(words, max_len)
    }

    /// Assigns ids in sorted order of the distinct `words`.
    pub fn from_words(words: impl IntoIterator<Item = String>, max_len: usize) -> Self {
        let sorted: BTreeSet<String> = words.into_iter().collect();
        let index = sorted.into_iter().zip(FIRST_WORD..).collect();
        Self { index, max_len }
    }

    /// Number of ids including the two reserved ones.
    pub fn len(&self) -> usize {
        self.index.len() + FIRST_WORD as usize
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    /// Words in id order, starting at id 2.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(String::as_str)
    }

    pub fn tokenize(&self, text: &str) -> Vec<u32> {
        let mut ids: Vec<u32> = words(text)
            .take(self.max_len)
            .map(|w| self.id(&w).unwrap_or(UNK))
            .collect();
        if ids.is_empty() {
            ids = vec![UNK];
        }
        ids
    }
}

fn words(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace().map(str::to_lowercase)
}
