use std::collections::HashMap;

use crate::{Error, Result};

/// Corpus vocabulary, most frequent word first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    min_count: u64,
}

impl Vocabulary {
    /// Vocabulary with the given word order (used for imported and derived tables).
    pub fn from_words(words: Vec<String>, counts: Vec<u64>, min_count: u64) -> Result<Self> {
        if words.len() != counts.len() {
            return Err(Error::Config("words and counts differ in length".into()));
        }
        if words.len() > u32::MAX as usize {
            return Err(Error::Config("vocabulary too large".into()));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i as u32).is_some() {
                return Err(Error::Config(format!("duplicate word `{w}`")));
            }
        }
        Ok(Vocabulary {
            words,
            counts,
            index,
            min_count,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn idx(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, idx: usize) -> &str {
        &self.words[idx]
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Words occurring at least `min_count` times, by descending count with ties
/// broken lexicographically.
pub fn build_vocab<I, S, T>(sentences: I, min_count: u64) -> Result<Vocabulary>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[T]>,
    T: AsRef<str>,
{
    if min_count == 0 {
        return Err(Error::Config("min_count must be at least 1".into()));
    }
    let mut freq: HashMap<String, u64> = HashMap::new();
    let mut n_tokens = 0u64;
    for sentence in sentences {
        for token in sentence.as_ref() {
            n_tokens += 1;
            match freq.get_mut(token.as_ref()) {
                Some(c) => *c += 1,
                None => {
                    freq.insert(token.as_ref().to_string(), 1);
                }
            }
        }
    }
    if n_tokens == 0 {
        return Err(Error::EmptyCorpus);
    }
    let mut entries: Vec<(String, u64)> = freq.into_iter().filter(|&(_, c)| c >= min_count).collect();
    if entries.is_empty() {
        return Err(Error::Config(format!("no word occurs at least {min_count} times")));
    }
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    let (words, counts) = entries.into_iter().unzip();
    Vocabulary::from_words(words, counts, min_count)
}
