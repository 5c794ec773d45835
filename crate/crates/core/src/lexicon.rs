//! Word → S-class mention-count lexicon.

use std::borrow::Borrow;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::{mention_token, AnnotatedSentence, ClassId, ClassInventory};
use crate::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct WordEntry {
    /// Mentions of the word labeled with each class. All counts are ≥ 1.
    pub counts: BTreeMap<ClassId, u64>,
    /// Number of mentions of the word (equals the `@word@` token frequency).
    pub mentions: u64,
}

impl WordEntry {
    pub fn total_class_count(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn classes(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.counts.keys().copied()
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SenseLexicon {
    inventory: ClassInventory,
    entries: BTreeMap<String, WordEntry>,
}

impl SenseLexicon {
    pub fn new(inventory: ClassInventory) -> Self {
        SenseLexicon {
            inventory,
            entries: BTreeMap::new(),
        }
    }

    /// Builds a lexicon from explicit `(word, class, count)` triples. Mention
    /// totals are taken as the sum of class counts.
    pub fn from_counts<I, W>(inventory: ClassInventory, counts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (W, ClassId, u64)>,
        W: Into<String>,
    {
        let mut lexicon = SenseLexicon::new(inventory);
        for (word, class, count) in counts {
            if class.index() >= lexicon.inventory.len() {
                return Err(Error::UnknownClass(class.to_string()));
            }
            if count == 0 {
                continue;
            }
            let entry = lexicon.entries.entry(word.into()).or_default();
            *entry.counts.entry(class).or_insert(0) += count;
            entry.mentions += count;
        }
        Ok(lexicon)
    }

    pub fn inventory(&self) -> &ClassInventory {
        &self.inventory
    }

    /// Adds every mention of `sentence`, keyed by its word-corpus token.
    pub fn observe(&mut self, sentence: &AnnotatedSentence, lowercase: bool) {
        for m in &sentence.mentions {
            let word = mention_token(&sentence.surface(m), lowercase);
            let entry = self.entries.entry(word).or_default();
            entry.mentions += 1;
            for &class in &m.classes {
                *entry.counts.entry(class).or_insert(0) += 1;
            }
        }
    }

    pub fn merge(&mut self, other: SenseLexicon) {
        for (word, theirs) in other.entries {
            let entry = self.entries.entry(word).or_default();
            entry.mentions += theirs.mentions;
            for (class, count) in theirs.counts {
                *entry.counts.entry(class).or_insert(0) += count;
            }
        }
    }

    /// Drops words with fewer than `min_word_freq` mentions.
    pub fn retain_min_freq(&mut self, min_word_freq: u64) {
        self.entries.retain(|_, e| e.mentions >= min_word_freq);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&WordEntry> {
        self.entries.get(word)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    /// Words in lexicographic order.
    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &WordEntry)> {
        self.entries.iter().map(|(w, e)| (w.as_str(), e))
    }

    pub fn count(&self, word: &str, class: ClassId) -> u64 {
        self.entries
            .get(word)
            .and_then(|e| e.counts.get(&class))
            .copied()
            .unwrap_or(0)
    }

    /// Total mention frequency of `word`.
    pub fn frequency(&self, word: &str) -> Option<u64> {
        self.entries.get(word).map(|e| e.mentions)
    }

    /// Σ counts over all (word, class) pairs.
    pub fn total_pairs(&self) -> u64 {
        self.entries.values().map(WordEntry::total_class_count).sum()
    }

    fn entry_for_pair(&self, word: &str, class: ClassId) -> Result<(&WordEntry, u64)> {
        self.entries
            .get(word)
            .and_then(|e| e.counts.get(&class).map(|&c| (e, c)))
            .ok_or_else(|| Error::AbsentPair {
                word: word.to_string(),
                class: self
                    .inventory
                    .names()
                    .get(class.index())
                    .cloned()
                    .unwrap_or_else(|| class.to_string()),
            })
    }

    /// Share of the word's labeled mentions that carry `class`.
    pub fn dominance(&self, word: &str, class: ClassId) -> Result<f64> {
        let (entry, count) = self.entry_for_pair(word, class)?;
        Ok(count as f64 / entry.total_class_count() as f64)
    }

    /// Raw mention count of the pair.
    pub fn pair_frequency(&self, word: &str, class: ClassId) -> Result<u64> {
        self.entry_for_pair(word, class).map(|(_, c)| c)
    }

    /// Lines of the form `word<TAB>class:count,class:count`, classes in inventory order.
    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        for (word, entry) in &self.entries {
            let counts: Vec<String> = entry
                .counts
                .iter()
                .map(|(&c, n)| format!("{}:{n}", self.inventory.name(c)))
                .collect();
            writeln!(out, "{word}\t{}", counts.join(","))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_tsv(BufWriter::new(file))
    }

    /// Reads the TSV format; mention totals are restored as the sum of class counts.
    pub fn read_tsv<R: BufRead>(reader: R, inventory: ClassInventory) -> Result<Self> {
        let mut lexicon = SenseLexicon::new(inventory);
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (word, counts) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(line_no, "expected `word<TAB>class:count,...`"))?;
            let mut entry = WordEntry::default();
            for item in counts.split(',') {
                let (class, n) = item
                    .rsplit_once(':')
                    .ok_or_else(|| Error::parse(line_no, format!("malformed count `{item}`")))?;
                let class = lexicon.inventory.id(class).map_err(|e| Error::Record {
                    line: line_no,
                    source: Box::new(e),
                })?;
                let n: u64 = n
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("non-numeric count `{n}`")))?;
                if n == 0 {
                    return Err(Error::parse(line_no, "counts must be positive"));
                }
                entry.counts.insert(class, n);
                entry.mentions += n;
            }
            if lexicon.entries.insert(word.to_string(), entry).is_some() {
                return Err(Error::parse(line_no, format!("duplicate word `{word}`")));
            }
        }
        Ok(lexicon)
    }

    pub fn load(path: impl AsRef<Path>, inventory: &ClassInventory) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_tsv(BufReader::new(file), inventory.clone())
    }
}

/// Counts every (mention, class) pair of the stream, then drops words with
/// fewer than `min_word_freq` mentions.
pub fn build_sense_lexicon<I, S>(
    sentences: I,
    inventory: &ClassInventory,
    min_word_freq: u64,
    lowercase: bool,
) -> Result<SenseLexicon>
where
    I: IntoIterator<Item = S>,
    S: Borrow<AnnotatedSentence>,
{
    if min_word_freq == 0 {
        return Err(Error::Config("min_word_freq must be at least 1".into()));
    }
    let mut lexicon = SenseLexicon::new(inventory.clone());
    for sentence in sentences {
        lexicon.observe(sentence.borrow(), lowercase);
    }
    lexicon.retain_min_freq(min_word_freq);
    Ok(lexicon)
}

/// Sharded version of [`build_sense_lexicon`]; the result is identical.
pub fn build_sense_lexicon_par(
    sentences: &[AnnotatedSentence],
    inventory: &ClassInventory,
    min_word_freq: u64,
    lowercase: bool,
) -> Result<SenseLexicon> {
    if min_word_freq == 0 {
        return Err(Error::Config("min_word_freq must be at least 1".into()));
    }
    let mut lexicon = sentences
        .par_chunks(4096)
        .map(|shard| {
            let mut lex = SenseLexicon::new(inventory.clone());
            for s in shard {
                lex.observe(s, lowercase);
            }
            lex
        })
        .reduce(
            || SenseLexicon::new(inventory.clone()),
            |mut a, b| {
                a.merge(b);
                a
            },
        );
    lexicon.retain_min_freq(min_word_freq);
    Ok(lexicon)
}
