//! Word vectors built as sums of a word's sense (word/S-class) vectors.
//!
//! `Unif` sums the sense vectors with unit weights. `Wght` weights each sense
//! by its share of the word's labeled mentions, renormalized over the senses
//! that actually have a vector.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{sense_token, ClassId};
use crate::embedding::{EmbeddingTable, Vocabulary};
use crate::lexicon::SenseLexicon;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregateMode {
    Unif,
    Wght,
}

impl AggregateMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AggregateMode::Unif => "unif",
            AggregateMode::Wght => "wght",
        }
    }
}

impl std::str::FromStr for AggregateMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unif" => Ok(AggregateMode::Unif),
            "wght" => Ok(AggregateMode::Wght),
            other => Err(Error::Config(format!("unknown aggregation `{other}`"))),
        }
    }
}

#[derive(Clone, Copy)]
pub struct AggregateSpec<'a> {
    pub mode: AggregateMode,
    pub lexicon: &'a SenseLexicon,
    pub senses: &'a EmbeddingTable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Aggregate {
    pub vector: Vec<f32>,
    /// Weight applied to each present sense.
    pub weights: Vec<(ClassId, f64)>,
    /// Senses in the lexicon without a vector in the sense table.
    pub missing: Vec<ClassId>,
}

pub fn aggregate(spec: &AggregateSpec<'_>, word: &str) -> Result<Aggregate> {
    let entry = spec
        .lexicon
        .get(word)
        .ok_or_else(|| Error::UnknownWord(word.to_string()))?;
    let inventory = spec.lexicon.inventory();
    let mut present = Vec::new();
    let mut missing = Vec::new();
    for (&class, &count) in &entry.counts {
        match spec.senses.get(&sense_token(word, inventory.name(class))) {
            Some(v) => present.push((class, count, v)),
            None => missing.push(class),
        }
    }
    if present.is_empty() {
        return Err(Error::NoSenseVectors(word.to_string()));
    }
    if !missing.is_empty() {
        log::warn!("{word}: {} of {} senses have no vector", missing.len(), entry.num_classes());
    }
    let denom: u64 = present.iter().map(|&(_, c, _)| c).sum();
    let weights: Vec<(ClassId, f64)> = present
        .iter()
        .map(|&(class, count, _)| {
            let w = match spec.mode {
                AggregateMode::Unif => 1.0,
                AggregateMode::Wght => count as f64 / denom as f64,
            };
            (class, w)
        })
        .collect();
    let mut acc = vec![0.0f64; spec.senses.dim()];
    for ((_, w), (_, _, v)) in weights.iter().zip(&present) {
        for (a, &x) in acc.iter_mut().zip(v.iter()) {
            *a += w * f64::from(x);
        }
    }
    Ok(Aggregate {
        vector: acc.into_iter().map(|x| x as f32).collect(),
        weights,
        missing,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageEntry {
    pub word: String,
    pub missing: Vec<String>,
    /// False when no sense vector was found and the word was left out.
    pub included: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub entries: Vec<CoverageEntry>,
}

impl CoverageReport {
    pub fn excluded(&self) -> impl Iterator<Item = &CoverageEntry> {
        self.entries.iter().filter(|e| !e.included)
    }

    /// `word,missing_classes` with classes joined by `;`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "word,missing_classes")?;
        for e in &self.entries {
            writeln!(out, "{},{}", e.word, e.missing.join(";"))?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(BufWriter::new(file))
    }
}

/// Aggregated vectors for `words`, in the given order. Words without any
/// sense vector are left out and listed in the coverage report, as are words
/// with some senses missing.
pub fn build_aggregate_table<S: AsRef<str>>(
    spec: &AggregateSpec<'_>,
    words: &[S],
) -> Result<(EmbeddingTable, CoverageReport)> {
    if words.is_empty() {
        return Err(Error::Config("no words to aggregate".into()));
    }
    let inventory = spec.lexicon.inventory();
    let mut rows = Vec::with_capacity(words.len());
    let mut counts = Vec::with_capacity(words.len());
    let mut report = CoverageReport::default();
    for word in words {
        let word = word.as_ref();
        match aggregate(spec, word) {
            Ok(agg) => {
                if !agg.missing.is_empty() {
                    report.entries.push(CoverageEntry {
                        word: word.to_string(),
                        missing: agg.missing.iter().map(|&c| inventory.name(c).to_string()).collect(),
                        included: true,
                    });
                }
                counts.push(spec.lexicon.frequency(word).unwrap_or(0));
                rows.push((word.to_string(), agg.vector));
            }
            Err(Error::NoSenseVectors(_)) => {
                let entry = spec.lexicon.get(word).expect("checked by aggregate");
                report.entries.push(CoverageEntry {
                    word: word.to_string(),
                    missing: entry.classes().map(|c| inventory.name(c).to_string()).collect(),
                    included: false,
                });
            }
            Err(e) => return Err(e),
        }
    }
    let dim = spec.senses.dim();
    let (names, vectors): (Vec<String>, Vec<Vec<f32>>) = rows.into_iter().unzip();
    let vocab = Vocabulary::from_words(names, counts, 0)?;
    let table = EmbeddingTable::new(
        vocab,
        dim,
        vectors.concat(),
        Vec::new(),
        crate::embedding::TableMode::Imported,
    )?;
    Ok((table, report))
}
