use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::binning::FactorBinning;
use crate::corpus::ClassId;
use crate::embedding::{cosine, EmbeddingTable};
use crate::lexicon::SenseLexicon;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordDiversity {
    pub word: String,
    /// Most similar first.
    pub neighbors: Vec<String>,
    /// Distinct classes over the neighbors that have lexicon entries.
    pub unique_classes: usize,
    /// Neighbors without a lexicon entry.
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeighborDiversity {
    pub k: usize,
    pub words: Vec<WordDiversity>,
    pub mean: f64,
    pub skipped: usize,
}

impl NeighborDiversity {
    /// `word,unique_classes,skipped`
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "word,unique_classes,skipped")?;
        for w in &self.words {
            writeln!(out, "{},{},{}", w.word, w.unique_classes, w.skipped)?;
        }
        Ok(())
    }
}

/// For each word, the number of distinct gold classes among its `k` cosine
/// nearest neighbors (itself excluded). Neighbors are drawn from
/// `candidates` when given, else from every word in the table.
pub fn neighbor_diversity<S: AsRef<str> + Sync>(
    table: &EmbeddingTable,
    lexicon: &SenseLexicon,
    words: &[S],
    k: usize,
    candidates: Option<&[S]>,
) -> Result<NeighborDiversity> {
    let pool: Vec<usize> = match candidates {
        Some(c) => c
            .iter()
            .map(|w| lookup(table, w.as_ref()))
            .collect::<Result<_>>()?,
        None => (0..table.len()).collect(),
    };
    let results = words
        .par_iter()
        .map(|w| {
            let word = w.as_ref();
            let idx = lookup(table, word)?;
            let available = pool.iter().filter(|&&j| j != idx).count();
            if k == 0 || k > available {
                return Err(Error::KTooLarge { k, n: available });
            }
            let q = table.vector(idx);
            if q.iter().all(|&x| x == 0.0) {
                return Err(Error::ZeroVector);
            }
            let mut sims: Vec<(usize, f64)> = pool
                .iter()
                .filter(|&&j| j != idx)
                .map(|&j| (j, cosine(q, table.vector(j)).unwrap_or(0.0)))
                .collect();
            sims.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            sims.truncate(k);
            let mut classes: BTreeSet<ClassId> = BTreeSet::new();
            let mut skipped = 0;
            let mut neighbors = Vec::with_capacity(k);
            for &(j, _) in &sims {
                let nw = table.vocab().word(j);
                neighbors.push(nw.to_string());
                match lexicon.get(nw) {
                    Some(e) => classes.extend(e.classes()),
                    None => skipped += 1,
                }
            }
            Ok(WordDiversity {
                word: word.to_string(),
                neighbors,
                unique_classes: classes.len(),
                skipped,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = if results.is_empty() {
        0.0
    } else {
        results.iter().map(|w| w.unique_classes as f64).sum::<f64>() / results.len() as f64
    };
    let skipped = results.iter().map(|w| w.skipped).sum();
    if skipped > 0 {
        log::info!("{skipped} neighbors have no lexicon entry and were skipped");
    }
    Ok(NeighborDiversity {
        k,
        words: results,
        mean,
        skipped,
    })
}

fn lookup(table: &EmbeddingTable, word: &str) -> Result<usize> {
    table
        .vocab()
        .idx(word)
        .map(|i| i as usize)
        .ok_or_else(|| Error::Embedding(format!("no vector for `{word}`")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiversityBin {
    pub center: f64,
    pub mean: f64,
    pub support: usize,
}

/// Mean diversity of exactly-two-class words grouped by the dominance of
/// their minority class. Words outside every bin are dropped.
pub fn diversity_by_dominance(
    diversity: &NeighborDiversity,
    lexicon: &SenseLexicon,
    binning: &FactorBinning,
) -> Vec<DiversityBin> {
    let mut acc = vec![(0.0, 0usize); binning.centers.len()];
    for w in &diversity.words {
        let Some(entry) = lexicon.get(&w.word) else { continue };
        if entry.num_classes() != 2 {
            continue;
        }
        let minority = entry.counts.values().copied().min().unwrap_or(0) as f64
            / entry.total_class_count() as f64;
        if let Some(b) = binning.assign(minority) {
            acc[b].0 += w.unique_classes as f64;
            acc[b].1 += 1;
        }
    }
    binning
        .centers
        .iter()
        .zip(acc)
        .filter(|(_, (_, n))| *n > 0)
        .map(|(&center, (sum, support))| DiversityBin {
            center,
            mean: sum / support as f64,
            support,
        })
        .collect()
}
