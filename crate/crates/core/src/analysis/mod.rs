//! Probe results sliced by dominance, number of classes, frequency and
//! typicality, plus nearest-neighbor class diversity.

mod binning;
mod compat;
mod neighbors;

use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

pub use binning::{Factor, FactorBinning};
pub use compat::{typicality, CompatibilityMatrix};
pub use neighbors::{
    diversity_by_dominance, neighbor_diversity, DiversityBin, NeighborDiversity, WordDiversity,
};

use crate::corpus::ClassId;
use crate::dataset::ProbeDataset;
use crate::lexicon::SenseLexicon;
use crate::probe::PredictionSet;
use crate::{Error, Result};

/// Share of the word's labeled mentions carrying `class`.
pub fn dominance_of_pair(lexicon: &SenseLexicon, word: &str, class: ClassId) -> Result<f64> {
    lexicon.dominance(word, class)
}

/// Raw count of (word, class) mentions.
pub fn frequency_of_pair(lexicon: &SenseLexicon, word: &str, class: ClassId) -> Result<u64> {
    lexicon.pair_frequency(word, class)
}

/// Factor value of a gold pair; `None` when the factor is undefined for it
/// (typicality of a single-class word).
pub fn factor_value(
    factor: Factor,
    lexicon: &SenseLexicon,
    compat: Option<&CompatibilityMatrix>,
    word: &str,
    class: ClassId,
) -> Result<Option<f64>> {
    match factor {
        Factor::Dominance => dominance_of_pair(lexicon, word, class).map(Some),
        Factor::Frequency => frequency_of_pair(lexicon, word, class).map(|f| Some(f as f64)),
        Factor::NumClasses => {
            frequency_of_pair(lexicon, word, class)?;
            Ok(lexicon.get(word).map(|e| e.num_classes() as f64))
        }
        Factor::Typicality => {
            let compat = compat.ok_or_else(|| {
                Error::Config("typicality needs a compatibility matrix".into())
            })?;
            match typicality(compat, lexicon, word, class) {
                Ok(t) => Ok(Some(t)),
                Err(Error::TypicalityUndefined(_)) => Ok(None),
                Err(e) => Err(e),
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub hits: usize,
    pub support: usize,
}

impl Tally {
    fn add(&mut self, hit: bool) {
        self.support += 1;
        self.hits += usize::from(hit);
    }

    /// `None` for an empty bin.
    pub fn recall(&self) -> Option<f64> {
        (self.support > 0).then(|| self.hits as f64 / self.support as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecallCurve {
    pub binning: FactorBinning,
    /// Parallel to `binning.centers`.
    pub bins: Vec<Tally>,
    /// Pairs whose value lies outside every bin.
    pub overflow: Tally,
    /// Pairs for which the factor is undefined.
    pub undefined: Tally,
}

impl RecallCurve {
    pub fn total(&self) -> Tally {
        self.bins
            .iter()
            .chain([&self.overflow, &self.undefined])
            .fold(Tally::default(), |a, t| Tally {
                hits: a.hits + t.hits,
                support: a.support + t.support,
            })
    }

    /// `(center, recall, support)` for every occupied bin.
    pub fn points(&self) -> Vec<(f64, f64, usize)> {
        self.binning
            .centers
            .iter()
            .zip(&self.bins)
            .filter_map(|(&c, t)| t.recall().map(|r| (c, r, t.support)))
            .collect()
    }

    /// `factor,bin_center,recall,support` for occupied bins, then `overflow`
    /// and `n/a` rows when those are occupied.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let factor = self.binning.factor;
        writeln!(out, "factor,bin_center,recall,support")?;
        for (c, r, s) in self.points() {
            writeln!(out, "{factor},{c},{r},{s}")?;
        }
        for (label, t) in [("overflow", &self.overflow), ("n/a", &self.undefined)] {
            if let Some(r) = t.recall() {
                writeln!(out, "{factor},{label},{r},{}", t.support)?;
            }
        }
        Ok(())
    }
}

/// Recall of gold (word, class) pairs of the predicted test words, per bin
/// of the pair's factor value.
pub fn recall_by_factor(
    pred: &PredictionSet<Vec<ClassId>>,
    dataset: &ProbeDataset,
    lexicon: &SenseLexicon,
    compat: Option<&CompatibilityMatrix>,
    binning: &FactorBinning,
) -> Result<RecallCurve> {
    let gold: HashMap<&str, &[ClassId]> = dataset
        .test()
        .map(|ex| (ex.word.as_str(), ex.labels.as_slice()))
        .collect();
    let mut curve = RecallCurve {
        binning: binning.clone(),
        bins: vec![Tally::default(); binning.centers.len()],
        overflow: Tally::default(),
        undefined: Tally::default(),
    };
    for p in &pred.entries {
        let labels = gold
            .get(p.word.as_str())
            .ok_or_else(|| Error::ExampleMismatch(format!("{} is not a test example", p.word)))?;
        for &c in *labels {
            let hit = p.label.contains(&c);
            match factor_value(binning.factor, lexicon, compat, &p.word, c)? {
                None => curve.undefined.add(hit),
                Some(v) => match binning.assign(v) {
                    Some(b) => curve.bins[b].add(hit),
                    None => curve.overflow.add(hit),
                },
            }
        }
    }
    if curve.overflow.support > 0 {
        log::warn!(
            "{} pairs fall outside the {} bins",
            curve.overflow.support,
            binning.factor
        );
    }
    Ok(curve)
}

/// Largest factor value over the gold pairs of the test split, for sizing
/// default bins.
pub fn observed_max(
    factor: Factor,
    dataset: &ProbeDataset,
    lexicon: &SenseLexicon,
    compat: Option<&CompatibilityMatrix>,
) -> Result<f64> {
    let mut max = 0.0f64;
    for ex in dataset.test() {
        for &c in &ex.labels {
            if let Some(v) = factor_value(factor, lexicon, compat, &ex.word, c)? {
                max = max.max(v);
            }
        }
    }
    Ok(max)
}

/// Spearman rank correlation with average ranks for ties; `None` when
/// either side is constant or fewer than two points are given.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = avg;
        }
        i = j + 1;
    }
    ranks
}
