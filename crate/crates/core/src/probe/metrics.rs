use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::PredictionSet;
use crate::corpus::ClassId;
use crate::dataset::ProbeDataset;
use crate::{Error, Result};

/// Pooled decision counts over (example, class) pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct F1Counts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl F1Counts {
    pub fn add(&mut self, predicted: bool, gold: bool) {
        match (predicted, gold) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => {}
        }
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Pairs each test example with its predicted label set. Predictions must
/// cover exactly the test split.
pub fn align<'a>(
    pred: &'a PredictionSet<Vec<ClassId>>,
    gold: &'a ProbeDataset,
) -> Result<Vec<(&'a [ClassId], &'a [ClassId])>> {
    let mut by_word: HashMap<&str, &[ClassId]> = HashMap::with_capacity(pred.len());
    for p in &pred.entries {
        if by_word.insert(p.word.as_str(), &p.label).is_some() {
            return Err(Error::ExampleMismatch(format!("duplicate prediction for {}", p.word)));
        }
    }
    let mut pairs = Vec::with_capacity(by_word.len());
    for ex in gold.test() {
        let predicted = by_word
            .remove(ex.word.as_str())
            .ok_or_else(|| Error::ExampleMismatch(format!("no prediction for {}", ex.word)))?;
        pairs.push((predicted, ex.labels.as_slice()));
    }
    if let Some(extra) = by_word.keys().next() {
        return Err(Error::ExampleMismatch(format!("{extra} is not a test example")));
    }
    Ok(pairs)
}

pub fn f1_counts(pred: &PredictionSet<Vec<ClassId>>, gold: &ProbeDataset) -> Result<F1Counts> {
    let mut counts = F1Counts::default();
    for (predicted, labels) in align(pred, gold)? {
        for c in gold.inventory.ids() {
            counts.add(predicted.contains(&c), labels.contains(&c));
        }
    }
    Ok(counts)
}

/// F1 from true/false positives and false negatives pooled over every
/// (test example, class) decision.
pub fn micro_f1(pred: &PredictionSet<Vec<ClassId>>, gold: &ProbeDataset) -> Result<f64> {
    Ok(f1_counts(pred, gold)?.f1())
}

/// Per-class counts in inventory order.
pub fn per_class_counts(
    pred: &PredictionSet<Vec<ClassId>>,
    gold: &ProbeDataset,
) -> Result<Vec<F1Counts>> {
    let mut counts = vec![F1Counts::default(); gold.inventory.len()];
    for (predicted, labels) in align(pred, gold)? {
        for c in gold.inventory.ids() {
            counts[c.index()].add(predicted.contains(&c), labels.contains(&c));
        }
    }
    Ok(counts)
}
