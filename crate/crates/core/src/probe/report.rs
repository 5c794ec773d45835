use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::metrics::F1Counts;
use super::tasks::AmbiguityLabel;
use super::PredictionSet;
use crate::corpus::{ClassId, ClassInventory};
use crate::dataset::ProbeDataset;
use crate::lexicon::SenseLexicon;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassScore {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold test positives.
    pub support: u64,
    pub train_positives: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinScore {
    pub key: String,
    pub value: f64,
    pub support: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: String,
    pub classifier: String,
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_class: Vec<ClassScore>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bins: Vec<BinScore>,
    pub evaluated: usize,
    #[serde(default)]
    pub excluded: Vec<String>,
    #[serde(default)]
    pub warnings: Vec<String>,
    pub fingerprint: String,
}

impl EvalReport {
    pub fn new(task: &str, classifier: &str) -> Self {
        EvalReport {
            task: task.into(),
            classifier: classifier.into(),
            ..EvalReport::default()
        }
    }

    pub(crate) fn insert_f1(&mut self, counts: &F1Counts) {
        self.metrics.insert("micro_f1".into(), counts.f1());
        self.metrics.insert("precision".into(), counts.precision());
        self.metrics.insert("recall".into(), counts.recall());
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out).and_then(|_| out.flush()).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }

    /// `class,precision,recall,f1,support`
    pub fn write_per_class_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "class,precision,recall,f1,support")?;
        for s in &self.per_class {
            writeln!(out, "{},{},{},{},{}", s.class, s.precision, s.recall, s.f1, s.support)?;
        }
        Ok(())
    }
}

/// One line per word: `word<TAB>class,class,...` (empty after the tab when
/// nothing was predicted).
pub fn write_sclass_predictions<W: Write>(
    pred: &PredictionSet<Vec<ClassId>>,
    inventory: &ClassInventory,
    mut out: W,
) -> Result<()> {
    for p in &pred.entries {
        let names: Vec<&str> = p.label.iter().map(|&c| inventory.name(c)).collect();
        writeln!(out, "{}\t{}", p.word, names.join(","))?;
    }
    Ok(())
}

pub fn read_sclass_predictions<R: BufRead>(
    reader: R,
    inventory: &ClassInventory,
) -> Result<PredictionSet<Vec<ClassId>>> {
    let mut entries = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let (word, classes) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(i + 1, "expected word<TAB>classes"))?;
        let mut label = classes
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| inventory.id(s))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Record {
                line: i + 1,
                source: Box::new(e),
            })?;
        label.sort();
        entries.push((word.to_string(), label));
    }
    Ok(entries.into_iter().collect())
}

/// `word,frequency,classes,likelihood` with gold classes joined by `;`.
pub fn write_likelihood_csv<W: Write>(
    pred: &PredictionSet<AmbiguityLabel>,
    dataset: &ProbeDataset,
    lexicon: &SenseLexicon,
    mut out: W,
) -> Result<()> {
    let gold: BTreeMap<&str, &[ClassId]> = dataset
        .examples
        .iter()
        .map(|ex| (ex.word.as_str(), ex.labels.as_slice()))
        .collect();
    writeln!(out, "word,frequency,classes,likelihood")?;
    for p in &pred.entries {
        let classes: Vec<&str> = gold
            .get(p.word.as_str())
            .map(|ls| ls.iter().map(|&c| dataset.inventory.name(c)).collect())
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{}",
            p.word,
            lexicon.frequency(&p.word).unwrap_or(0),
            classes.join(";"),
            p.label.likelihood
        )?;
    }
    Ok(())
}
