use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{ClassId, ClassInventory};
use crate::dataset::ProbeDataset;
use crate::lexicon::SenseLexicon;
use crate::{Error, Result};

/// Pearson correlations between class-indicator vectors over a set of words.
/// Classes without variance get 0 everywhere, including the diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompatibilityMatrix {
    pub classes: Vec<String>,
    values: Vec<f64>,
}

impl CompatibilityMatrix {
    pub fn from_label_sets<'a>(
        inventory: &ClassInventory,
        sets: impl IntoIterator<Item = &'a [ClassId]>,
    ) -> Self {
        let c = inventory.len();
        let mut n: i128 = 0;
        let mut single = vec![0i128; c];
        let mut joint = vec![0i128; c * c];
        for set in sets {
            n += 1;
            for &a in set {
                single[a.index()] += 1;
                for &b in set {
                    joint[a.index() * c + b.index()] += 1;
                }
            }
        }
        let mut values = vec![0.0; c * c];
        let mut flat = 0;
        for a in 0..c {
            let va = n * single[a] - single[a] * single[a];
            if va == 0 {
                flat += 1;
                continue;
            }
            for b in 0..c {
                let vb = n * single[b] - single[b] * single[b];
                if vb == 0 {
                    continue;
                }
                let cov = n * joint[a * c + b] - single[a] * single[b];
                values[a * c + b] = if a == b {
                    1.0
                } else {
                    (cov as f64 / ((va as f64) * (vb as f64)).sqrt()).clamp(-1.0, 1.0)
                };
            }
        }
        if flat > 0 {
            log::info!("{flat} classes have no variance over the words; compatibility set to 0");
        }
        CompatibilityMatrix {
            classes: inventory.names().to_vec(),
            values,
        }
    }

    /// Computed over the training split.
    pub fn from_dataset(dataset: &ProbeDataset) -> Self {
        Self::from_label_sets(
            &dataset.inventory,
            dataset.train().map(|ex| ex.labels.as_slice()),
        )
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn get(&self, a: ClassId, b: ClassId) -> f64 {
        self.values[a.index() * self.len() + b.index()]
    }

    /// Header `class,<names...>`, then one row per class.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "class,{}", self.classes.join(","))?;
        for (a, name) in self.classes.iter().enumerate() {
            let row: Vec<String> = self.values[a * self.len()..(a + 1) * self.len()]
                .iter()
                .map(f64::to_string)
                .collect();
            writeln!(out, "{name},{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Mean compatibility of `class` with the word's other classes.
pub fn typicality(
    compat: &CompatibilityMatrix,
    lexicon: &SenseLexicon,
    word: &str,
    class: ClassId,
) -> Result<f64> {
    let entry = lexicon.get(word).ok_or_else(|| Error::UnknownWord(word.into()))?;
    if !entry.counts.contains_key(&class) {
        return Err(Error::AbsentPair {
            word: word.into(),
            class: lexicon.inventory().name(class).into(),
        });
    }
    let others: Vec<ClassId> = entry.classes().filter(|&c| c != class).collect();
    if others.is_empty() {
        return Err(Error::TypicalityUndefined(word.into()));
    }
    Ok(others.iter().map(|&c| compat.get(class, c)).sum::<f64>() / others.len() as f64)
}
