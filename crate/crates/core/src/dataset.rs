//! The balanced word/S-class probing dataset.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{ClassId, ClassInventory};
use crate::lexicon::SenseLexicon;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeExample {
    pub word: String,
    /// Gold classes in inventory order; never empty.
    pub labels: Vec<ClassId>,
    pub split: Split,
}

impl ProbeExample {
    pub fn multi_hot(&self, n_classes: usize) -> Vec<bool> {
        let mut v = vec![false; n_classes];
        for c in &self.labels {
            v[c.index()] = true;
        }
        v
    }

    pub fn has(&self, class: ClassId) -> bool {
        self.labels.binary_search(&class).is_ok()
    }

    pub fn is_ambiguous(&self) -> bool {
        self.labels.len() >= 2
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProbeDataset {
    pub inventory: ClassInventory,
    pub seed: u64,
    pub examples: Vec<ProbeExample>,
}

impl ProbeDataset {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &ProbeExample> {
        self.examples.iter().filter(move |e| e.split == split)
    }

    pub fn train(&self) -> impl Iterator<Item = &ProbeExample> {
        self.split(Split::Train)
    }

    pub fn test(&self) -> impl Iterator<Item = &ProbeExample> {
        self.split(Split::Test)
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Copy keeping only examples whose word satisfies `keep`.
    pub fn restricted(&self, keep: impl Fn(&str) -> bool) -> ProbeDataset {
        ProbeDataset {
            inventory: self.inventory.clone(),
            seed: self.seed,
            examples: self.examples.iter().filter(|e| keep(&e.word)).cloned().collect(),
        }
    }

    pub fn write_tsv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# seed={}", self.seed)?;
        for e in &self.examples {
            let names: Vec<&str> = e.labels.iter().map(|&c| self.inventory.name(c)).collect();
            writeln!(out, "{}\t{}\t{}", e.word, names.join(","), e.split)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_tsv(BufWriter::new(file))
    }

    pub fn read_tsv<R: BufRead>(reader: R, inventory: ClassInventory) -> Result<Self> {
        let mut seed = 0;
        let mut examples = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line_no = i + 1;
            if let Some(header) = line.strip_prefix('#') {
                if let Some(v) = header.trim().strip_prefix("seed=") {
                    seed = v
                        .parse()
                        .map_err(|_| Error::parse(line_no, format!("bad seed `{v}`")))?;
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [word, classes, split] = fields[..] else {
                return Err(Error::parse(line_no, "expected `word<TAB>classes<TAB>split`"));
            };
            let mut labels = classes
                .split(',')
                .map(|c| inventory.id(c))
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::Record {
                    line: line_no,
                    source: Box::new(e),
                })?;
            labels.sort_unstable();
            labels.dedup();
            let split = match split {
                "train" => Split::Train,
                "test" => Split::Test,
                other => return Err(Error::parse(line_no, format!("bad split `{other}`"))),
            };
            examples.push(ProbeExample {
                word: word.to_string(),
                labels,
                split,
            });
        }
        Ok(ProbeDataset {
            inventory,
            seed,
            examples,
        })
    }

    pub fn load(path: impl AsRef<Path>, inventory: &ClassInventory) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_tsv(BufReader::new(file), inventory.clone())
    }
}

/// Warning text when single-class words are too scarce to balance the dataset.
pub fn balance_warning(lexicon: &SenseLexicon) -> Option<String> {
    let multi = lexicon.iter().filter(|(_, e)| e.num_classes() > 1).count();
    let single = lexicon.len() - multi;
    (single < multi).then(|| {
        format!("only {single} single-class words for {multi} multiclass words; using all of them")
    })
}

/// All multiclass words plus an equal-size uniform sample of single-class
/// words, each group split half/half between train and test.
///
/// Odd group sizes drop one randomly chosen word so both splits stay equal.
pub fn build_probe_dataset(lexicon: &SenseLexicon, seed: u64) -> Result<ProbeDataset> {
    if lexicon.is_empty() {
        return Err(Error::Config("cannot build a dataset from an empty lexicon".into()));
    }
    let (mut multi, mut single): (Vec<&str>, Vec<&str>) = lexicon
        .iter()
        .map(|(w, _)| w)
        .partition(|w| lexicon.get(w).is_some_and(|e| e.num_classes() > 1));
    if multi.is_empty() {
        return Err(Error::Config("lexicon has no multiclass words".into()));
    }
    if let Some(warning) = balance_warning(lexicon) {
        log::warn!("{warning}");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    multi.shuffle(&mut rng);
    single.shuffle(&mut rng);
    multi.truncate(multi.len() & !1);
    let n_single = multi.len().min(single.len()) & !1;
    single.truncate(n_single);

    let mut examples = Vec::with_capacity(multi.len() + single.len());
    for group in [&multi, &single] {
        let half = group.len() / 2;
        for (i, word) in group.iter().enumerate() {
            let labels = lexicon.get(word).expect("word from lexicon").classes().collect();
            examples.push(ProbeExample {
                word: word.to_string(),
                labels,
                split: if i < half { Split::Train } else { Split::Test },
            });
        }
    }
    examples.sort_by(|a, b| (a.split, &a.word).cmp(&(b.split, &b.word)));
    Ok(ProbeDataset {
        inventory: lexicon.inventory().clone(),
        seed,
        examples,
    })
}
