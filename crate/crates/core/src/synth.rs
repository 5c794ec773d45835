//! Seeded synthetic annotated corpora with known ground truth.
//!
//! Every class owns a pool of context words. Each mention of a word picks a
//! class from the word's sense distribution and fills the rest of its
//! sentence from that class's pool, so sense information is present in the
//! contexts by construction.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    mention_token, save_corpus, AnnotatedSentence, ClassId, ClassInventory, CorpusFormat, Mention,
    DEFAULT_CLASSES,
};
use crate::lexicon::SenseLexicon;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SenseSpec {
    pub class: String,
    pub prob: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WordSpec {
    pub surface: String,
    pub senses: Vec<SenseSpec>,
    /// Overrides `mentions_per_word`.
    #[serde(default)]
    pub mentions: Option<usize>,
}

impl WordSpec {
    pub fn new<S: Into<String>>(surface: impl Into<String>, senses: impl IntoIterator<Item = (S, f64)>) -> Self {
        WordSpec {
            surface: surface.into(),
            senses: senses
                .into_iter()
                .map(|(class, prob)| SenseSpec {
                    class: class.into(),
                    prob,
                })
                .collect(),
            mentions: None,
        }
    }

    pub fn with_mentions(mut self, mentions: usize) -> Self {
        self.mentions = Some(mentions);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub n_classes: usize,
    /// Defaults to the first `n_classes` FIGER parent types.
    #[serde(default)]
    pub class_names: Option<Vec<String>>,
    /// Generated single-class words per class, named `<class>_<i>`.
    #[serde(default)]
    pub words_per_class: usize,
    /// Explicitly specified words, typically the multiclass ones.
    #[serde(default)]
    pub words: Vec<WordSpec>,
    pub mentions_per_word: usize,
    /// Context words per class, named `ctx_<class>_<j>`; pools are disjoint.
    pub context_vocab_per_class: usize,
    /// Probability that a context token comes from another class's pool.
    #[serde(default)]
    pub overlap: f64,
    /// Class-independent topic pools, named `topic_<t>_<j>`. Word `i` (in
    /// generation order) belongs to topic `i mod topics`.
    #[serde(default)]
    pub topics: usize,
    /// Probability that a context token comes from the word's topic pool.
    #[serde(default)]
    pub topic_share: f64,
    /// Tokens per sentence, the mention included.
    pub sentence_length: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SynthSpec {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_reader(BufReader::new(file))?)
    }

    pub fn inventory(&self) -> Result<ClassInventory> {
        match &self.class_names {
            Some(names) if names.len() != self.n_classes => Err(Error::Config(format!(
                "{} class names for n_classes = {}",
                names.len(),
                self.n_classes
            ))),
            Some(names) => ClassInventory::new(names.iter().cloned()),
            None if self.n_classes > DEFAULT_CLASSES.len() => Err(Error::Config(format!(
                "n_classes = {} needs explicit class_names",
                self.n_classes
            ))),
            None => ClassInventory::new(DEFAULT_CLASSES[..self.n_classes].iter().copied()),
        }
    }

    /// All words with their sense distributions (class id, probability) and
    /// mention counts: generated single-class words first, then explicit ones.
    fn resolved_words(&self, inv: &ClassInventory) -> Result<Vec<(String, Vec<(ClassId, f64)>, usize)>> {
        let mut out = Vec::new();
        for c in inv.ids() {
            for i in 0..self.words_per_class {
                out.push((
                    format!("{}_{i}", inv.name(c)),
                    vec![(c, 1.0)],
                    self.mentions_per_word,
                ));
            }
        }
        for w in &self.words {
            let mut senses = Vec::with_capacity(w.senses.len());
            for s in &w.senses {
                let id = inv.id(&s.class)?;
                if senses.iter().any(|&(c, _)| c == id) {
                    return Err(Error::Config(format!("{}: class {} listed twice", w.surface, s.class)));
                }
                if !(s.prob > 0.0) || !s.prob.is_finite() {
                    return Err(Error::Config(format!("{}: sense probabilities must be positive", w.surface)));
                }
                senses.push((id, s.prob));
            }
            if senses.is_empty() {
                return Err(Error::Config(format!("{} has no senses", w.surface)));
            }
            let total: f64 = senses.iter().map(|s| s.1).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::Config(format!(
                    "{}: sense probabilities sum to {total}, not 1",
                    w.surface
                )));
            }
            let mentions = w.mentions.unwrap_or(self.mentions_per_word);
            if mentions == 0 {
                return Err(Error::Config(format!("{} has zero mentions", w.surface)));
            }
            out.push((w.surface.clone(), senses, mentions));
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        let inv = self.inventory()?;
        if self.n_classes == 0 {
            return Err(Error::Config("n_classes must be positive".into()));
        }
        if self.mentions_per_word == 0 || self.context_vocab_per_class == 0 {
            return Err(Error::Config(
                "mentions_per_word and context_vocab_per_class must be positive".into(),
            ));
        }
        if self.sentence_length < 2 {
            return Err(Error::Config("sentence_length must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&self.overlap) {
            return Err(Error::Config("overlap must lie in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.topic_share) || (self.topic_share > 0.0 && self.topics == 0) {
            return Err(Error::Config("topic_share must lie in [0, 1] and needs topics".into()));
        }
        if self.overlap > 0.0 && self.n_classes < 2 {
            return Err(Error::Config("overlap needs at least two classes".into()));
        }
        let words = self.resolved_words(&inv)?;
        if words.is_empty() {
            return Err(Error::Config("spec produces no words".into()));
        }
        let contexts: HashSet<String> = inv
            .ids()
            .flat_map(|c| (0..self.context_vocab_per_class).map(move |j| (c, j)))
            .map(|(c, j)| context_word(&inv, c, j))
            .chain(self.topic_pools().into_iter().flatten())
            .collect();
        let mut seen = HashSet::new();
        for (surface, _, _) in &words {
            if surface.is_empty() || surface.chars().any(char::is_whitespace) {
                return Err(Error::Config(format!("invalid surface `{surface}`")));
            }
            if !seen.insert(surface.to_lowercase()) {
                return Err(Error::Config(format!("duplicate surface `{surface}`")));
            }
            if contexts.contains(surface) {
                return Err(Error::Config(format!("surface `{surface}` clashes with a context word")));
            }
        }
        Ok(())
    }
}

impl SynthSpec {
    fn topic_pools(&self) -> Vec<Vec<String>> {
        (0..self.topics)
            .map(|t| (0..self.context_vocab_per_class).map(|j| format!("topic_{t}_{j}")).collect())
            .collect()
    }
}

fn context_word(inv: &ClassInventory, class: ClassId, j: usize) -> String {
    format!("ctx_{}_{j}", inv.name(class))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthCorpus {
    pub inventory: ClassInventory,
    pub sentences: Vec<AnnotatedSentence>,
    /// Exact realized (word, class) counts.
    pub lexicon: SenseLexicon,
}

impl SynthCorpus {
    /// Writes `corpus.jsonl`, `lexicon.tsv` and `classes.txt` into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        save_corpus(dir.join("corpus.jsonl"), &self.sentences, CorpusFormat::Jsonl, &self.inventory)?;
        self.lexicon.save(dir.join("lexicon.tsv"))?;
        self.inventory.save(dir.join("classes.txt"))
    }
}

/// Generates the corpus. Identical specs give identical output.
pub fn generate(spec: &SynthSpec) -> Result<SynthCorpus> {
    spec.validate()?;
    let inv = spec.inventory()?;
    let words = spec.resolved_words(&inv)?;
    let pools: Vec<Vec<String>> = inv
        .ids()
        .map(|c| (0..spec.context_vocab_per_class).map(|j| context_word(&inv, c, j)).collect())
        .collect();
    let topic_pools = spec.topic_pools();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut jobs: Vec<usize> = words
        .iter()
        .enumerate()
        .flat_map(|(i, w)| std::iter::repeat_n(i, w.2))
        .collect();
    jobs.shuffle(&mut rng);

    let samplers: Vec<WeightedIndex<f64>> = words
        .iter()
        .map(|(_, senses, _)| WeightedIndex::new(senses.iter().map(|s| s.1)).expect("validated weights"))
        .collect();

    let mut counts: BTreeMap<(usize, ClassId), u64> = BTreeMap::new();
    let mut sentences = Vec::with_capacity(jobs.len());
    let n_classes = inv.len();
    for w in jobs {
        let (surface, senses, _) = &words[w];
        let class = senses[samplers[w].sample(&mut rng)].0;
        *counts.entry((w, class)).or_default() += 1;
        let position = rng.random_range(0..spec.sentence_length);
        let tokens = (0..spec.sentence_length)
            .map(|i| {
                if i == position {
                    return surface.clone();
                }
                if spec.topic_share > 0.0 && rng.random::<f64>() < spec.topic_share {
                    let pool = &topic_pools[w % spec.topics];
                    return pool[rng.random_range(0..pool.len())].clone();
                }
                let mut pool = class.index();
                if spec.overlap > 0.0 && rng.random::<f64>() < spec.overlap {
                    pool = (pool + rng.random_range(1..n_classes)) % n_classes;
                }
                pools[pool][rng.random_range(0..pools[pool].len())].clone()
            })
            .collect();
        let mention = Mention {
            start: position,
            end: position + 1,
            entity: surface.clone(),
            classes: vec![class],
        };
        sentences.push(AnnotatedSentence::new(tokens, vec![mention])?);
    }

    let lexicon = SenseLexicon::from_counts(
        inv.clone(),
        counts
            .into_iter()
            .map(|((w, c), n)| (mention_token(&words[w].0, true), c, n)),
    )?;
    Ok(SynthCorpus {
        inventory: inv,
        sentences,
        lexicon,
    })
}
