//! Shared fixtures and brute-force oracles for the integration tests.

#![allow(dead_code)]

pub mod props;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use senseprobe::aggregate::{build_aggregate_table, AggregateMode, AggregateSpec};
use senseprobe::corpus::{emit_sense_corpus, emit_word_corpus, ClassId, EmitOptions, DEFAULT_CLASSES};
use senseprobe::dataset::{build_probe_dataset, ProbeDataset};
use senseprobe::embedding::train_embeddings;
use senseprobe::lexicon::SenseLexicon;
use senseprobe::pipeline::ExperimentConfig;
use senseprobe::synth::{generate, SynthCorpus, SynthSpec, WordSpec};
use senseprobe::{AnnotatedSentence, EmbeddingTable, TrainConfig, TrainMode};

pub fn class_names(n: usize) -> Vec<String> {
    DEFAULT_CLASSES[..n].iter().map(|s| s.to_string()).collect()
}

fn base_spec(n_classes: usize, words: Vec<WordSpec>, overlap: f64, seed: u64) -> SynthSpec {
    SynthSpec {
        n_classes,
        class_names: Some(class_names(n_classes)),
        words_per_class: 0,
        words,
        mentions_per_word: 100,
        context_vocab_per_class: 50,
        overlap,
        topics: 0,
        topic_share: 0.0,
        sentence_length: 10,
        seed,
    }
}

/// 5 classes x 20 single-class words, 200 mentions each, disjoint pools:
/// 100 words x 200 mentions x 10 tokens = 200k tokens.
pub fn sanity_spec(seed: u64) -> SynthSpec {
    SynthSpec {
        words_per_class: 20,
        mentions_per_word: 200,
        ..base_spec(5, Vec::new(), 0.0, seed)
    }
}

/// 30 two-sense words at dominance 0.9/0.1 plus 30 single-sense words over
/// 10 classes. Two-sense word `k` pairs class `k mod 10` with a partner that
/// cycles through the other classes.
pub fn ordering_spec(seed: u64) -> SynthSpec {
    const N: usize = 10;
    let names = class_names(N);
    let mut words = Vec::new();
    for k in 0..30 {
        let i = k % N;
        let j = (i + 1 + (k / N) % (N - 1)) % N;
        words.push(WordSpec::new(format!("amb{k}"), [(names[i].as_str(), 0.9), (names[j].as_str(), 0.1)]));
    }
    for k in 0..30 {
        words.push(WordSpec::new(format!("uni{k}"), [(names[k % N].as_str(), 1.0)]));
    }
    base_spec(N, words, 0.2, seed)
}

/// Equal numbers of two-class and single-class words; the two groups share
/// one multiset of mention counts, so frequency carries no signal.
pub fn ambiguity_spec(seed: u64) -> SynthSpec {
    const N: usize = 8;
    const PER_GROUP: usize = 64;
    let names = class_names(N);
    let mentions = |k: usize| 40 + 20 * (k % 5);
    let mut words = Vec::new();
    for k in 0..PER_GROUP {
        let i = k % N;
        let j = (i + 1 + (k / N) % (N - 1)) % N;
        let p = 0.5 + 0.1 * (k % 4) as f64;
        words.push(
            WordSpec::new(format!("amb{k}"), [(names[i].as_str(), p), (names[j].as_str(), 1.0 - p)])
                .with_mentions(mentions(k)),
        );
        words.push(WordSpec::new(format!("uni{k}"), [(names[k % N].as_str(), 1.0)]).with_mentions(mentions(k)));
    }
    base_spec(N, words, 0.2, seed)
}

/// Words with 1 to 6 classes out of 8, sense `s` weighted `1/(s+1)`;
/// `per_count` words for every class count from 2 to 6 and as many
/// single-class words as multiclass ones.
pub fn class_count_spec(seed: u64, per_count: usize) -> SynthSpec {
    const N: usize = 8;
    let names = class_names(N);
    let mut words = Vec::new();
    let mut w = 0;
    for n in 2..=6 {
        for k in 0..per_count {
            // strides coprime with N never revisit a class
            let stride = [1, 3, 5, 7][(k / N) % 4];
            let norm: f64 = (1..=n).map(|s| 1.0 / s as f64).sum();
            let senses: Vec<(&str, f64)> = (0..n)
                .map(|s| (names[(k + s * stride) % N].as_str(), 1.0 / ((s + 1) as f64 * norm)))
                .collect();
            let distinct: BTreeSet<&str> = senses.iter().map(|s| s.0).collect();
            assert_eq!(distinct.len(), n, "class pattern must not repeat");
            words.push(WordSpec::new(format!("m{n}_{k}"), senses).with_mentions(40 * n));
            w += 1;
        }
    }
    for k in 0..w {
        words.push(WordSpec::new(format!("uni{k}"), [(names[k % N].as_str(), 1.0)]).with_mentions(40 + 40 * (k % 5)));
    }
    base_spec(N, words, 0.2, seed)
}

pub fn train_config(seed: u64) -> TrainConfig {
    TrainConfig {
        dim: 50,
        window: 5,
        negatives: 10,
        iterations: 5,
        seed,
        workers: 1,
        ..TrainConfig::default()
    }
}

/// Corpus, dataset and the three word representations of one seed.
pub struct Setting {
    pub corpus: SynthCorpus,
    pub dataset: ProbeDataset,
    pub word: EmbeddingTable,
    pub unif: EmbeddingTable,
    pub wght: EmbeddingTable,
}

impl Setting {
    pub fn build(spec: &SynthSpec, seed: u64) -> Setting {
        let corpus = generate(spec).unwrap();
        let cfg = train_config(seed);
        let words: Vec<Vec<String>> = emit_word_corpus(&corpus.sentences, EmitOptions::default()).collect();
        let senses: Vec<Vec<String>> =
            emit_sense_corpus(&corpus.sentences, &corpus.inventory, EmitOptions::default()).collect();
        let (word, _) = train_embeddings(&words, &cfg, TrainMode::Skip).unwrap();
        let (sense, _) = train_embeddings(&senses, &cfg, TrainMode::Skip).unwrap();
        let lex_words: Vec<&str> = corpus.lexicon.words().collect();
        let agg = |mode| {
            let spec = AggregateSpec {
                mode,
                lexicon: &corpus.lexicon,
                senses: &sense,
            };
            build_aggregate_table(&spec, &lex_words).unwrap().0
        };
        let unif = agg(AggregateMode::Unif);
        let wght = agg(AggregateMode::Wght);
        let dataset = build_probe_dataset(&corpus.lexicon, seed).unwrap();
        Setting {
            corpus,
            dataset,
            word,
            unif,
            wght,
        }
    }

    pub fn table(&self, name: &str) -> &EmbeddingTable {
        match name {
            "word" => &self.word,
            "unif" => &self.unif,
            "wght" => &self.wght,
            _ => panic!("unknown representation {name}"),
        }
    }
}

/// Two modes x two dims x three representations x three classifiers on a
/// tiny synthetic corpus.
pub fn toy_config(output: &Path) -> ExperimentConfig {
    let text = format!(
        r#"
output = "{}"

[synth]
n_classes = 4
class_names = ["location", "organization", "person", "product"]
words_per_class = 6
mentions_per_word = 30
context_vocab_per_class = 15
overlap = 0.2
sentence_length = 8
seed = 3
words = [
  {{ surface = "amb0", senses = [{{ class = "person", prob = 0.7 }}, {{ class = "location", prob = 0.3 }}] }},
  {{ surface = "amb1", senses = [{{ class = "organization", prob = 0.5 }}, {{ class = "product", prob = 0.5 }}] }},
  {{ surface = "amb2", senses = [{{ class = "person", prob = 0.6 }}, {{ class = "product", prob = 0.4 }}] }},
  {{ surface = "amb3", senses = [{{ class = "location", prob = 0.8 }}, {{ class = "organization", prob = 0.2 }}] }},
]

[lexicon]
min_word_freq = 5

[train]
modes = ["skip", "sskip"]
dims = [8, 12]

[train.params]
window = 2
negatives = 3
iterations = 2

[probe]
classifiers = [{{ kind = "lr" }}, {{ kind = "knn", k = 3 }}, {{ kind = "mlp", max_epochs = 20, min_steps = 50 }}]

[analysis]
neighbors_k = 3
"#,
        output.display()
    );
    ExperimentConfig::from_toml(&text).unwrap()
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// Micro-F1 over every (word, class) decision, counted pair by pair.
pub fn oracle_micro_f1(pred: &[(String, Vec<ClassId>)], gold: &[(String, Vec<ClassId>)], n_classes: u16) -> f64 {
    let (mut tp, mut fp, mut fn_) = (0u64, 0u64, 0u64);
    for (word, gold_labels) in gold {
        let predicted = &pred.iter().find(|(w, _)| w == word).expect("prediction for every word").1;
        for c in 0..n_classes {
            let c = ClassId(c);
            match (predicted.contains(&c), gold_labels.contains(&c)) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                (false, false) => {}
            }
        }
    }
    if 2 * tp + fp + fn_ == 0 {
        0.0
    } else {
        let p = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let r = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }
}

pub fn oracle_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Indices of the `k` most similar rows by repeated arg-max; the lowest
/// index wins among equal similarities.
pub fn oracle_top_k(sims: &[f64], k: usize) -> Vec<usize> {
    let mut taken = vec![false; sims.len()];
    let mut out = Vec::new();
    for _ in 0..k {
        let mut best: Option<usize> = None;
        for i in 0..sims.len() {
            if taken[i] {
                continue;
            }
            if best.is_none_or(|b| sims[i] > sims[b]) {
                best = Some(i);
            }
        }
        let b = best.expect("k <= n");
        taken[b] = true;
        out.push(b);
    }
    out
}

pub fn oracle_knn(train: &[Vec<f64>], labels: &[u8], query: &[f64], k: usize) -> u8 {
    let sims: Vec<f64> = train.iter().map(|r| oracle_cosine(r, query)).collect();
    let top = oracle_top_k(&sims, k);
    let votes = |l: u8| top.iter().filter(|&&i| labels[i] == l).count();
    let max = top.iter().map(|&i| votes(labels[i])).max().unwrap();
    // the winner is the first-ranked neighbor whose label has the top count
    labels[*top.iter().find(|&&i| votes(labels[i]) == max).unwrap()]
}

/// Distinct lexicon classes among the `k` nearest candidates of `word`.
pub fn oracle_diversity(table: &EmbeddingTable, lexicon: &SenseLexicon, word: &str, candidates: &[&str], k: usize) -> usize {
    let q: Vec<f64> = table.get(word).unwrap().iter().map(|&x| f64::from(x)).collect();
    let pool: Vec<&str> = candidates.iter().copied().filter(|c| *c != word).collect();
    // rank by similarity, ties by table row order
    let mut ranked: Vec<(usize, f64, &str)> = pool
        .iter()
        .map(|c| {
            let v: Vec<f64> = table.get(c).unwrap().iter().map(|&x| f64::from(x)).collect();
            (table.vocab().idx(c).unwrap() as usize, oracle_cosine(&q, &v), *c)
        })
        .collect();
    ranked.sort_by(|a, b| a.0.cmp(&b.0));
    let sims: Vec<f64> = ranked.iter().map(|r| r.1).collect();
    let mut classes = BTreeSet::new();
    for i in oracle_top_k(&sims, k) {
        if let Some(entry) = lexicon.get(ranked[i].2) {
            classes.extend(entry.counts.keys().copied());
        }
    }
    classes.len()
}

/// `(word -> class -> count)` recounted mention by mention; words with
/// fewer than `min_freq` mentions are dropped.
pub fn oracle_lexicon(
    sentences: &[AnnotatedSentence],
    min_freq: u64,
    lowercase: bool,
) -> BTreeMap<String, BTreeMap<ClassId, u64>> {
    let mut counts: BTreeMap<String, BTreeMap<ClassId, u64>> = BTreeMap::new();
    let mut mentions: BTreeMap<String, u64> = BTreeMap::new();
    for s in sentences {
        for m in &s.mentions {
            let surface = s.tokens[m.start..m.end].join("_");
            let mut word = format!("@{surface}@");
            if lowercase {
                word = word.to_lowercase();
            }
            *mentions.entry(word.clone()).or_default() += 1;
            for &c in &m.classes {
                *counts.entry(word.clone()).or_default().entry(c).or_default() += 1;
            }
        }
    }
    counts.retain(|w, _| mentions[w] >= min_freq);
    counts
}

/// Weighted sense sum in f64, weights as given.
pub fn oracle_sum(vectors: &[&[f32]], weights: &[f64]) -> Vec<f32> {
    let dim = vectors[0].len();
    (0..dim)
        .map(|d| {
            let mut acc = 0.0f64;
            for (v, w) in vectors.iter().zip(weights) {
                acc += w * f64::from(v[d]);
            }
            acc as f32
        })
        .collect()
}
