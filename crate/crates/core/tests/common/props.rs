//! Property tests for the invariants of every module. Each property is a
//! plain function so that both the `properties` and the `acceptance`
//! targets can run it.

use std::collections::{BTreeMap, HashSet};

use proptest::prelude::*;
use proptest::test_runner::Config;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use senseprobe::aggregate::{aggregate, AggregateMode, AggregateSpec};
use senseprobe::analysis::{neighbor_diversity, recall_by_factor, CompatibilityMatrix, Factor, FactorBinning};
use senseprobe::corpus::{
    emit_sense_corpus, emit_word_corpus, sense_token, write_corpus, ClassId, ClassInventory, CorpusFormat,
    CorpusReader, EmitOptions, Mention,
};
use senseprobe::dataset::build_probe_dataset;
use senseprobe::embedding::{cosine, train_embeddings, NegativeSampler, UNIGRAM_POWER};
use senseprobe::lexicon::{build_sense_lexicon, SenseLexicon};
use senseprobe::probe::{
    knn_classify, micro_f1, random_baseline, run_ambiguity_probe, run_sclass_probe, LogisticRegression, LrConfig,
    PredictionSet, ProbeOptions,
};
use senseprobe::synth::{generate, SynthSpec};
use senseprobe::{AnnotatedSentence, ClassifierKind, EmbeddingTable, ProbeDataset, ProbeExample, Split, TrainConfig, TrainMode};

use super::{class_names, oracle_lexicon, toy_config};

pub const ALL: &[(&str, fn())] = &[
    ("word_stream_conserves_tokens", word_stream_conserves_tokens),
    ("word_stream_wraps_exactly_the_mentions", word_stream_wraps_exactly_the_mentions),
    ("sense_stream_counts_match_mentions", sense_stream_counts_match_mentions),
    ("corpus_round_trip_is_byte_identical", corpus_round_trip_is_byte_identical),
    ("dominance_sums_to_one", dominance_sums_to_one),
    ("dataset_split_is_a_partition", dataset_split_is_a_partition),
    ("dataset_is_balanced", dataset_is_balanced),
    ("lexicon_matches_recount", lexicon_matches_recount),
    ("training_keeps_parameters_finite", training_keeps_parameters_finite),
    ("epoch_loss_does_not_increase", epoch_loss_does_not_increase),
    ("negative_table_follows_unigram_power", negative_table_follows_unigram_power),
    ("sskip_is_order_sensitive_skip_is_not", sskip_is_order_sensitive_skip_is_not),
    ("unif_equals_wght_for_single_sense_words", unif_equals_wght_for_single_sense_words),
    ("wght_weights_are_a_distribution", wght_weights_are_a_distribution),
    ("aggregate_is_linear", aggregate_is_linear),
    ("equal_counts_make_wght_parallel_to_unif", equal_counts_make_wght_parallel_to_unif),
    ("micro_f1_is_permutation_invariant", micro_f1_is_permutation_invariant),
    ("classifiers_ignore_feature_order", classifiers_ignore_feature_order),
    ("normalized_ambiguity_probe_ignores_scale", normalized_ambiguity_probe_ignores_scale),
    ("perfect_embeddings_score_one", perfect_embeddings_score_one),
    ("random_baseline_is_below_trained_probe", random_baseline_is_below_trained_probe),
    ("factor_bins_partition_pairs", factor_bins_partition_pairs),
    ("compatibility_is_symmetric_and_order_free", compatibility_is_symmetric_and_order_free),
    ("neighbor_diversity_is_rotation_invariant", neighbor_diversity_is_rotation_invariant),
    ("binned_recall_totals_overall_recall", binned_recall_totals_overall_recall),
    ("synth_gold_lexicon_matches_stream", synth_gold_lexicon_matches_stream),
    ("synth_contexts_identify_the_class", synth_contexts_identify_the_class),
    ("pipeline_results_are_reproducible_and_complete", pipeline_results_are_reproducible_and_complete),
];

fn config(cases: u32) -> Config {
    Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    }
}

// ---------------------------------------------------------------------------
// Random instances from a seed
// ---------------------------------------------------------------------------

fn inventory(n: usize) -> ClassInventory {
    ClassInventory::new(class_names(n)).unwrap()
}

fn labels(rng: &mut ChaCha8Rng, n: usize) -> Vec<ClassId> {
    loop {
        let l: Vec<ClassId> = (0..n as u16).filter(|_| rng.random_bool(0.4)).map(ClassId).collect();
        if !l.is_empty() {
            return l;
        }
    }
}

fn sentences(rng: &mut ChaCha8Rng, n_classes: usize) -> Vec<AnnotatedSentence> {
    const VOCAB: [&str; 8] = ["Apple", "pie", "New", "York", "the", "Jordan", "river", "x"];
    (0..rng.random_range(1..15))
        .map(|_| {
            let len = rng.random_range(1..10);
            let tokens: Vec<String> = (0..len).map(|_| VOCAB[rng.random_range(0..VOCAB.len())].to_string()).collect();
            let mut mentions = Vec::new();
            let mut pos = 0;
            while pos < len {
                let width = rng.random_range(1..=3).min(len - pos);
                if rng.random_bool(0.4) {
                    mentions.push(Mention {
                        start: pos,
                        end: pos + width,
                        entity: format!("e{pos}"),
                        classes: labels(rng, n_classes),
                    });
                }
                pos += width;
            }
            AnnotatedSentence::new(tokens, mentions).unwrap()
        })
        .collect()
}

fn lexicon(rng: &mut ChaCha8Rng, inv: &ClassInventory, words: usize) -> SenseLexicon {
    let mut triples = Vec::new();
    for w in 0..words {
        for c in labels(rng, inv.len()) {
            triples.push((format!("@w{w}@"), c, rng.random_range(1..30u64)));
        }
    }
    SenseLexicon::from_counts(inv.clone(), triples).unwrap()
}

fn sense_table(rng: &mut ChaCha8Rng, lex: &SenseLexicon, dim: usize) -> EmbeddingTable {
    let mut rows = Vec::new();
    for (w, e) in lex.iter() {
        for c in e.classes() {
            let v: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect();
            rows.push((sense_token(w, lex.inventory().name(c)), v));
        }
    }
    EmbeddingTable::from_rows(dim, rows).unwrap()
}

fn int_table(rng: &mut ChaCha8Rng, words: &[String], dim: usize) -> EmbeddingTable {
    let rows = words.iter().map(|w| {
        let mut v: Vec<f32> = (0..dim).map(|_| rng.random_range(-3i32..=3) as f32).collect();
        if v.iter().all(|&x| x == 0.0) {
            v[0] = 1.0;
        }
        (w.clone(), v)
    });
    EmbeddingTable::from_rows(dim, rows.collect::<Vec<_>>()).unwrap()
}

/// A dataset over `words` multi-class and as many single-class words.
fn dataset(rng: &mut ChaCha8Rng, n_classes: usize, words: usize) -> ProbeDataset {
    let mut examples = Vec::new();
    for w in 0..2 * words {
        let l = if w < words {
            let mut l = labels(rng, n_classes);
            if l.len() < 2 {
                l = vec![ClassId(0), ClassId(1)];
            }
            l
        } else {
            vec![ClassId(rng.random_range(0..n_classes as u16))]
        };
        examples.push(ProbeExample {
            word: format!("@w{w}@"),
            labels: l,
            split: if w % 2 == 0 { Split::Train } else { Split::Test },
        });
    }
    ProbeDataset {
        inventory: inventory(n_classes),
        seed: 0,
        examples,
    }
}

// ---------------------------------------------------------------------------
// corpus
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(config(256))]

    fn word_stream_conserves_tokens(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let corpus = sentences(&mut rng, 3);
        let opts = EmitOptions { lowercase: true, annotated_only: false };
        for (s, out) in corpus.iter().zip(emit_word_corpus(&corpus, opts)) {
            let merged: usize = s.mentions.iter().map(|m| m.width() - 1).sum();
            prop_assert_eq!(out.len(), s.tokens.len() - merged);
        }
    }

    fn word_stream_wraps_exactly_the_mentions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let corpus = sentences(&mut rng, 3);
        let opts = EmitOptions { lowercase: false, annotated_only: false };
        for (s, out) in corpus.iter().zip(emit_word_corpus(&corpus, opts)) {
            let wrapped: Vec<&String> = out.iter().filter(|t| t.len() > 2 && t.starts_with('@') && t.ends_with('@')).collect();
            let expected: Vec<String> = s.mentions_in_order().iter().map(|m| format!("@{}@", s.surface(m))).collect();
            prop_assert_eq!(wrapped.len(), expected.len());
            for (a, b) in wrapped.iter().zip(&expected) {
                prop_assert_eq!(*a, b);
            }
        }
    }

    fn sense_stream_counts_match_mentions(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inv = inventory(3);
        let corpus = sentences(&mut rng, 3);
        let mut emitted: BTreeMap<String, usize> = BTreeMap::new();
        for sentence in emit_sense_corpus(&corpus, &inv, EmitOptions::default()) {
            for t in sentence.into_iter().filter(|t| t.starts_with('@')) {
                *emitted.entry(t).or_default() += 1;
            }
        }
        let mut expected: BTreeMap<String, usize> = BTreeMap::new();
        for s in &corpus {
            for m in &s.mentions {
                for &c in &m.classes {
                    let word = format!("@{}@", s.surface(m)).to_lowercase();
                    *expected.entry(sense_token(&word, inv.name(c))).or_default() += 1;
                }
            }
        }
        prop_assert_eq!(emitted, expected);
    }

    fn corpus_round_trip_is_byte_identical(seed in any::<u64>(), tsv in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inv = inventory(4);
        let corpus = sentences(&mut rng, 4);
        let format = if tsv { CorpusFormat::Tsv } else { CorpusFormat::Jsonl };
        let mut first = Vec::new();
        write_corpus(&mut first, &corpus, format, &inv).unwrap();
        let parsed: Vec<AnnotatedSentence> =
            CorpusReader::new(&first[..], format, inv.clone()).collect::<Result<_, _>>().unwrap();
        let mut second = Vec::new();
        write_corpus(&mut second, &parsed, format, &inv).unwrap();
        prop_assert_eq!(first, second);
    }
}

// ---------------------------------------------------------------------------
// lexicon and dataset
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(config(256))]

    fn dominance_sums_to_one(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lex = lexicon(&mut rng, &inventory(5), 10);
        for (w, e) in lex.iter() {
            let total: f64 = e.classes().map(|c| lex.dominance(w, c).unwrap()).sum();
            prop_assert!((total - 1.0).abs() < 1e-12, "{w}: {total}");
        }
    }

    fn dataset_split_is_a_partition(seed in any::<u64>(), words in 2usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lex = lexicon(&mut rng, &inventory(4), words);
        prop_assume!(lex.iter().any(|(_, e)| e.num_classes() > 1));
        let ds = build_probe_dataset(&lex, seed).unwrap();
        let train: HashSet<&str> = ds.train().map(|e| e.word.as_str()).collect();
        let test: HashSet<&str> = ds.test().map(|e| e.word.as_str()).collect();
        prop_assert!(train.is_disjoint(&test));
        prop_assert_eq!(train.len() + test.len(), ds.len());
        prop_assert!(ds.examples.iter().all(|e| lex.contains(&e.word)));
    }

    fn dataset_is_balanced(seed in any::<u64>(), multi in 1usize..20, extra in 0usize..20) {
        let inv = inventory(3);
        let mut triples = Vec::new();
        for w in 0..multi {
            triples.push((format!("@m{w}@"), ClassId(0), 3));
            triples.push((format!("@m{w}@"), ClassId(1 + (w % 2) as u16), 1));
        }
        for w in 0..multi + extra {
            triples.push((format!("@s{w}@"), ClassId((w % 3) as u16), 2));
        }
        let lex = SenseLexicon::from_counts(inv, triples).unwrap();
        let ds = build_probe_dataset(&lex, seed).unwrap();
        let n_multi = ds.examples.iter().filter(|e| e.is_ambiguous()).count();
        prop_assert_eq!(n_multi, ds.len() - n_multi);
        prop_assert_eq!(n_multi, multi & !1);
        prop_assert_eq!(ds.train().count(), ds.test().count());
    }

    fn lexicon_matches_recount(seed in any::<u64>(), min_freq in 1u64..4, lowercase in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let corpus = sentences(&mut rng, 4);
        let lex = build_sense_lexicon(&corpus, &inventory(4), min_freq, lowercase).unwrap();
        let actual: BTreeMap<String, BTreeMap<ClassId, u64>> =
            lex.iter().map(|(w, e)| (w.to_string(), e.counts.clone())).collect();
        prop_assert_eq!(actual, oracle_lexicon(&corpus, min_freq, lowercase));
    }
}

// ---------------------------------------------------------------------------
// embedding trainer
// ---------------------------------------------------------------------------

fn token_corpus(rng: &mut ChaCha8Rng, vocab: usize, sentences: usize) -> Vec<Vec<String>> {
    (0..sentences)
        .map(|_| (0..rng.random_range(2..10)).map(|_| format!("t{}", rng.random_range(0..vocab))).collect())
        .collect()
}

fn small_train(dim: usize, window: usize, iterations: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        dim,
        window,
        negatives: 3,
        iterations,
        seed,
        ..TrainConfig::default()
    }
}

proptest! {
    #![proptest_config(config(16))]

    fn training_keeps_parameters_finite(seed in any::<u64>(), sskip in any::<bool>(), lr in 0.01f32..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let corpus = token_corpus(&mut rng, 20, 50);
        let mode = if sskip { TrainMode::Sskip } else { TrainMode::Skip };
        let cfg = TrainConfig { initial_lr: lr, ..small_train(8, 2, 3, seed) };
        let (table, stats) = train_embeddings(&corpus, &cfg, mode).unwrap();
        prop_assert!(table.all_finite());
        prop_assert!(stats.epoch_loss.iter().all(|l| l.is_finite()));
    }

    fn epoch_loss_does_not_increase(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let corpus = token_corpus(&mut rng, 15, 200);
        let (_, stats) = train_embeddings(&corpus, &small_train(10, 2, 6, seed), TrainMode::Skip).unwrap();
        for pair in stats.epoch_loss.windows(2) {
            prop_assert!(pair[1] <= pair[0] * 1.05, "{:?}", stats.epoch_loss);
        }
    }
}

proptest! {
    #![proptest_config(config(4))]

    fn negative_table_follows_unigram_power(counts in prop::collection::vec(1u64..1000, 2..100), seed in any::<u64>()) {
        let sampler = NegativeSampler::new(&counts).unwrap();
        let norm: f64 = counts.iter().map(|&c| (c as f64).powf(UNIGRAM_POWER)).sum();
        let mut hits = vec![0u64; counts.len()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        const DRAWS: u64 = 1_000_000;
        for _ in 0..DRAWS {
            hits[sampler.sample(&mut rng) as usize] += 1;
        }
        for (i, &c) in counts.iter().enumerate() {
            let expected = (c as f64).powf(UNIGRAM_POWER) / norm;
            let observed = hits[i] as f64 / DRAWS as f64;
            prop_assert!((observed - expected).abs() < 0.01, "word {i}: {observed} vs {expected}");
        }
    }

    fn sskip_is_order_sensitive_skip_is_not(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // fixed left-to-right chains make left and right contexts differ
        let chains: Vec<Vec<String>> = (0..400)
            .map(|_| {
                let start = rng.random_range(0..12);
                (0..6).map(|i| format!("t{}", (start + i) % 12)).collect()
            })
            .collect();
        let cfg = small_train(12, 1, 5, seed);
        let (sskip, _) = train_embeddings(&chains, &cfg, TrainMode::Sskip).unwrap();
        let left = sskip.output_block(0);
        let right = sskip.output_block(1);
        let gap = left.iter().zip(right).map(|(a, b)| (a - b).abs()).fold(0.0f32, f32::max);
        prop_assert!(gap > 0.1, "left/right blocks differ by only {gap}");

        let reversed: Vec<Vec<String>> = chains.iter().map(|s| s.iter().rev().cloned().collect()).collect();
        let (fwd, _) = train_embeddings(&chains, &cfg, TrainMode::Skip).unwrap();
        let (bwd, _) = train_embeddings(&reversed, &cfg, TrainMode::Skip).unwrap();
        let words: Vec<String> = (0..12).map(|i| format!("t{i}")).collect();
        let mut diff = 0.0;
        let mut n = 0.0;
        for a in &words {
            for b in &words {
                if a < b {
                    let x = cosine(fwd.get(a).unwrap(), fwd.get(b).unwrap()).unwrap();
                    let y = cosine(bwd.get(a).unwrap(), bwd.get(b).unwrap()).unwrap();
                    diff += (x - y).abs();
                    n += 1.0;
                }
            }
        }
        prop_assert!(diff / n < 0.1, "mean cosine change {} under context reversal", diff / n);
    }
}

// ---------------------------------------------------------------------------
// aggregation
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(config(256))]

    fn unif_equals_wght_for_single_sense_words(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lex = lexicon(&mut rng, &inventory(4), 8);
        let senses = sense_table(&mut rng, &lex, 5);
        let spec = |mode| AggregateSpec { mode, lexicon: &lex, senses: &senses };
        for (w, e) in lex.iter().filter(|(_, e)| e.num_classes() == 1) {
            let _ = e;
            prop_assert_eq!(
                aggregate(&spec(AggregateMode::Unif), w).unwrap().vector,
                aggregate(&spec(AggregateMode::Wght), w).unwrap().vector
            );
        }
    }

    fn wght_weights_are_a_distribution(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lex = lexicon(&mut rng, &inventory(5), 8);
        let senses = sense_table(&mut rng, &lex, 3);
        let spec = AggregateSpec { mode: AggregateMode::Wght, lexicon: &lex, senses: &senses };
        for w in lex.words() {
            let agg = aggregate(&spec, w).unwrap();
            prop_assert!(agg.weights.iter().all(|(_, a)| *a >= 0.0));
            let total: f64 = agg.weights.iter().map(|(_, a)| a).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }

    fn aggregate_is_linear(seed in any::<u64>(), exp in -3i32..4, negate in any::<bool>(), wght in any::<bool>()) {
        // powers of two keep the scaling exact in floating point
        let lambda = 2f32.powi(exp) * if negate { -1.0 } else { 1.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lex = lexicon(&mut rng, &inventory(4), 6);
        let senses = sense_table(&mut rng, &lex, 4);
        let scaled = EmbeddingTable::from_rows(
            4,
            senses.rows().map(|(w, v)| (w.to_string(), v.iter().map(|x| x * lambda).collect())).collect::<Vec<_>>(),
        ).unwrap();
        let mode = if wght { AggregateMode::Wght } else { AggregateMode::Unif };
        for w in lex.words() {
            let a = aggregate(&AggregateSpec { mode, lexicon: &lex, senses: &senses }, w).unwrap().vector;
            let b = aggregate(&AggregateSpec { mode, lexicon: &lex, senses: &scaled }, w).unwrap().vector;
            let expected: Vec<f32> = a.iter().map(|x| x * lambda).collect();
            prop_assert_eq!(b, expected);
        }
    }

    fn equal_counts_make_wght_parallel_to_unif(seed in any::<u64>(), count in 1u64..50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inv = inventory(5);
        let triples: Vec<(String, ClassId, u64)> = (0..6)
            .flat_map(|w| labels(&mut rng, 5).into_iter().map(move |c| (format!("@w{w}@"), c, count)))
            .collect();
        let lex = SenseLexicon::from_counts(inv, triples).unwrap();
        let senses = sense_table(&mut rng, &lex, 6);
        for (w, e) in lex.iter() {
            let u = aggregate(&AggregateSpec { mode: AggregateMode::Unif, lexicon: &lex, senses: &senses }, w).unwrap().vector;
            let g = aggregate(&AggregateSpec { mode: AggregateMode::Wght, lexicon: &lex, senses: &senses }, w).unwrap().vector;
            let k = e.num_classes() as f32;
            for (a, b) in u.iter().zip(&g) {
                prop_assert!((a / k - b).abs() <= 1e-5 * (1.0 + a.abs()));
            }
            if u.iter().any(|&x| x != 0.0) {
                prop_assert!((cosine(&u, &g).unwrap() - 1.0).abs() < 1e-6);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// probes
// ---------------------------------------------------------------------------

fn permute_classes(labels: &[ClassId], perm: &[u16]) -> Vec<ClassId> {
    let mut out: Vec<ClassId> = labels.iter().map(|c| ClassId(perm[c.index()])).collect();
    out.sort();
    out
}

proptest! {
    #![proptest_config(config(256))]

    fn micro_f1_is_permutation_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 5;
        let mut ds = dataset(&mut rng, n, 6);
        ds.examples.iter_mut().for_each(|e| e.split = Split::Test);
        let pred: Vec<(String, Vec<ClassId>)> = ds
            .examples
            .iter()
            .map(|e| (e.word.clone(), (0..n as u16).filter(|_| rng.random_bool(0.3)).map(ClassId).collect()))
            .collect();
        let base = micro_f1(&pred.iter().cloned().collect(), &ds).unwrap();

        let mut perm: Vec<u16> = (0..n as u16).collect();
        perm.shuffle(&mut rng);
        let mut permuted_ds = ds.clone();
        permuted_ds.examples.shuffle(&mut rng);
        for e in &mut permuted_ds.examples {
            e.labels = permute_classes(&e.labels, &perm);
        }
        let mut permuted_pred: Vec<(String, Vec<ClassId>)> =
            pred.iter().map(|(w, l)| (w.clone(), permute_classes(l, &perm))).collect();
        permuted_pred.shuffle(&mut rng);
        prop_assert_eq!(micro_f1(&permuted_pred.into_iter().collect(), &permuted_ds).unwrap(), base);
    }

    fn classifiers_ignore_feature_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = rng.random_range(2..6);
        let n = rng.random_range(4..30);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| f64::from(rng.random_range(-4i32..=4))).collect()).collect();
        let labels: Vec<u8> = (0..n).map(|_| rng.random_range(0..3)).collect();
        let mut perm: Vec<usize> = (0..d).collect();
        perm.shuffle(&mut rng);
        let permute = |v: &[f64]| perm.iter().map(|&j| v[j]).collect::<Vec<f64>>();
        let xp: Vec<Vec<f64>> = x.iter().map(|v| permute(v)).collect();
        for q in &x {
            if q.iter().all(|&v| v == 0.0) {
                continue;
            }
            let k = rng.random_range(1..=n);
            // exact: sums of small integers do not depend on order
            prop_assert_eq!(knn_classify(&x, &labels, q, k).unwrap(), knn_classify(&xp, &labels, &permute(q), k).unwrap());
        }
        // separable data: label by a random hyperplane with a margin
        let w: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let score = |v: &[f64]| v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        let kept: Vec<&Vec<f64>> = x.iter().filter(|v| score(v).abs() > 0.5).collect();
        let y: Vec<bool> = kept.iter().map(|v| score(v) > 0.0).collect();
        prop_assume!(y.iter().any(|&b| b) && y.iter().any(|&b| !b));
        let xs: Vec<Vec<f64>> = kept.iter().map(|v| v.to_vec()).collect();
        let xsp: Vec<Vec<f64>> = xs.iter().map(|v| permute(v)).collect();
        let cfg = LrConfig::default();
        let a = LogisticRegression::fit(&xs, &y, &cfg);
        let b = LogisticRegression::fit(&xsp, &y, &cfg);
        for (u, v) in xs.iter().zip(&xsp) {
            prop_assert_eq!(a.predict_proba(u) >= 0.5, b.predict_proba(v) >= 0.5);
        }
    }
}

fn table_from(words: &[(String, Vec<f32>)]) -> EmbeddingTable {
    let dim = words[0].1.len();
    EmbeddingTable::from_rows(dim, words.to_vec()).unwrap()
}

proptest! {
    #![proptest_config(config(24))]

    fn normalized_ambiguity_probe_ignores_scale(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ds = dataset(&mut rng, 4, 10);
        let rows: Vec<(String, Vec<f32>)> = ds
            .examples
            .iter()
            .map(|e| (e.word.clone(), (0..6).map(|_| rng.random_range(-1.0f32..1.0)).collect()))
            .collect();
        // positive powers of two keep normalized vectors bit-identical
        let scaled: Vec<(String, Vec<f32>)> = rows
            .iter()
            .map(|(w, v)| {
                let s = 2f32.powi(rng.random_range(-4..5));
                (w.clone(), v.iter().map(|x| x * s).collect())
            })
            .collect();
        let (a, b) = (table_from(&rows), table_from(&scaled));
        for kind in ["knn", "lr", "mlp"] {
            let mut kind: ClassifierKind = kind.parse().unwrap();
            if let ClassifierKind::Mlp(c) = &mut kind {
                c.max_epochs = 30;
                c.min_steps = 100;
            }
            let opts = ProbeOptions::ambiguity(seed);
            let (pa, _) = run_ambiguity_probe(&a, &ds, &kind, &opts).unwrap();
            let (pb, _) = run_ambiguity_probe(&b, &ds, &kind, &opts).unwrap();
            let da: Vec<bool> = pa.entries.iter().map(|p| p.label.ambiguous).collect();
            let db: Vec<bool> = pb.entries.iter().map(|p| p.label.ambiguous).collect();
            prop_assert_eq!(da, db);
        }
    }

    fn perfect_embeddings_score_one(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 4;
        let mut ds = dataset(&mut rng, n, 12);
        // a linear fit only has to be right on label sets it has seen
        let twins: Vec<ProbeExample> = ds
            .test()
            .map(|e| ProbeExample { word: format!("@twin-{}", e.word), labels: e.labels.clone(), split: Split::Train })
            .collect();
        ds.examples.extend(twins);
        let rows: Vec<(String, Vec<f32>)> = ds
            .examples
            .iter()
            .map(|e| (e.word.clone(), (0..n as u16).map(|c| f32::from(u8::from(e.has(ClassId(c))))).collect()))
            .collect();
        let table = table_from(&rows);
        for name in ["lr", "mlp"] {
            let kind: ClassifierKind = name.parse().unwrap();
            let (_, report) = run_sclass_probe(&table, &ds, &kind, &ProbeOptions::sclass(seed)).unwrap();
            let f1 = report.metric("micro_f1").unwrap();
            prop_assert_eq!(f1, 1.0, "{}", name);
        }
    }

    fn random_baseline_is_below_trained_probe(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 6;
        let mut ds = dataset(&mut rng, n, 15);
        for c in 0..n as u16 {
            ds.examples.push(ProbeExample { word: format!("@extra{c}@"), labels: vec![ClassId(c)], split: Split::Train });
        }
        let rows: Vec<(String, Vec<f32>)> = ds
            .examples
            .iter()
            .map(|e| (e.word.clone(), (0..n as u16).map(|c| f32::from(u8::from(e.has(ClassId(c))))).collect()))
            .collect();
        let kind: ClassifierKind = "lr".parse().unwrap();
        let (_, trained) = run_sclass_probe(&table_from(&rows), &ds, &kind, &ProbeOptions::sclass(seed)).unwrap();
        let (_, random) = random_baseline(&ds, seed).unwrap();
        prop_assert!(random.metric("micro_f1").unwrap() < trained.metric("micro_f1").unwrap());
    }
}

// ---------------------------------------------------------------------------
// factor analysis
// ---------------------------------------------------------------------------

fn random_predictions(rng: &mut ChaCha8Rng, ds: &ProbeDataset) -> PredictionSet<Vec<ClassId>> {
    let n = ds.inventory.len() as u16;
    ds.test()
        .map(|e| (e.word.clone(), (0..n).filter(|_| rng.random_bool(0.5)).map(ClassId).collect()))
        .collect()
}

fn lexicon_for(rng: &mut ChaCha8Rng, ds: &ProbeDataset) -> SenseLexicon {
    let triples: Vec<(String, ClassId, u64)> = ds
        .examples
        .iter()
        .flat_map(|e| e.labels.iter().map(|&c| (e.word.clone(), c, 0)).collect::<Vec<_>>())
        .map(|(w, c, _)| (w, c, rng.random_range(1..40u64)))
        .collect();
    SenseLexicon::from_counts(ds.inventory.clone(), triples).unwrap()
}

proptest! {
    #![proptest_config(config(256))]

    fn factor_bins_partition_pairs(seed in any::<u64>(), factor in 0usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ds = dataset(&mut rng, 5, 10);
        let lex = lexicon_for(&mut rng, &ds);
        let pred = random_predictions(&mut rng, &ds);
        let factor = [Factor::Dominance, Factor::NumClasses, Factor::Frequency, Factor::Typicality][factor];
        let compat = CompatibilityMatrix::from_dataset(&ds);
        // a coarse binning forces overflow pairs for some factors
        let binning = FactorBinning::new(factor, vec![0.2, 0.5, 1.0, 2.0], 0.05).unwrap();
        let curve = recall_by_factor(&pred, &ds, &lex, Some(&compat), &binning).unwrap();
        let pairs: usize = ds.test().map(|e| e.labels.len()).sum();
        let binned: usize = curve.bins.iter().map(|t| t.support).sum();
        prop_assert_eq!(binned + curve.overflow.support + curve.undefined.support, pairs);
    }

    fn compatibility_is_symmetric_and_order_free(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inv = inventory(6);
        let mut sets: Vec<Vec<ClassId>> = (0..rng.random_range(1..30)).map(|_| labels(&mut rng, 6)).collect();
        let m = CompatibilityMatrix::from_label_sets(&inv, sets.iter().map(Vec::as_slice));
        for a in inv.ids() {
            for b in inv.ids() {
                prop_assert_eq!(m.get(a, b), m.get(b, a));
            }
        }
        sets.shuffle(&mut rng);
        prop_assert_eq!(CompatibilityMatrix::from_label_sets(&inv, sets.iter().map(Vec::as_slice)), m);
    }

    fn neighbor_diversity_is_rotation_invariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inv = inventory(5);
        let lex = lexicon(&mut rng, &inv, 12);
        let words: Vec<String> = lex.words().map(String::from).collect();
        let dim = 4;
        let table = int_table(&mut rng, &words, dim);
        // signed permutations are orthogonal and exact on integer vectors
        let mut perm: Vec<usize> = (0..dim).collect();
        perm.shuffle(&mut rng);
        let signs: Vec<f32> = (0..dim).map(|_| if rng.random_bool(0.5) { -1.0 } else { 1.0 }).collect();
        let rotated = EmbeddingTable::from_rows(
            dim,
            table.rows().map(|(w, v)| (w.to_string(), (0..dim).map(|i| signs[i] * v[perm[i]]).collect())).collect::<Vec<_>>(),
        ).unwrap();
        let k = rng.random_range(1..words.len());
        let a = neighbor_diversity(&table, &lex, &words, k, None).unwrap();
        let b = neighbor_diversity(&rotated, &lex, &words, k, None).unwrap();
        prop_assert_eq!(a, b);
    }

    fn binned_recall_totals_overall_recall(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ds = dataset(&mut rng, 5, 10);
        let lex = lexicon_for(&mut rng, &ds);
        let pred = random_predictions(&mut rng, &ds);
        let binning = FactorBinning::default_for(Factor::Dominance, 1.0);
        let curve = recall_by_factor(&pred, &ds, &lex, None, &binning).unwrap();
        let mut hits = 0;
        let mut gold = 0;
        for e in ds.test() {
            let p = pred.get(&e.word).unwrap();
            gold += e.labels.len();
            hits += e.labels.iter().filter(|c| p.contains(c)).count();
        }
        let total = curve.total();
        prop_assert_eq!((total.hits, total.support), (hits, gold));
    }
}

// ---------------------------------------------------------------------------
// synthetic corpora
// ---------------------------------------------------------------------------

fn small_synth(seed: u64, overlap: f64) -> SynthSpec {
    SynthSpec {
        n_classes: 4,
        class_names: Some(class_names(4)),
        words_per_class: 5,
        words: vec![senseprobe::synth::WordSpec::new(
            "amb",
            [(class_names(4)[0].as_str(), 0.6), (class_names(4)[1].as_str(), 0.4)],
        )],
        mentions_per_word: 40,
        context_vocab_per_class: 12,
        overlap,
        topics: 0,
        topic_share: 0.0,
        sentence_length: 8,
        seed,
    }
}

proptest! {
    #![proptest_config(config(32))]

    fn synth_gold_lexicon_matches_stream(seed in any::<u64>(), overlap in 0.0f64..0.5) {
        let corpus = generate(&small_synth(seed, overlap)).unwrap();
        let rebuilt = build_sense_lexicon(&corpus.sentences, &corpus.inventory, 1, true).unwrap();
        prop_assert_eq!(rebuilt, corpus.lexicon);
    }

    fn synth_contexts_identify_the_class(seed in any::<u64>()) {
        let mut spec = small_synth(seed, 0.0);
        spec.words.clear();
        let corpus = generate(&spec).unwrap();
        let (train, test) = corpus.sentences.split_at(corpus.sentences.len() / 2);
        let context = |s: &AnnotatedSentence| -> Vec<String> {
            let m = &s.mentions[0];
            s.tokens.iter().enumerate().filter(|(i, _)| *i < m.start || *i >= m.end).map(|(_, t)| t.clone()).collect()
        };
        // bag of words: per-token class counts from the training half
        let mut votes: BTreeMap<String, BTreeMap<ClassId, usize>> = BTreeMap::new();
        for s in train {
            for t in context(s) {
                *votes.entry(t).or_default().entry(s.mentions[0].classes[0]).or_default() += 1;
            }
        }
        let mut correct = 0;
        for s in test {
            let mut score: BTreeMap<ClassId, usize> = BTreeMap::new();
            for t in context(s) {
                for (&c, &n) in votes.get(&t).into_iter().flatten() {
                    *score.entry(c).or_default() += n;
                }
            }
            let guess = score.iter().max_by_key(|(_, &n)| n).map(|(&c, _)| c);
            correct += usize::from(guess == Some(s.mentions[0].classes[0]));
        }
        let accuracy = correct as f64 / test.len() as f64;
        prop_assert!(accuracy > 0.95, "{accuracy}");
    }
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(config(2))]

    fn pipeline_results_are_reproducible_and_complete(jobs in 1usize..4) {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let config = toy_config(a.path());
        senseprobe::pipeline::run(&config, jobs).unwrap();
        senseprobe::pipeline::run(&toy_config(b.path()), 1).unwrap();
        let ra = std::fs::read_to_string(a.path().join("results.csv")).unwrap();
        let rb = std::fs::read_to_string(b.path().join("results.csv")).unwrap();
        prop_assert_eq!(&ra, &rb);
        let cells = config.train.modes.len() * config.train.dims.len()
            * config.probe.representations.len() * config.probe.classifiers.len();
        let rows: Vec<&str> = ra.lines().skip(1).filter(|l| !l.starts_with(",,,")).collect();
        prop_assert_eq!(rows.len(), cells);
        let keys: HashSet<String> = rows.iter().map(|l| l.splitn(5, ',').take(4).collect::<Vec<_>>().join(",")).collect();
        prop_assert_eq!(keys.len(), cells);
    }
}
