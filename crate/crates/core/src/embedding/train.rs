use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::hogwild::SharedMatrix;
use super::sampler::NegativeSampler;
use super::sgns::accumulate_pair;
use super::table::{EmbeddingTable, TableMode};
use super::vocab::{build_vocab, Vocabulary};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainMode {
    /// Bag-of-words contexts.
    Skip,
    /// Position-dependent contexts.
    Sskip,
}

impl TrainMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TrainMode::Skip => "skip",
            TrainMode::Sskip => "sskip",
        }
    }
}

impl std::str::FromStr for TrainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "skip" => Ok(TrainMode::Skip),
            "sskip" => Ok(TrainMode::Sskip),
            other => Err(Error::Config(format!("unknown training mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub iterations: usize,
    pub initial_lr: f32,
    pub min_count: u64,
    /// Frequency-subsampling threshold; `None` keeps every token.
    pub subsample: Option<f64>,
    pub seed: u64,
    pub workers: usize,
    /// Upper bound on the number of `f32` parameters allocated.
    pub max_parameters: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            window: 5,
            negatives: 10,
            iterations: 5,
            initial_lr: 0.025,
            min_count: 1,
            subsample: None,
            seed: 1,
            workers: 1,
            max_parameters: 1 << 30,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.dim == 0 {
            return fail("dim must be positive");
        }
        if self.window == 0 {
            return fail("window must be at least 1");
        }
        if self.negatives == 0 {
            return fail("negatives must be at least 1");
        }
        if self.iterations == 0 {
            return fail("iterations must be at least 1");
        }
        if !(self.initial_lr > 0.0 && self.initial_lr.is_finite()) {
            return fail("initial_lr must be positive");
        }
        if self.min_count == 0 {
            return fail("min_count must be at least 1");
        }
        if self.workers == 0 {
            return fail("workers must be at least 1");
        }
        if let Some(t) = self.subsample {
            if !(t > 0.0) {
                return fail("subsample threshold must be positive");
            }
        }
        Ok(())
    }
}

/// Per-epoch training statistics.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainStats {
    /// Mean pair loss per epoch.
    pub epoch_loss: Vec<f64>,
    /// Number of (positive + negative) updates per epoch.
    pub epoch_updates: Vec<u64>,
}

/// Learning rate never decays below this fraction of the initial rate.
const MIN_LR_FRACTION: f32 = 1e-4;

/// Output block used for a context at signed offset `d` (never 0).
#[inline]
fn output_block(mode: TrainMode, window: usize, d: isize) -> usize {
    match mode {
        TrainMode::Skip => 0,
        TrainMode::Sskip if d < 0 => (d + window as isize) as usize,
        TrainMode::Sskip => (d + window as isize - 1) as usize,
    }
}

struct Shared<'a> {
    cfg: &'a TrainConfig,
    mode: TrainMode,
    vocab_len: usize,
    input: &'a SharedMatrix,
    output: &'a SharedMatrix,
    sampler: &'a NegativeSampler,
    keep_prob: Option<&'a [f64]>,
    progress: &'a AtomicU64,
    total_work: u64,
}

impl Shared<'_> {
    fn lr(&self) -> f32 {
        let done = self.progress.load(Ordering::Relaxed) as f64;
        let frac = (1.0 - done / (self.total_work as f64 + 1.0)) as f32;
        self.cfg.initial_lr * frac.max(MIN_LR_FRACTION)
    }

    /// Trains on a shard of sentences for one epoch; returns (loss sum, updates).
    fn run_shard(&self, shard: &[Vec<u32>], rng: &mut ChaCha8Rng) -> (f64, u64) {
        let dim = self.cfg.dim;
        let window = self.cfg.window as isize;
        let mut center = vec![0.0f32; dim];
        let mut grad = vec![0.0f32; dim];
        let mut out = vec![0.0f32; dim];
        let mut kept = Vec::new();
        let mut loss_sum = 0.0f64;
        let mut updates = 0u64;

        for sentence in shard {
            let lr = self.lr();
            self.progress.fetch_add(sentence.len() as u64, Ordering::Relaxed);
            kept.clear();
            match self.keep_prob {
                Some(p) => kept.extend(
                    sentence
                        .iter()
                        .copied()
                        .filter(|&w| rng.random::<f64>() < p[w as usize]),
                ),
                None => kept.extend_from_slice(sentence),
            }
            let len = kept.len() as isize;
            for i in 0..len {
                let word = kept[i as usize] as usize;
                for d in -window..=window {
                    let j = i + d;
                    if d == 0 || j < 0 || j >= len {
                        continue;
                    }
                    let context = kept[j as usize];
                    let block = output_block(self.mode, self.cfg.window, d) * self.vocab_len;
                    self.input.load_row(word, &mut center);
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    for n in 0..=self.cfg.negatives {
                        let (target, label) = if n == 0 {
                            (context, true)
                        } else {
                            let t = self.sampler.sample(rng);
                            if t == context {
                                continue;
                            }
                            (t, false)
                        };
                        let row = block + target as usize;
                        self.output.load_row(row, &mut out);
                        let loss = accumulate_pair(&center, &mut out, &mut grad, label, lr);
                        self.output.store_row(row, &out);
                        loss_sum += f64::from(loss);
                        updates += 1;
                    }
                    for (c, g) in center.iter_mut().zip(&grad) {
                        *c += g;
                    }
                    self.input.store_row(word, &center);
                }
            }
        }
        (loss_sum, updates)
    }
}

fn worker_seed(seed: u64, worker: usize) -> u64 {
    seed ^ (worker as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Trains SkipGram or Structured SkipGram embeddings with negative sampling.
///
/// Windows never cross sentence boundaries. With `workers == 1` the result is
/// a pure function of the corpus and the config.
pub fn train_embeddings(
    sentences: &[Vec<String>],
    cfg: &TrainConfig,
    mode: TrainMode,
) -> Result<(EmbeddingTable, TrainStats)> {
    cfg.validate()?;
    let vocab = build_vocab(sentences, cfg.min_count)?;
    let n = vocab.len();
    let blocks = match mode {
        TrainMode::Skip => 1,
        TrainMode::Sskip => 2 * cfg.window,
    };
    let needed = n
        .checked_mul(cfg.dim)
        .and_then(|x| x.checked_mul(blocks + 1))
        .unwrap_or(usize::MAX);
    if needed > cfg.max_parameters {
        return Err(Error::MemoryBudget {
            needed,
            budget: cfg.max_parameters,
        });
    }

    let encoded: Vec<Vec<u32>> = sentences
        .iter()
        .map(|s| s.iter().filter_map(|w| vocab.idx(w)).collect::<Vec<u32>>())
        .filter(|s: &Vec<u32>| s.len() > 1)
        .collect();
    let total_words: u64 = encoded.iter().map(|s| s.len() as u64).sum();

    let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let half = 0.5 / cfg.dim as f32;
    let input: Vec<f32> = (0..n * cfg.dim)
        .map(|_| init_rng.random_range(-half..half))
        .collect();
    let input = SharedMatrix::from_vec(input, cfg.dim);
    let output = SharedMatrix::from_vec(vec![0.0; blocks * n * cfg.dim], cfg.dim);
    let sampler = NegativeSampler::new(vocab.counts())?;
    let keep_prob = cfg.subsample.map(|t| keep_probabilities(&vocab, t));
    let progress = AtomicU64::new(0);

    let shared = Shared {
        cfg,
        mode,
        vocab_len: n,
        input: &input,
        output: &output,
        sampler: &sampler,
        keep_prob: keep_prob.as_deref(),
        progress: &progress,
        total_work: total_words * cfg.iterations as u64,
    };

    let workers = cfg.workers.min(encoded.len().max(1));
    let shard_len = encoded.len().div_ceil(workers).max(1);
    let mut rngs: Vec<ChaCha8Rng> = (0..workers)
        .map(|w| ChaCha8Rng::seed_from_u64(worker_seed(cfg.seed, w)))
        .collect();
    let mut stats = TrainStats::default();

    for epoch in 0..cfg.iterations {
        let (loss, updates) = if workers == 1 {
            shared.run_shard(&encoded, &mut rngs[0])
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = encoded
                    .chunks(shard_len)
                    .zip(rngs.iter_mut())
                    .map(|(shard, rng)| {
                        let shared = &shared;
                        scope.spawn(move || shared.run_shard(shard, rng))
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("training worker panicked"))
                    .fold((0.0, 0), |(l, u), (l2, u2)| (l + l2, u + u2))
            })
        };
        if !input.all_finite() || !output.all_finite() {
            return Err(Error::Embedding(format!("non-finite parameters after epoch {}", epoch + 1)));
        }
        stats
            .epoch_loss
            .push(if updates > 0 { loss / updates as f64 } else { 0.0 });
        stats.epoch_updates.push(updates);
        log::debug!(
            "epoch {}: mean loss {:.5} over {updates} updates",
            epoch + 1,
            stats.epoch_loss[epoch]
        );
    }

    let table_mode = match mode {
        TrainMode::Skip => TableMode::Skip,
        TrainMode::Sskip => TableMode::StructuredSkip { window: cfg.window },
    };
    let table = EmbeddingTable::new(vocab, cfg.dim, input.into_vec(), output.into_vec(), table_mode)?;
    Ok((table, stats))
}

/// word2vec's keep probability `(sqrt(f / (t·N)) + 1) · t·N / f`, capped at 1.
fn keep_probabilities(vocab: &Vocabulary, t: f64) -> Vec<f64> {
    let threshold = t * vocab.total_count() as f64;
    vocab
        .counts()
        .iter()
        .map(|&c| {
            let f = c as f64;
            (((f / threshold).sqrt() + 1.0) * threshold / f).min(1.0)
        })
        .collect()
}
