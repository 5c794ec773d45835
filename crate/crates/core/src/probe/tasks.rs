use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::knn::{vote, KnnIndex};
use super::metrics::{f1_counts, per_class_counts, F1Counts};
use super::report::{BinScore, ClassScore, EvalReport};
use super::{derive_seed, fit_binary, BinaryModel, ClassifierKind, LrConfig, PredictionSet};
use crate::corpus::ClassId;
use crate::dataset::{ProbeDataset, ProbeExample, Split};
use crate::digest::Fingerprint;
use crate::embedding::EmbeddingTable;
use crate::lexicon::SenseLexicon;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeOptions {
    /// L2-normalize vectors before fitting and predicting.
    pub normalize: bool,
    pub seed: u64,
}

impl ProbeOptions {
    /// S-class probes use raw vectors by default.
    pub fn sclass(seed: u64) -> Self {
        ProbeOptions {
            normalize: false,
            seed,
        }
    }

    /// Ambiguity probes normalize by default, hiding vector length.
    pub fn ambiguity(seed: u64) -> Self {
        ProbeOptions {
            normalize: true,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityLabel {
    pub ambiguous: bool,
    /// Model likelihood of the word being ambiguous, in [0, 1].
    pub likelihood: f64,
}

/// `v / ‖v‖`; `None` for the zero vector.
pub fn l2_normalize(v: &[f64]) -> Option<Vec<f64>> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n > 0.0).then(|| v.iter().map(|x| x / n).collect())
}

struct Features<'a> {
    train: Vec<(&'a ProbeExample, Vec<f64>)>,
    test: Vec<(&'a ProbeExample, Vec<f64>)>,
    excluded: Vec<String>,
    warnings: Vec<String>,
}

impl Features<'_> {
    fn evaluated(&self, dataset: &ProbeDataset) -> ProbeDataset {
        let excluded: std::collections::HashSet<&str> =
            self.excluded.iter().map(String::as_str).collect();
        dataset.restricted(|w| !excluded.contains(w))
    }
}

fn features<'a>(
    table: &EmbeddingTable,
    dataset: &'a ProbeDataset,
    normalize: bool,
    reject_zero: bool,
) -> Features<'a> {
    let mut f = Features {
        train: Vec::new(),
        test: Vec::new(),
        excluded: Vec::new(),
        warnings: Vec::new(),
    };
    let mut missing = 0;
    let mut zero = 0;
    for ex in &dataset.examples {
        let Some(v) = table.get(&ex.word) else {
            missing += 1;
            f.excluded.push(ex.word.clone());
            continue;
        };
        let v: Vec<f64> = v.iter().map(|&x| f64::from(x)).collect();
        let v = if normalize {
            l2_normalize(&v)
        } else if reject_zero && v.iter().all(|&x| x == 0.0) {
            None
        } else {
            Some(v)
        };
        let Some(v) = v else {
            zero += 1;
            f.excluded.push(ex.word.clone());
            continue;
        };
        match ex.split {
            Split::Train => f.train.push((ex, v)),
            Split::Test => f.test.push((ex, v)),
        }
    }
    if missing > 0 {
        f.warnings.push(format!("{missing} dataset words have no vector and were excluded"));
    }
    if zero > 0 {
        f.warnings.push(format!("{zero} dataset words have a zero vector and were excluded"));
    }
    for w in &f.warnings {
        log::warn!("{w}");
    }
    f
}

fn fingerprint(table: &EmbeddingTable, dataset: &ProbeDataset, kind: &ClassifierKind, opts: &ProbeOptions, task: &str) -> Result<String> {
    let mut ds = Vec::new();
    dataset.write_tsv(&mut ds)?;
    Ok(Fingerprint::new()
        .part(task)
        .part(table.content_digest())
        .part(ds)
        .part(serde_json::to_vec(kind)?)
        .part(serde_json::to_vec(opts)?)
        .finish())
}

/// Per-class binary probes trained on the train split and applied to the
/// test split. Positives for a class are the train words carrying it.
pub fn run_sclass_probe(
    table: &EmbeddingTable,
    dataset: &ProbeDataset,
    kind: &ClassifierKind,
    opts: &ProbeOptions,
) -> Result<(PredictionSet<Vec<ClassId>>, EvalReport)> {
    let inventory = &dataset.inventory;
    let kind = kind.resolved(inventory.len());
    kind.validate()?;
    let reject_zero = matches!(kind, ClassifierKind::Knn(_));
    let f = features(table, dataset, opts.normalize, reject_zero);
    if f.train.is_empty() {
        return Err(Error::ExampleMismatch("no training examples have vectors".into()));
    }
    let x: Vec<Vec<f64>> = f.train.iter().map(|(_, v)| v.clone()).collect();

    // KNN neighbors do not depend on the class, so search once.
    let neighbors = match kind {
        ClassifierKind::Knn(c) => {
            let index = KnnIndex::new(x.clone());
            Some(
                f.test
                    .par_iter()
                    .map(|(_, q)| index.neighbors(q, c.k))
                    .collect::<Result<Vec<_>>>()?,
            )
        }
        _ => None,
    };

    let ids: Vec<ClassId> = inventory.ids().collect();
    let per_class = ids
        .par_iter()
        .map(|&c| -> Result<(Vec<bool>, Option<String>)> {
            let y: Vec<bool> = f.train.iter().map(|(ex, _)| ex.has(c)).collect();
            let warning = (!y.contains(&true)).then(|| {
                format!("class {} has no training positives; predicting negative", inventory.name(c))
            });
            let decisions = match &neighbors {
                Some(nn) => nn.iter().map(|n| vote(n, &y).0).collect(),
                None => {
                    let model = if warning.is_some() {
                        BinaryModel::Constant(false)
                    } else {
                        fit_binary(&kind, &x, &y, derive_seed(opts.seed, c.0 as u64))?.model
                    };
                    f.test
                        .iter()
                        .map(|(_, q)| model.predict(q).map(|p| p.0))
                        .collect::<Result<Vec<_>>>()?
                }
            };
            Ok((decisions, warning))
        })
        .collect::<Result<Vec<_>>>()?;

    let pred: PredictionSet<Vec<ClassId>> = f
        .test
        .iter()
        .enumerate()
        .map(|(i, (ex, _))| {
            let labels = ids.iter().copied().filter(|c| per_class[c.index()].0[i]).collect();
            (ex.word.clone(), labels)
        })
        .collect();

    let evaluated = f.evaluated(dataset);
    let counts = f1_counts(&pred, &evaluated)?;
    let class_counts = per_class_counts(&pred, &evaluated)?;
    let mut report = EvalReport::new("sclass", kind.name());
    report.insert_f1(&counts);
    report.per_class = class_scores(&evaluated, &class_counts, |c| {
        f.train.iter().filter(|(ex, _)| ex.has(c)).count()
    });
    report.evaluated = f.test.len();
    report.excluded = f.excluded.clone();
    report.warnings = f.warnings.clone();
    report
        .warnings
        .extend(per_class.into_iter().filter_map(|(_, w)| w));
    report.fingerprint = fingerprint(table, dataset, &kind, opts, "sclass")?;
    Ok((pred, report))
}

fn class_scores(
    dataset: &ProbeDataset,
    counts: &[F1Counts],
    train_positives: impl Fn(ClassId) -> usize,
) -> Vec<ClassScore> {
    dataset
        .inventory
        .ids()
        .map(|c| {
            let k = counts[c.index()];
            ClassScore {
                class: dataset.inventory.name(c).to_string(),
                precision: k.precision(),
                recall: k.recall(),
                f1: k.f1(),
                support: k.tp + k.fn_,
                train_positives: train_positives(c),
            }
        })
        .collect()
}

/// Binary probe deciding from a word's vector whether it carries two or more
/// S-classes.
pub fn run_ambiguity_probe(
    table: &EmbeddingTable,
    dataset: &ProbeDataset,
    kind: &ClassifierKind,
    opts: &ProbeOptions,
) -> Result<(PredictionSet<AmbiguityLabel>, EvalReport)> {
    let kind = kind.resolved(dataset.inventory.len());
    kind.validate()?;
    let f = features(table, dataset, opts.normalize, matches!(kind, ClassifierKind::Knn(_)));
    let (pred, mut report) = binary_task(&f.train, &f.test, &kind, opts.seed, "ambiguity")?;
    report.excluded = f.excluded.clone();
    report.warnings.splice(0..0, f.warnings.iter().cloned());
    report.fingerprint = fingerprint(table, dataset, &kind, opts, "ambiguity")?;
    Ok((pred, report))
}

fn binary_task(
    train: &[(&ProbeExample, Vec<f64>)],
    test: &[(&ProbeExample, Vec<f64>)],
    kind: &ClassifierKind,
    seed: u64,
    task: &str,
) -> Result<(PredictionSet<AmbiguityLabel>, EvalReport)> {
    if train.is_empty() {
        return Err(Error::ExampleMismatch("no training examples have vectors".into()));
    }
    let x: Vec<Vec<f64>> = train.iter().map(|(_, v)| v.clone()).collect();
    let y: Vec<bool> = train.iter().map(|(ex, _)| ex.is_ambiguous()).collect();
    let fitted = fit_binary(kind, &x, &y, derive_seed(seed, 0))?;
    let labels = test
        .par_iter()
        .map(|(_, q)| fitted.model.predict(q))
        .collect::<Result<Vec<_>>>()?;
    let pred: PredictionSet<AmbiguityLabel> = test
        .iter()
        .zip(&labels)
        .map(|((ex, _), &(ambiguous, likelihood))| {
            (ex.word.clone(), AmbiguityLabel { ambiguous, likelihood })
        })
        .collect();

    let mut bins: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for ((ex, _), &(decision, _)) in test.iter().zip(&labels) {
        let bin = bins.entry(ex.labels.len()).or_default();
        bin.1 += 1;
        if decision == ex.is_ambiguous() {
            bin.0 += 1;
        }
    }
    let correct: usize = bins.values().map(|b| b.0).sum();
    let mut report = EvalReport::new(task, kind.name());
    report
        .metrics
        .insert("accuracy".into(), if test.is_empty() { 0.0 } else { correct as f64 / test.len() as f64 });
    report.bins = bins
        .into_iter()
        .map(|(n, (ok, support))| BinScore {
            key: n.to_string(),
            value: ok as f64 / support as f64,
            support,
        })
        .collect();
    report.evaluated = test.len();
    report.warnings.extend(fitted.warning);
    Ok((pred, report))
}

/// Assigns each class to each test example independently with its train
/// prior (share of train words carrying the class).
pub fn random_baseline(dataset: &ProbeDataset, seed: u64) -> Result<(PredictionSet<Vec<ClassId>>, EvalReport)> {
    let n_train = dataset.train().count();
    let priors: Vec<f64> = dataset
        .inventory
        .ids()
        .map(|c| {
            if n_train == 0 {
                0.0
            } else {
                dataset.train().filter(|ex| ex.has(c)).count() as f64 / n_train as f64
            }
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pred: PredictionSet<Vec<ClassId>> = dataset
        .test()
        .map(|ex| {
            let labels = dataset
                .inventory
                .ids()
                .filter(|c| rng.random::<f64>() < priors[c.index()])
                .collect();
            (ex.word.clone(), labels)
        })
        .collect();
    let counts = f1_counts(&pred, dataset)?;
    let mut report = EvalReport::new("sclass", "random");
    report.insert_f1(&counts);
    report.per_class = class_scores(dataset, &per_class_counts(&pred, dataset)?, |c| {
        dataset.train().filter(|ex| ex.has(c)).count()
    });
    report.evaluated = pred.len();
    let mut ds = Vec::new();
    dataset.write_tsv(&mut ds)?;
    report.fingerprint = Fingerprint::new().part("random").part(ds).part(seed.to_le_bytes()).finish();
    Ok((pred, report))
}

/// Ambiguity prediction from the single feature `ln(word frequency)`.
pub fn frequency_baseline(
    dataset: &ProbeDataset,
    lexicon: &SenseLexicon,
) -> Result<(PredictionSet<AmbiguityLabel>, EvalReport)> {
    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut excluded = Vec::new();
    for ex in &dataset.examples {
        match lexicon.frequency(&ex.word) {
            Some(freq) => {
                let row = (ex, vec![(freq.max(1) as f64).ln()]);
                match ex.split {
                    Split::Train => train.push(row),
                    Split::Test => test.push(row),
                }
            }
            None => excluded.push(ex.word.clone()),
        }
    }
    let kind = ClassifierKind::Lr(LrConfig::default());
    let (pred, mut report) = binary_task(&train, &test, &kind, 0, "ambiguity")?;
    report.classifier = "frequency".into();
    if !excluded.is_empty() {
        report
            .warnings
            .insert(0, format!("{} dataset words missing from the lexicon were excluded", excluded.len()));
    }
    report.excluded = excluded;
    let mut ds = Vec::new();
    dataset.write_tsv(&mut ds)?;
    let mut lx = Vec::new();
    lexicon.write_tsv(&mut lx)?;
    report.fingerprint = Fingerprint::new().part("frequency").part(ds).part(lx).finish();
    Ok((pred, report))
}
