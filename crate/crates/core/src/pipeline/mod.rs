//! Config-driven experiment runner with digest-keyed stage caching.
//!
//! A stage is skipped when its parameters and input digests match the
//! previous manifest, none of its inputs was rewritten during this run, and
//! its outputs still exist with the recorded digests.

mod config;
mod manifest;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{
    AnalysisConfig, CorpusSource, DatasetConfig, ExperimentConfig, LexiconConfig, ProbeGrid,
    Representation, Task, TrainGrid,
};
pub use manifest::{RunManifest, StageRecord, StageStatus};

use crate::aggregate::{build_aggregate_table, AggregateMode, AggregateSpec};
use crate::analysis::{
    diversity_by_dominance, neighbor_diversity, observed_max, recall_by_factor,
    CompatibilityMatrix, Factor, FactorBinning,
};
use crate::corpus::{
    emit_sense_corpus, emit_word_corpus, load_token_corpus, read_corpus, save_token_stream,
    ClassInventory, CorpusFormat, EmitOptions,
};
use crate::dataset::{build_probe_dataset, ProbeDataset};
use crate::digest::{file_digest, sha256_hex, Fingerprint};
use crate::embedding::{load_embeddings, save_embeddings, train_embeddings, TrainConfig, TrainMode};
use crate::lexicon::{build_sense_lexicon, SenseLexicon};
use crate::probe::{
    frequency_baseline, random_baseline, read_sclass_predictions, run_ambiguity_probe,
    run_sclass_probe, write_likelihood_csv, write_sclass_predictions, ClassifierKind, EvalReport,
    ProbeOptions,
};
use crate::synth::generate;
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RESULTS_FILE: &str = "results.csv";

/// Runs every stage of the grid, independent cells in parallel on `jobs`
/// threads. On a stage error the manifest and the results gathered so far
/// are still written, and the error names the stage.
pub fn run(config: &ExperimentConfig, jobs: usize) -> Result<RunManifest> {
    config.validate()?;
    let out = &config.output;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let previous = RunManifest::load(out.join(MANIFEST_FILE))
        .map(|m| m.stages.into_iter().map(|s| (s.name.clone(), s)).collect())
        .unwrap_or_default();
    let runner = Runner {
        out: out.clone(),
        previous,
        written: Mutex::new(HashSet::new()),
        records: Mutex::new(Vec::new()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;

    let mut rows = Vec::new();
    let outcome = pool.install(|| -> Result<()> {
        let shared = runner.shared_stages(config)?;
        rows.extend(runner.baselines(config, &shared)?);
        let cells: Vec<(TrainMode, usize)> = config
            .train
            .modes
            .iter()
            .flat_map(|&m| config.train.dims.iter().map(move |&d| (m, d)))
            .collect();
        let results: Vec<(Vec<ResultRow>, Option<Error>)> = cells
            .par_iter()
            .map(|&(mode, dim)| runner.cell(config, &shared, mode, dim))
            .collect();
        let mut first_error = None;
        for (cell_rows, err) in results {
            rows.extend(cell_rows);
            if first_error.is_none() {
                first_error = err;
            }
        }
        first_error.map_or(Ok(()), Err)
    });

    let results_digest = if rows.is_empty() {
        None
    } else {
        Some(write_results(&out.join(RESULTS_FILE), &rows)?)
    };
    let mut stages = runner.records.into_inner().expect("stage records lock");
    stages.sort_by(|a, b| a.name.cmp(&b.name));
    let manifest = RunManifest {
        config_hash: sha256_hex(&serde_json::to_vec(config)?),
        config: serde_json::to_value(config)?,
        stages,
        results_digest,
        error: outcome.as_ref().err().map(error_chain),
    };
    manifest.save(out.join(MANIFEST_FILE))?;
    outcome.map(|()| manifest)
}

fn error_chain(e: &Error) -> String {
    let mut text = e.to_string();
    let mut cause = std::error::Error::source(e);
    while let Some(c) = cause {
        text.push_str(": ");
        text.push_str(&c.to_string());
        cause = c.source();
    }
    text
}

/// One line of the results table. Baselines leave mode, dim and
/// representation empty.
#[derive(Clone, Debug, PartialEq)]
struct ResultRow {
    mode: String,
    dim: String,
    representation: String,
    classifier: String,
    sclass_micro_f1: Option<f64>,
    ambiguity_accuracy: Option<f64>,
    status: String,
}

fn write_results(path: &Path, rows: &[ResultRow]) -> Result<String> {
    let mut rows = rows.to_vec();
    rows.sort_by(|a, b| {
        (&a.mode, a.dim.parse::<usize>().ok(), &a.representation, &a.classifier).cmp(&(
            &b.mode,
            b.dim.parse::<usize>().ok(),
            &b.representation,
            &b.classifier,
        ))
    });
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    let mut text =
        String::from("mode,dim,representation,classifier,sclass_micro_f1,ambiguity_accuracy,status\n");
    for r in &rows {
        writeln!(
            text,
            "{},{},{},{},{},{},{}",
            r.mode,
            r.dim,
            r.representation,
            r.classifier,
            fmt(r.sclass_micro_f1),
            fmt(r.ambiguity_accuracy),
            r.status
        )
        .expect("writing to a String");
    }
    std::fs::write(path, &text).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(text.as_bytes()))
}

/// Paths produced by the stages every cell depends on.
struct Shared {
    classes: PathBuf,
    word_tokens: PathBuf,
    sense_tokens: PathBuf,
    lexicon: PathBuf,
    dataset: PathBuf,
}

struct Runner {
    out: PathBuf,
    previous: HashMap<String, StageRecord>,
    written: Mutex<HashSet<PathBuf>>,
    records: Mutex<Vec<StageRecord>>,
}

impl Runner {
    fn rel(&self, path: &Path) -> String {
        path.strip_prefix(&self.out)
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/")
    }

    fn mkdir(&self, rel: &str) -> Result<PathBuf> {
        let dir = self.out.join(rel);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(dir)
    }

    /// Runs `body` unless the stage can be skipped. `body` returns the
    /// warnings to record.
    fn stage<P: Serialize>(
        &self,
        name: &str,
        params: &P,
        inputs: &[&Path],
        outputs: &[&Path],
        body: impl FnOnce() -> Result<Vec<String>>,
    ) -> Result<()> {
        let wrap = |e: Error| Error::Stage {
            stage: name.to_string(),
            source: Box::new(e),
        };
        let input_digests = inputs
            .iter()
            .map(|p| Ok((self.rel(p), file_digest(p)?)))
            .collect::<Result<BTreeMap<_, _>>>()
            .map_err(wrap)?;
        let mut fp = Fingerprint::new()
            .part(name)
            .part(serde_json::to_vec(params).map_err(|e| wrap(e.into()))?);
        for (path, digest) in &input_digests {
            fp = fp.part(path).part(digest);
        }
        let key = fp.finish();

        let upstream_dirty = {
            let written = self.written.lock().expect("written lock");
            inputs.iter().any(|p| written.contains(*p))
        };
        if !upstream_dirty {
            if let Some(prev) = self.previous.get(name) {
                if prev.key == key && prev.status != StageStatus::Failed && self.outputs_intact(prev, outputs) {
                    log::info!("{name}: up to date");
                    self.push(StageRecord {
                        name: name.to_string(),
                        status: StageStatus::Skipped,
                        key,
                        inputs: input_digests,
                        outputs: prev.outputs.clone(),
                        seconds: 0.0,
                        warnings: prev.warnings.clone(),
                    });
                    return Ok(());
                }
            }
        }

        log::info!("{name}: running");
        let start = Instant::now();
        let result = body().and_then(|warnings| {
            let outputs = outputs
                .iter()
                .map(|p| Ok((self.rel(p), file_digest(p)?)))
                .collect::<Result<BTreeMap<_, _>>>()?;
            Ok((warnings, outputs))
        });
        let seconds = start.elapsed().as_secs_f64();
        {
            let mut written = self.written.lock().expect("written lock");
            written.extend(outputs.iter().map(|p| p.to_path_buf()));
        }
        match result {
            Ok((warnings, output_digests)) => {
                self.push(StageRecord {
                    name: name.to_string(),
                    status: StageStatus::Ran,
                    key,
                    inputs: input_digests,
                    outputs: output_digests,
                    seconds,
                    warnings,
                });
                Ok(())
            }
            Err(e) => {
                self.push(StageRecord {
                    name: name.to_string(),
                    status: StageStatus::Failed,
                    key,
                    inputs: input_digests,
                    outputs: BTreeMap::new(),
                    seconds,
                    warnings: vec![e.to_string()],
                });
                Err(wrap(e))
            }
        }
    }

    fn outputs_intact(&self, prev: &StageRecord, outputs: &[&Path]) -> bool {
        outputs.len() == prev.outputs.len()
            && outputs.iter().all(|p| {
                prev.outputs
                    .get(&self.rel(p))
                    .is_some_and(|d| file_digest(p).is_ok_and(|actual| &actual == d))
            })
    }

    fn push(&self, record: StageRecord) {
        self.records.lock().expect("stage records lock").push(record);
    }

    fn shared_stages(&self, config: &ExperimentConfig) -> Result<Shared> {
        let (corpus, format, classes) = match (&config.corpus, &config.synth) {
            (_, Some(spec)) => {
                let dir = self.mkdir("synth")?;
                let corpus = dir.join("corpus.jsonl");
                let classes = dir.join("classes.txt");
                let lexicon = dir.join("lexicon.tsv");
                self.stage("synth", spec, &[], &[&corpus, &classes, &lexicon], || {
                    generate(spec)?.save(&dir)?;
                    Ok(Vec::new())
                })?;
                (corpus, CorpusFormat::Jsonl, classes)
            }
            (Some(source), None) => {
                let classes = self.out.join("classes.txt");
                let given = source.classes.as_deref();
                let inputs: Vec<&Path> = given.into_iter().collect();
                self.stage("classes", &given.is_some(), &inputs, &[&classes], || {
                    let inventory = match given {
                        Some(path) => ClassInventory::load(path)?,
                        None => ClassInventory::figer_parents(),
                    };
                    inventory.save(&classes)?;
                    Ok(Vec::new())
                })?;
                (source.path.clone(), source.format, classes)
            }
            (None, None) => unreachable!("validated config has a corpus source"),
        };

        let lowercase = config.lexicon.lowercase;
        let emit = EmitOptions {
            lowercase,
            annotated_only: true,
        };
        let tokens_dir = self.mkdir("tokens")?;
        let word_tokens = tokens_dir.join("word.txt");
        let sense_tokens = tokens_dir.join("sense.txt");
        let read = || -> Result<(ClassInventory, Vec<_>)> {
            let inventory = ClassInventory::load(&classes)?;
            let sentences = read_corpus(&corpus, format, &inventory)?;
            Ok((inventory, sentences))
        };
        self.stage("emit-word", &(format, emit), &[&corpus, &classes], &[&word_tokens], || {
            let (_, sentences) = read()?;
            save_token_stream(&word_tokens, emit_word_corpus(&sentences, emit))?;
            Ok(Vec::new())
        })?;
        self.stage("emit-sense", &(format, emit), &[&corpus, &classes], &[&sense_tokens], || {
            let (inventory, sentences) = read()?;
            save_token_stream(&sense_tokens, emit_sense_corpus(&sentences, &inventory, emit))?;
            Ok(Vec::new())
        })?;

        let lexicon = self.out.join("lexicon.tsv");
        self.stage("lexicon", &(format, &config.lexicon), &[&corpus, &classes], &[&lexicon], || {
            let (inventory, sentences) = read()?;
            let lex = build_sense_lexicon(&sentences, &inventory, config.lexicon.min_word_freq, lowercase)?;
            lex.save(&lexicon)?;
            Ok(Vec::new())
        })?;

        let dataset = self.out.join("dataset.tsv");
        let compat = self.out.join("compatibility.csv");
        self.stage("dataset", &config.dataset, &[&lexicon, &classes], &[&dataset, &compat], || {
            let inventory = ClassInventory::load(&classes)?;
            let lex = SenseLexicon::load(&lexicon, &inventory)?;
            let warnings: Vec<String> = crate::dataset::balance_warning(&lex).into_iter().collect();
            let ds = build_probe_dataset(&lex, config.dataset.seed)?;
            ds.save(&dataset)?;
            let file = File::create(&compat).map_err(|e| Error::io(&compat, e))?;
            CompatibilityMatrix::from_dataset(&ds).write_csv(BufWriter::new(file))?;
            Ok(warnings)
        })?;

        Ok(Shared {
            classes,
            word_tokens,
            sense_tokens,
            lexicon,
            dataset,
        })
    }

    fn baselines(&self, config: &ExperimentConfig, shared: &Shared) -> Result<Vec<ResultRow>> {
        let grid = &config.probe;
        if !grid.baselines {
            return Ok(Vec::new());
        }
        let dir = self.mkdir("baselines")?;
        let mut rows = Vec::new();
        if grid.tasks.contains(&Task::Sclass) {
            let report = dir.join("random.json");
            let pred = dir.join("random.tsv");
            self.stage("baseline-random", &grid.seed, &[&shared.dataset, &shared.classes], &[&report, &pred], || {
                let (_, ds) = load_dataset(shared)?;
                let (p, r) = random_baseline(&ds, grid.seed)?;
                save_predictions(&pred, &p, &ds)?;
                r.save_json(&report)?;
                Ok(r.warnings)
            })?;
            rows.push(baseline_row("random", Some(metric(&report, "micro_f1")?), None));
        }
        if grid.tasks.contains(&Task::Ambiguity) {
            let report = dir.join("frequency.json");
            let likelihood = dir.join("frequency.csv");
            let inputs: [&Path; 3] = [&shared.dataset, &shared.lexicon, &shared.classes];
            self.stage("baseline-frequency", &(), &inputs, &[&report, &likelihood], || {
                let (lex, ds) = load_dataset(shared)?;
                let (p, r) = frequency_baseline(&ds, &lex)?;
                let file = File::create(&likelihood).map_err(|e| Error::io(&likelihood, e))?;
                write_likelihood_csv(&p, &ds, &lex, BufWriter::new(file))?;
                r.save_json(&report)?;
                Ok(r.warnings)
            })?;
            rows.push(baseline_row("frequency", None, Some(metric(&report, "accuracy")?)));
        }
        Ok(rows)
    }

    /// All stages of one `(mode, dim)` cell. Rows are returned even when a
    /// stage fails, with the failure in the status column.
    fn cell(
        &self,
        config: &ExperimentConfig,
        shared: &Shared,
        mode: TrainMode,
        dim: usize,
    ) -> (Vec<ResultRow>, Option<Error>) {
        let grid = &config.probe;
        let mut rows: Vec<ResultRow> = grid
            .representations
            .iter()
            .flat_map(|&repr| {
                grid.classifiers.iter().map(move |kind| ResultRow {
                    mode: mode.as_str().to_string(),
                    dim: dim.to_string(),
                    representation: repr.to_string(),
                    classifier: classifier_label(kind),
                    sclass_micro_f1: None,
                    ambiguity_accuracy: None,
                    status: "ok".into(),
                })
            })
            .collect();
        match self.cell_stages(config, shared, mode, dim, &mut rows) {
            Ok(()) => (rows, None),
            Err(e) => {
                let stage = match &e {
                    Error::Stage { stage, .. } => stage.clone(),
                    _ => format!("{}-{dim}", mode.as_str()),
                };
                for row in &mut rows {
                    if row.status == "ok" && (row.sclass_micro_f1.is_none() && row.ambiguity_accuracy.is_none()) {
                        row.status = format!("failed at {stage}");
                    }
                }
                (rows, Some(e))
            }
        }
    }

    fn cell_stages(
        &self,
        config: &ExperimentConfig,
        shared: &Shared,
        mode: TrainMode,
        dim: usize,
        rows: &mut [ResultRow],
    ) -> Result<()> {
        let grid = &config.probe;
        let cell = format!("{}-{dim}", mode.as_str());
        let dir = self.mkdir(&format!("cells/{cell}"))?;
        let train_cfg = TrainConfig {
            dim,
            ..config.train.params.clone()
        };
        let needs_sense = grid
            .representations
            .iter()
            .any(|&r| r != Representation::Word);
        let needs_word = grid.representations.contains(&Representation::Word);

        let mut tables: Vec<(Representation, PathBuf)> = Vec::new();
        for (kind, tokens, wanted) in [
            ("word", &shared.word_tokens, needs_word),
            ("sense", &shared.sense_tokens, needs_sense),
        ] {
            if !wanted {
                continue;
            }
            let vec_path = dir.join(format!("{kind}.vec"));
            self.stage(
                &format!("{cell}/train-{kind}"),
                &(mode, &train_cfg),
                &[tokens.as_path()],
                &[&vec_path],
                || {
                    let sentences = load_token_corpus(tokens)?;
                    let (table, stats) = train_embeddings(&sentences, &train_cfg, mode)?;
                    save_embeddings(&table, &vec_path)?;
                    Ok(stats
                        .epoch_loss
                        .last()
                        .map(|l| vec![format!("final epoch loss {l:.6}")])
                        .unwrap_or_default())
                },
            )?;
            if kind == "word" {
                tables.push((Representation::Word, vec_path));
            }
        }

        let sense_vec = dir.join("sense.vec");
        for &repr in &grid.representations {
            let agg_mode = match repr {
                Representation::Word => continue,
                Representation::Unif => AggregateMode::Unif,
                Representation::Wght => AggregateMode::Wght,
            };
            let vec_path = dir.join(format!("{repr}.vec"));
            let coverage = dir.join(format!("{repr}-coverage.csv"));
            self.stage(
                &format!("{cell}/aggregate-{repr}"),
                &agg_mode,
                &[&sense_vec, &shared.lexicon, &shared.classes],
                &[&vec_path, &coverage],
                || {
                    let inventory = ClassInventory::load(&shared.classes)?;
                    let lex = SenseLexicon::load(&shared.lexicon, &inventory)?;
                    let senses = load_embeddings(&sense_vec)?;
                    let words: Vec<&str> = lex.words().collect();
                    let spec = AggregateSpec {
                        mode: agg_mode,
                        lexicon: &lex,
                        senses: &senses,
                    };
                    let (table, report) = build_aggregate_table(&spec, &words)?;
                    save_embeddings(&table, &vec_path)?;
                    report.save(&coverage)?;
                    let excluded = report.excluded().count();
                    Ok(if excluded > 0 {
                        vec![format!("{excluded} words have no sense vector")]
                    } else {
                        Vec::new()
                    })
                },
            )?;
            tables.push((repr, vec_path));
        }

        for (repr, vec_path) in &tables {
            for kind in &grid.classifiers {
                let label = classifier_label(kind);
                let row = rows
                    .iter_mut()
                    .find(|r| r.representation == repr.as_str() && r.classifier == label)
                    .expect("row for every configured cell");
                let probe_inputs: [&Path; 3] = [vec_path, &shared.dataset, &shared.classes];
                if grid.tasks.contains(&Task::Sclass) {
                    let stem = format!("sclass-{repr}-{label}");
                    let report = dir.join(format!("{stem}.json"));
                    let pred = dir.join(format!("{stem}.tsv"));
                    let opts = ProbeOptions {
                        normalize: grid.sclass_normalize,
                        seed: grid.seed,
                    };
                    self.stage(&format!("{cell}/probe-{stem}"), &(kind, opts), &probe_inputs, &[&report, &pred], || {
                        let (_, ds) = load_dataset(shared)?;
                        let table = load_embeddings(vec_path)?;
                        let (p, r) = run_sclass_probe(&table, &ds, kind, &opts)?;
                        save_predictions(&pred, &p, &ds)?;
                        r.save_json(&report)?;
                        Ok(r.warnings)
                    })?;
                    row.sclass_micro_f1 = Some(metric(&report, "micro_f1")?);
                    self.factor_stage(config, shared, &dir, &cell, &stem, &pred)?;
                }
                if grid.tasks.contains(&Task::Ambiguity) {
                    let stem = format!("ambiguity-{repr}-{label}");
                    let report = dir.join(format!("{stem}.json"));
                    let likelihood = dir.join(format!("{stem}.csv"));
                    let opts = ProbeOptions {
                        normalize: grid.ambiguity_normalize,
                        seed: grid.seed,
                    };
                    let inputs: [&Path; 4] = [vec_path, &shared.dataset, &shared.lexicon, &shared.classes];
                    self.stage(&format!("{cell}/probe-{stem}"), &(kind, opts), &inputs, &[&report, &likelihood], || {
                        let (lex, ds) = load_dataset(shared)?;
                        let table = load_embeddings(vec_path)?;
                        let (p, r) = run_ambiguity_probe(&table, &ds, kind, &opts)?;
                        let file = File::create(&likelihood).map_err(|e| Error::io(&likelihood, e))?;
                        write_likelihood_csv(&p, &ds, &lex, BufWriter::new(file))?;
                        r.save_json(&report)?;
                        Ok(r.warnings)
                    })?;
                    row.ambiguity_accuracy = Some(metric(&report, "accuracy")?);
                }
            }
            if let Some(k) = config.analysis.neighbors_k {
                self.neighbor_stage(shared, &dir, &cell, *repr, vec_path, k)?;
            }
        }
        Ok(())
    }

    fn factor_stage(
        &self,
        config: &ExperimentConfig,
        shared: &Shared,
        dir: &Path,
        cell: &str,
        stem: &str,
        pred: &Path,
    ) -> Result<()> {
        let factors = &config.analysis.factors;
        if factors.is_empty() {
            return Ok(());
        }
        let csvs: Vec<PathBuf> = factors
            .iter()
            .map(|f| dir.join(format!("{stem}-by-{f}.csv")))
            .collect();
        let outputs: Vec<&Path> = csvs.iter().map(PathBuf::as_path).collect();
        let inputs: [&Path; 4] = [pred, &shared.dataset, &shared.lexicon, &shared.classes];
        self.stage(&format!("{cell}/analysis-{stem}"), factors, &inputs, &outputs, || {
            let (lex, ds) = load_dataset(shared)?;
            let file = File::open(pred).map_err(|e| Error::io(pred, e))?;
            let predictions = read_sclass_predictions(BufReader::new(file), &ds.inventory)?;
            let compat = CompatibilityMatrix::from_dataset(&ds);
            for (&factor, path) in factors.iter().zip(&csvs) {
                let compat = (factor == Factor::Typicality).then_some(&compat);
                let max = observed_max(factor, &ds, &lex, compat)?;
                let binning = FactorBinning::default_for(factor, max);
                let curve = recall_by_factor(&predictions, &ds, &lex, compat, &binning)?;
                let file = File::create(path).map_err(|e| Error::io(path, e))?;
                curve.write_csv(BufWriter::new(file))?;
            }
            Ok(Vec::new())
        })
    }

    fn neighbor_stage(
        &self,
        shared: &Shared,
        dir: &Path,
        cell: &str,
        repr: Representation,
        vec_path: &Path,
        k: usize,
    ) -> Result<()> {
        let per_word = dir.join(format!("neighbors-{repr}.csv"));
        let by_dominance = dir.join(format!("neighbors-{repr}-by-dominance.csv"));
        let inputs: [&Path; 4] = [vec_path, &shared.dataset, &shared.lexicon, &shared.classes];
        self.stage(
            &format!("{cell}/neighbors-{repr}"),
            &k,
            &inputs,
            &[&per_word, &by_dominance],
            || {
                let (lex, ds) = load_dataset(shared)?;
                let table = load_embeddings(vec_path)?;
                let candidates: Vec<&str> = lex.words().filter(|w| table.get(w).is_some()).collect();
                let words: Vec<&str> = ds
                    .examples
                    .iter()
                    .map(|ex| ex.word.as_str())
                    .filter(|w| table.get(w).is_some())
                    .collect();
                let mut warnings = Vec::new();
                if words.len() < ds.len() {
                    warnings.push(format!("{} dataset words have no vector", ds.len() - words.len()));
                }
                if candidates.len() <= k {
                    warnings.push(format!("only {} candidate words for k = {k}; skipped", candidates.len()));
                    std::fs::write(&per_word, "").map_err(|e| Error::io(&per_word, e))?;
                    std::fs::write(&by_dominance, "").map_err(|e| Error::io(&by_dominance, e))?;
                    return Ok(warnings);
                }
                let div = neighbor_diversity(&table, &lex, &words, k, Some(&candidates))?;
                let file = File::create(&per_word).map_err(|e| Error::io(&per_word, e))?;
                div.write_csv(BufWriter::new(file))?;
                let binning = FactorBinning::default_for(Factor::Dominance, 1.0);
                let mut text = String::from("dominance,mean_unique_classes,support\n");
                for b in diversity_by_dominance(&div, &lex, &binning) {
                    writeln!(text, "{},{},{}", b.center, b.mean, b.support).expect("writing to a String");
                }
                std::fs::write(&by_dominance, text).map_err(|e| Error::io(&by_dominance, e))?;
                Ok(warnings)
            },
        )
    }
}

fn classifier_label(kind: &ClassifierKind) -> String {
    kind.name().to_string()
}

fn baseline_row(classifier: &str, f1: Option<f64>, accuracy: Option<f64>) -> ResultRow {
    ResultRow {
        mode: String::new(),
        dim: String::new(),
        representation: String::new(),
        classifier: classifier.to_string(),
        sclass_micro_f1: f1,
        ambiguity_accuracy: accuracy,
        status: "ok".into(),
    }
}

fn load_dataset(shared: &Shared) -> Result<(SenseLexicon, ProbeDataset)> {
    let inventory = ClassInventory::load(&shared.classes)?;
    let lex = SenseLexicon::load(&shared.lexicon, &inventory)?;
    let ds = ProbeDataset::load(&shared.dataset, &inventory)?;
    Ok((lex, ds))
}

fn save_predictions(
    path: &Path,
    pred: &crate::probe::PredictionSet<Vec<crate::corpus::ClassId>>,
    ds: &ProbeDataset,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_sclass_predictions(pred, &ds.inventory, &mut out)?;
    out.flush().map_err(|e| Error::io(path, e))
}

fn metric(report: &Path, name: &str) -> Result<f64> {
    EvalReport::load_json(report)?
        .metric(name)
        .ok_or_else(|| Error::Config(format!("{} has no `{name}` metric", report.display())))
}
