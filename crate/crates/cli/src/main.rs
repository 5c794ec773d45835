use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use senseprobe::aggregate::{build_aggregate_table, AggregateMode, AggregateSpec};
use senseprobe::analysis::{
    diversity_by_dominance, neighbor_diversity, observed_max, recall_by_factor,
    CompatibilityMatrix, Factor, FactorBinning,
};
use senseprobe::corpus::{
    emit_sense_corpus, emit_word_corpus, load_token_corpus, read_corpus, save_token_stream,
    ClassInventory, CorpusFormat, EmitOptions,
};
use senseprobe::dataset::{balance_warning, build_probe_dataset, ProbeDataset};
use senseprobe::embedding::{load_embeddings, save_embeddings, train_embeddings};
use senseprobe::lexicon::{build_sense_lexicon, SenseLexicon};
use senseprobe::pipeline::{run, ExperimentConfig};
use senseprobe::probe::{
    frequency_baseline, random_baseline, read_sclass_predictions, run_ambiguity_probe,
    run_sclass_probe, write_likelihood_csv, write_sclass_predictions, ClassifierKind, EvalReport,
    ProbeOptions,
};
use senseprobe::synth::{generate, SynthSpec};
use senseprobe::{TrainConfig, TrainMode};

#[derive(Parser)]
#[command(name = "senseprobe", version, about = "Probe word embeddings for the semantic classes of their senses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus conversion.
    #[command(subcommand)]
    Corpus(CorpusCommand),
    /// Lexicon, probing dataset and class compatibility from an annotated corpus.
    #[command(subcommand)]
    Dataset(DatasetCommand),
    /// Train SkipGram or Structured SkipGram embeddings on a token corpus.
    Train(TrainArgs),
    /// Sum sense vectors into one vector per word.
    Aggregate(AggregateArgs),
    /// Run a diagnostic probe.
    #[command(subcommand)]
    Probe(ProbeCommand),
    /// Random and frequency baselines.
    #[command(subcommand)]
    Baseline(BaselineCommand),
    /// Factor and neighborhood analyses.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Generate a synthetic annotated corpus from a JSON spec.
    Synth(SynthArgs),
    /// Run a full experiment grid from a TOML config.
    Run(RunArgs),
}

#[derive(Args)]
struct ClassesArg {
    /// One class name per line; defaults to the 34 FIGER parent types.
    #[arg(long)]
    classes: Option<PathBuf>,
}

impl ClassesArg {
    fn load(&self) -> Result<ClassInventory> {
        match &self.classes {
            Some(path) => ClassInventory::load(path).with_context(|| format!("reading {}", path.display())),
            None => Ok(ClassInventory::figer_parents()),
        }
    }
}

#[derive(Args)]
struct CorpusArgs {
    /// Annotated corpus file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "jsonl")]
    format: CorpusFormat,
    #[command(flatten)]
    classes: ClassesArg,
    /// Keep mention case.
    #[arg(long)]
    keep_case: bool,
}

impl CorpusArgs {
    fn read(&self) -> Result<(ClassInventory, Vec<senseprobe::AnnotatedSentence>)> {
        let inventory = self.classes.load()?;
        let sentences = read_corpus(&self.input, self.format, &inventory)
            .with_context(|| format!("reading {}", self.input.display()))?;
        Ok((inventory, sentences))
    }
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Write the word or sense token stream, one sentence per line.
    Emit {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, value_enum, default_value = "word")]
        mode: StreamKind,
        /// Also emit sentences without mentions.
        #[arg(long)]
        all_sentences: bool,
        #[arg(long)]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StreamKind {
    Word,
    Sense,
}

#[derive(Subcommand)]
enum DatasetCommand {
    /// Writes lexicon.tsv, dataset.tsv and compatibility.csv into `--out`.
    Build {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, default_value_t = 20)]
        min_freq: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct TrainArgs {
    /// Token corpus written by `corpus emit`.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value = "skip")]
    mode: TrainMode,
    #[arg(long, default_value_t = 100)]
    dim: usize,
    #[arg(long, default_value_t = 5)]
    window: usize,
    #[arg(long, default_value_t = 10)]
    negatives: usize,
    #[arg(long, default_value_t = 5)]
    iters: usize,
    #[arg(long, default_value_t = 0.025)]
    lr: f32,
    #[arg(long, default_value_t = 1)]
    min_count: u64,
    /// Frequency subsampling threshold, e.g. 1e-4.
    #[arg(long)]
    subsample: Option<f64>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// word2vec text output.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct AggregateArgs {
    /// Sense embeddings (word2vec text).
    #[arg(long)]
    senses: PathBuf,
    #[arg(long)]
    lexicon: PathBuf,
    #[command(flatten)]
    classes: ClassesArg,
    #[arg(long, default_value = "unif")]
    mode: AggregateMode,
    #[arg(long)]
    output: PathBuf,
    /// CSV of words with missing sense vectors.
    #[arg(long)]
    coverage: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifierArgs {
    #[arg(long, default_value = "mlp")]
    clf: String,
    /// Neighbors for KNN.
    #[arg(long)]
    k: Option<usize>,
    /// Hidden width for MLP.
    #[arg(long)]
    hidden: Option<usize>,
    /// MLP initializations; the lowest-loss one is kept.
    #[arg(long)]
    restarts: Option<usize>,
}

impl ClassifierArgs {
    fn kind(&self) -> Result<ClassifierKind> {
        let mut kind: ClassifierKind = self.clf.parse()?;
        match &mut kind {
            ClassifierKind::Knn(c) => {
                if let Some(k) = self.k {
                    c.k = k;
                }
            }
            ClassifierKind::Mlp(c) => {
                c.hidden = self.hidden.or(c.hidden);
                if let Some(r) = self.restarts {
                    c.restarts = r;
                }
            }
            ClassifierKind::Lr(_) => {}
        }
        if self.k.is_some() && !matches!(kind, ClassifierKind::Knn(_)) {
            bail!("--k only applies to knn");
        }
        if (self.hidden.is_some() || self.restarts.is_some()) && !matches!(kind, ClassifierKind::Mlp(_)) {
            bail!("--hidden and --restarts only apply to mlp");
        }
        kind.validate()?;
        Ok(kind)
    }
}

#[derive(Args)]
struct ProbeArgs {
    /// Embeddings (word2vec text).
    #[arg(long)]
    emb: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[command(flatten)]
    classes: ClassesArg,
    #[command(flatten)]
    classifier: ClassifierArgs,
    /// L2-normalize vectors; defaults to off for S-class and on for ambiguity.
    #[arg(long)]
    normalize: Option<bool>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// JSON evaluation report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Per-word predictions.
    #[arg(long)]
    predictions: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ProbeCommand {
    /// Per-class binary probes; predictions are `word<TAB>class,...`.
    Sclass(ProbeArgs),
    /// Ambiguous vs unambiguous; predictions are a likelihood CSV.
    Ambiguity {
        #[command(flatten)]
        args: ProbeArgs,
        /// Needed for the frequency column of the likelihood CSV.
        #[arg(long)]
        lexicon: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BaselineCommand {
    /// Classes drawn independently with their train priors.
    Random {
        #[arg(long)]
        dataset: PathBuf,
        #[command(flatten)]
        classes: ClassesArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Ambiguity from log word frequency alone.
    Frequency {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[command(flatten)]
        classes: ClassesArg,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Recall of gold (word, class) pairs binned by a factor.
    Factor {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[command(flatten)]
        classes: ClassesArg,
        /// dominance, classes, frequency or typicality.
        #[arg(long)]
        factor: Factor,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Distinct gold classes among each word's nearest neighbors.
    Neighbors {
        #[arg(long)]
        emb: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[command(flatten)]
        classes: ClassesArg,
        /// Restrict query words to the dataset; defaults to every lexicon word.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Mean diversity of two-class words per minority-dominance bin.
        #[arg(long)]
        by_dominance: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SynthArgs {
    /// JSON synth spec.
    #[arg(long)]
    spec: PathBuf,
    /// Overrides the seed in the spec.
    #[arg(long)]
    seed: Option<u64>,
    /// Receives corpus.jsonl, lexicon.tsv and classes.txt.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Grid cells run in parallel.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Err(e) = dispatch(Cli::parse().command) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Corpus(CorpusCommand::Emit {
            corpus,
            mode,
            all_sentences,
            output,
        }) => {
            let (inventory, sentences) = corpus.read()?;
            let options = EmitOptions {
                lowercase: !corpus.keep_case,
                annotated_only: !all_sentences,
            };
            let n = match mode {
                StreamKind::Word => save_token_stream(&output, emit_word_corpus(&sentences, options))?,
                StreamKind::Sense => {
                    save_token_stream(&output, emit_sense_corpus(&sentences, &inventory, options))?
                }
            };
            println!("wrote {n} sentences to {}", output.display());
        }
        Command::Dataset(DatasetCommand::Build {
            corpus,
            min_freq,
            seed,
            out,
        }) => {
            let (inventory, sentences) = corpus.read()?;
            let lexicon = build_sense_lexicon(&sentences, &inventory, min_freq, !corpus.keep_case)?;
            if let Some(w) = balance_warning(&lexicon) {
                log::warn!("{w}");
            }
            let dataset = build_probe_dataset(&lexicon, seed)?;
            std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            lexicon.save(out.join("lexicon.tsv"))?;
            dataset.save(out.join("dataset.tsv"))?;
            inventory.save(out.join("classes.txt"))?;
            CompatibilityMatrix::from_dataset(&dataset).write_csv(create(&out.join("compatibility.csv"))?)?;
            println!(
                "{} lexicon words, {} dataset words ({} ambiguous)",
                lexicon.len(),
                dataset.len(),
                dataset.examples.iter().filter(|e| e.is_ambiguous()).count()
            );
        }
        Command::Train(a) => {
            let cfg = TrainConfig {
                dim: a.dim,
                window: a.window,
                negatives: a.negatives,
                iterations: a.iters,
                initial_lr: a.lr,
                min_count: a.min_count,
                subsample: a.subsample,
                seed: a.seed,
                workers: a.workers,
                ..TrainConfig::default()
            };
            let sentences = load_token_corpus(&a.corpus)?;
            let (table, stats) = train_embeddings(&sentences, &cfg, a.mode)?;
            save_embeddings(&table, &a.output)?;
            for (epoch, loss) in stats.epoch_loss.iter().enumerate() {
                println!("epoch {} loss {loss:.6}", epoch + 1);
            }
            println!("{} vectors of dim {} written to {}", table.len(), table.dim(), a.output.display());
        }
        Command::Aggregate(a) => {
            let inventory = a.classes.load()?;
            let lexicon = SenseLexicon::load(&a.lexicon, &inventory)?;
            let senses = load_embeddings(&a.senses)?;
            let words: Vec<&str> = lexicon.words().collect();
            let spec = AggregateSpec {
                mode: a.mode,
                lexicon: &lexicon,
                senses: &senses,
            };
            let (table, coverage) = build_aggregate_table(&spec, &words)?;
            save_embeddings(&table, &a.output)?;
            if let Some(path) = &a.coverage {
                coverage.save(path)?;
            }
            println!(
                "{} words aggregated, {} without any sense vector",
                table.len(),
                coverage.excluded().count()
            );
        }
        Command::Probe(ProbeCommand::Sclass(a)) => {
            let inventory = a.classes.load()?;
            let dataset = ProbeDataset::load(&a.dataset, &inventory)?;
            let table = load_embeddings(&a.emb)?;
            let opts = ProbeOptions {
                normalize: a.normalize.unwrap_or(false),
                seed: a.seed,
            };
            let (pred, report) = run_sclass_probe(&table, &dataset, &a.classifier.kind()?, &opts)?;
            if let Some(path) = &a.predictions {
                let mut out = create(path)?;
                write_sclass_predictions(&pred, &inventory, &mut out)?;
                out.flush()?;
            }
            finish_report(&report, a.report.as_deref())?;
        }
        Command::Probe(ProbeCommand::Ambiguity { args: a, lexicon }) => {
            let inventory = a.classes.load()?;
            let dataset = ProbeDataset::load(&a.dataset, &inventory)?;
            let table = load_embeddings(&a.emb)?;
            let opts = ProbeOptions {
                normalize: a.normalize.unwrap_or(true),
                seed: a.seed,
            };
            let (pred, report) = run_ambiguity_probe(&table, &dataset, &a.classifier.kind()?, &opts)?;
            if let Some(path) = &a.predictions {
                let lexicon = match &lexicon {
                    Some(p) => SenseLexicon::load(p, &inventory)?,
                    None => bail!("--predictions for the ambiguity probe needs --lexicon"),
                };
                let mut out = create(path)?;
                write_likelihood_csv(&pred, &dataset, &lexicon, &mut out)?;
                out.flush()?;
            }
            finish_report(&report, a.report.as_deref())?;
        }
        Command::Baseline(BaselineCommand::Random {
            dataset,
            classes,
            seed,
            report,
        }) => {
            let inventory = classes.load()?;
            let dataset = ProbeDataset::load(&dataset, &inventory)?;
            let (_, r) = random_baseline(&dataset, seed)?;
            finish_report(&r, report.as_deref())?;
        }
        Command::Baseline(BaselineCommand::Frequency {
            dataset,
            lexicon,
            classes,
            report,
        }) => {
            let inventory = classes.load()?;
            let dataset = ProbeDataset::load(&dataset, &inventory)?;
            let lexicon = SenseLexicon::load(&lexicon, &inventory)?;
            let (_, r) = frequency_baseline(&dataset, &lexicon)?;
            finish_report(&r, report.as_deref())?;
        }
        Command::Analyze(AnalyzeCommand::Factor {
            predictions,
            dataset,
            lexicon,
            classes,
            factor,
            output,
        }) => {
            let inventory = classes.load()?;
            let dataset = ProbeDataset::load(&dataset, &inventory)?;
            let lexicon = SenseLexicon::load(&lexicon, &inventory)?;
            let file = File::open(&predictions).with_context(|| format!("reading {}", predictions.display()))?;
            let pred = read_sclass_predictions(BufReader::new(file), &inventory)?;
            let compat = CompatibilityMatrix::from_dataset(&dataset);
            let compat = (factor == Factor::Typicality).then_some(&compat);
            let max = observed_max(factor, &dataset, &lexicon, compat)?;
            let binning = FactorBinning::default_for(factor, max);
            let curve = recall_by_factor(&pred, &dataset, &lexicon, compat, &binning)?;
            match output {
                Some(path) => curve.write_csv(create(&path)?)?,
                None => curve.write_csv(std::io::stdout().lock())?,
            }
        }
        Command::Analyze(AnalyzeCommand::Neighbors {
            emb,
            lexicon,
            classes,
            dataset,
            k,
            output,
            by_dominance,
        }) => {
            let inventory = classes.load()?;
            let lexicon = SenseLexicon::load(&lexicon, &inventory)?;
            let table = load_embeddings(&emb)?;
            let candidates: Vec<String> = lexicon
                .words()
                .filter(|w| table.get(w).is_some())
                .map(String::from)
                .collect();
            let words: Vec<String> = match &dataset {
                Some(path) => ProbeDataset::load(path, &inventory)?
                    .examples
                    .into_iter()
                    .map(|e| e.word)
                    .filter(|w| table.get(w).is_some())
                    .collect(),
                None => candidates.clone(),
            };
            let div = neighbor_diversity(&table, &lexicon, &words, k, Some(&candidates))?;
            match output {
                Some(path) => div.write_csv(create(&path)?)?,
                None => div.write_csv(std::io::stdout().lock())?,
            }
            eprintln!("mean distinct classes among {k} neighbors: {:.4}", div.mean);
            if let Some(path) = by_dominance {
                let binning = FactorBinning::default_for(Factor::Dominance, 1.0);
                let mut out = create(&path)?;
                writeln!(out, "dominance,mean_unique_classes,support")?;
                for b in diversity_by_dominance(&div, &lexicon, &binning) {
                    writeln!(out, "{},{},{}", b.center, b.mean, b.support)?;
                }
                out.flush()?;
            }
        }
        Command::Synth(a) => {
            let mut spec = SynthSpec::load(&a.spec).with_context(|| format!("reading {}", a.spec.display()))?;
            if let Some(seed) = a.seed {
                spec.seed = seed;
            }
            let corpus = generate(&spec)?;
            corpus.save(&a.out)?;
            println!(
                "{} sentences, {} words written to {}",
                corpus.sentences.len(),
                corpus.lexicon.len(),
                a.out.display()
            );
        }
        Command::Run(a) => {
            let config = ExperimentConfig::load(&a.config)?;
            let manifest = run(&config, a.jobs)?;
            let ran = manifest.ran().count();
            println!(
                "{} stages, {ran} ran, {} up to date; results in {}",
                manifest.stages.len(),
                manifest.stages.len() - ran,
                config.output.join(senseprobe::pipeline::RESULTS_FILE).display()
            );
        }
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn finish_report(report: &EvalReport, path: Option<&Path>) -> Result<()> {
    for w in &report.warnings {
        log::warn!("{w}");
    }
    for (name, value) in &report.metrics {
        println!("{name}\t{value:.4}");
    }
    if let Some(path) = path {
        report.save_json(path)?;
    }
    Ok(())
}
