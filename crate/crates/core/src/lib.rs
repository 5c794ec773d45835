//! Probing single-vector word embeddings for the semantic classes (S-classes)
//! of the senses they conflate.
//!
//! The crate covers the whole pipeline: ingestion of an entity-annotated
//! corpus, construction of the word/S-class lexicon and the balanced probing
//! dataset, SkipGram and Structured SkipGram training with negative sampling,
//! sense-sum aggregation, the diagnostic probes (S-class membership and
//! ambiguity) with their baselines, factor analyses of probe results, a
//! synthetic corpus generator with known ground truth, and a resumable
//! experiment runner.

pub mod aggregate;
pub mod analysis;
pub mod corpus;
pub mod dataset;
pub mod digest;
pub mod embedding;
mod error;
pub mod lexicon;
pub mod pipeline;
pub mod probe;
pub mod synth;

pub use aggregate::{AggregateMode, AggregateSpec, CoverageReport};
pub use corpus::{
    AnnotatedSentence, ClassId, ClassInventory, CorpusFormat, Mention, StreamMode, TokenStream,
};
pub use dataset::{ProbeDataset, ProbeExample, Split};
pub use embedding::{EmbeddingTable, TableMode, TrainConfig, TrainMode, Vocabulary};
pub use error::{Error, Result};
pub use lexicon::SenseLexicon;
pub use probe::{ClassifierKind, EvalReport, PredictionSet};

