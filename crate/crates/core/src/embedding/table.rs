use serde::{Deserialize, Serialize};

use super::vocab::Vocabulary;
use crate::digest::Fingerprint;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableMode {
    /// SkipGram: one shared output block.
    Skip,
    /// Structured SkipGram: one output block per signed window offset.
    StructuredSkip { window: usize },
    /// Loaded from a file or derived; no output parameters.
    Imported,
}

impl TableMode {
    pub fn output_blocks(self) -> usize {
        match self {
            TableMode::Skip => 1,
            TableMode::StructuredSkip { window } => 2 * window,
            TableMode::Imported => 0,
        }
    }
}

/// Dense word vectors, row-major, plus the output parameters of a trained model.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    vocab: Vocabulary,
    dim: usize,
    input: Vec<f32>,
    output: Vec<f32>,
    mode: TableMode,
}

impl EmbeddingTable {
    pub fn new(
        vocab: Vocabulary,
        dim: usize,
        input: Vec<f32>,
        output: Vec<f32>,
        mode: TableMode,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Embedding("dimension must be positive".into()));
        }
        let n = vocab.len();
        if input.len() != n * dim {
            return Err(Error::Embedding(format!(
                "{} input values for {n} words of dimension {dim}",
                input.len()
            )));
        }
        if output.len() != mode.output_blocks() * n * dim {
            return Err(Error::Embedding(format!(
                "{} output values; expected {} blocks of {n}x{dim}",
                output.len(),
                mode.output_blocks()
            )));
        }
        if !input.iter().chain(&output).all(|x| x.is_finite()) {
            return Err(Error::Embedding("non-finite value".into()));
        }
        Ok(EmbeddingTable {
            vocab,
            dim,
            input,
            output,
            mode,
        })
    }

    /// An imported table from `(word, vector)` rows.
    pub fn from_rows<I>(dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<f32>)>,
    {
        let mut words = Vec::new();
        let mut input = Vec::new();
        for (word, v) in rows {
            if v.len() != dim {
                return Err(Error::Embedding(format!(
                    "vector for `{word}` has {} values, expected {dim}",
                    v.len()
                )));
            }
            words.push(word);
            input.extend(v);
        }
        let counts = vec![0; words.len()];
        let vocab = Vocabulary::from_words(words, counts, 0)?;
        Self::new(vocab, dim, input, Vec::new(), TableMode::Imported)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> TableMode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vector(&self, idx: usize) -> &[f32] {
        &self.input[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.vocab.idx(word).map(|i| self.vector(i as usize))
    }

    pub fn rows(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.vocab
            .words()
            .iter()
            .map(String::as_str)
            .zip(self.input.chunks_exact(self.dim))
    }

    pub fn input_vectors(&self) -> &[f32] {
        &self.input
    }

    pub fn output_blocks(&self) -> usize {
        self.mode.output_blocks()
    }

    /// Output block `b` as a `|V| × dim` row-major slice.
    pub fn output_block(&self, b: usize) -> &[f32] {
        let size = self.vocab.len() * self.dim;
        &self.output[b * size..(b + 1) * size]
    }

    /// Copy without output parameters, as written to a word2vec file.
    pub fn to_imported(&self) -> EmbeddingTable {
        EmbeddingTable {
            vocab: self.vocab.clone(),
            dim: self.dim,
            input: self.input.clone(),
            output: Vec::new(),
            mode: TableMode::Imported,
        }
    }

    pub fn all_finite(&self) -> bool {
        self.input.iter().chain(&self.output).all(|x| x.is_finite())
    }

    /// Digest of words and input vectors.
    pub fn content_digest(&self) -> String {
        let mut fp = Fingerprint::new().part(self.dim.to_le_bytes());
        for (word, v) in self.rows() {
            let bytes: Vec<u8> = v.iter().flat_map(|x| x.to_le_bytes()).collect();
            fp = fp.part(word).part(bytes);
        }
        fp.finish()
    }
}
