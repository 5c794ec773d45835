//! SkipGram / Structured SkipGram training with negative sampling, and the
//! word2vec file formats.

mod hogwild;
mod io;
mod sampler;
mod sgns;
mod table;
mod train;
mod vocab;

pub use io::{
    load_embeddings, read_word2vec_binary, read_word2vec_text, save_embeddings,
    write_word2vec_binary, write_word2vec_text,
};
pub use sampler::{NegativeSampler, UNIGRAM_POWER};
pub use sgns::{dot, pair_loss, sgns_pair_update, sigmoid};
pub use table::{EmbeddingTable, TableMode};
pub use train::{train_embeddings, TrainConfig, TrainMode, TrainStats};
pub use vocab::{build_vocab, Vocabulary};

/// Cosine similarity; `None` when either vector is zero.
pub fn cosine(a: &[f32], b: &[f32]) -> Option<f64> {
    let (mut ab, mut aa, mut bb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (f64::from(x), f64::from(y));
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    (aa > 0.0 && bb > 0.0).then(|| ab / (aa.sqrt() * bb.sqrt()))
}
