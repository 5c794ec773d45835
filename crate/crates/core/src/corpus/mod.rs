//! Annotated-corpus ingestion and derivation of the word and sense token streams.

mod emit;
mod inventory;
mod io;
mod sentence;

pub use emit::{
    emit_sense_corpus, emit_word_corpus, load_token_corpus, mention_token, save_token_stream,
    sense_token, sense_tokens, word_tokens, write_token_stream, EmitOptions, StreamMode,
    TokenStream,
};
pub use inventory::{ClassId, ClassInventory, DEFAULT_CLASSES};
pub use io::{
    parse_annotated_corpus, read_corpus, save_corpus, sentence_to_json, write_corpus,
    CorpusFormat, CorpusReader,
};
pub use sentence::{AnnotatedSentence, Mention, MULTIWORD_JOINER};
