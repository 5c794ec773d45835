use std::borrow::Borrow;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::inventory::ClassInventory;
use super::sentence::AnnotatedSentence;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StreamMode {
    /// Mentions become `@surface@`.
    Word,
    /// Mentions become `@surface@-<class>`, one token per class.
    Sense,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmitOptions {
    pub lowercase: bool,
    /// Drop sentences without any mention.
    pub annotated_only: bool,
}

impl Default for EmitOptions {
    fn default() -> Self {
        EmitOptions {
            lowercase: true,
            annotated_only: true,
        }
    }
}

/// `@surface@`, lowercased after wrapping when requested.
pub fn mention_token(surface: &str, lowercase: bool) -> String {
    let token = format!("@{surface}@");
    if lowercase {
        token.to_lowercase()
    } else {
        token
    }
}

/// The word/S-class token for an `@`-wrapped word, e.g. `@apple@-food`.
pub fn sense_token(word: &str, class_name: &str) -> String {
    format!("{word}-{class_name}")
}

fn plain(token: &str, lowercase: bool) -> String {
    if lowercase {
        token.to_lowercase()
    } else {
        token.to_string()
    }
}

fn emit_sentence(
    sentence: &AnnotatedSentence,
    lowercase: bool,
    mut on_mention: impl FnMut(&mut Vec<String>, &super::Mention, String),
) -> Vec<String> {
    let mentions = sentence.mentions_in_order();
    let mut out = Vec::with_capacity(sentence.tokens.len());
    let mut next = mentions.iter().peekable();
    let mut i = 0;
    while i < sentence.tokens.len() {
        match next.peek() {
            Some(m) if m.start == i => {
                let word = mention_token(&sentence.surface(m), lowercase);
                on_mention(&mut out, m, word);
                i = m.end;
                next.next();
            }
            _ => {
                out.push(plain(&sentence.tokens[i], lowercase));
                i += 1;
            }
        }
    }
    out
}

/// Word-corpus tokens of one sentence.
pub fn word_tokens(sentence: &AnnotatedSentence, lowercase: bool) -> Vec<String> {
    emit_sentence(sentence, lowercase, |out, _, word| out.push(word))
}

/// Sense-corpus tokens of one sentence; multi-class mentions expand to one
/// adjacent token per class, in inventory order.
pub fn sense_tokens(
    sentence: &AnnotatedSentence,
    inventory: &ClassInventory,
    lowercase: bool,
) -> Vec<String> {
    emit_sentence(sentence, lowercase, |out, m, word| {
        for class in m.sorted_classes() {
            out.push(sense_token(&word, inventory.name(class)));
        }
    })
}

/// A lazily produced sequence of tokenized sentences.
pub struct TokenStream<I> {
    mode: StreamMode,
    sentences: I,
}

impl<I> TokenStream<I> {
    pub fn mode(&self) -> StreamMode {
        self.mode
    }
}

impl<I: Iterator<Item = Vec<String>>> Iterator for TokenStream<I> {
    type Item = Vec<String>;

    fn next(&mut self) -> Option<Vec<String>> {
        self.sentences.next()
    }
}

pub fn emit_word_corpus<I, S>(
    sentences: I,
    options: EmitOptions,
) -> TokenStream<impl Iterator<Item = Vec<String>>>
where
    I: IntoIterator<Item = S>,
    S: Borrow<AnnotatedSentence>,
{
    TokenStream {
        mode: StreamMode::Word,
        sentences: sentences
            .into_iter()
            .filter(move |s| !options.annotated_only || s.borrow().is_annotated())
            .map(move |s| word_tokens(s.borrow(), options.lowercase)),
    }
}

pub fn emit_sense_corpus<'a, I, S>(
    sentences: I,
    inventory: &'a ClassInventory,
    options: EmitOptions,
) -> TokenStream<impl Iterator<Item = Vec<String>> + 'a>
where
    I: IntoIterator<Item = S>,
    I::IntoIter: 'a,
    S: Borrow<AnnotatedSentence>,
{
    TokenStream {
        mode: StreamMode::Sense,
        sentences: sentences
            .into_iter()
            .filter(move |s| !options.annotated_only || s.borrow().is_annotated())
            .map(move |s| sense_tokens(s.borrow(), inventory, options.lowercase)),
    }
}

/// Writes one space-separated sentence per line.
pub fn write_token_stream<W, I>(mut out: W, stream: I) -> Result<usize>
where
    W: Write,
    I: IntoIterator<Item = Vec<String>>,
{
    let mut n = 0;
    for sentence in stream {
        writeln!(out, "{}", sentence.join(" "))?;
        n += 1;
    }
    out.flush()?;
    Ok(n)
}

pub fn save_token_stream<I>(path: impl AsRef<Path>, stream: I) -> Result<usize>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_token_stream(BufWriter::new(file), stream)
}

/// Reads a token corpus written by [`write_token_stream`]; each line is one sentence.
pub fn load_token_corpus(path: impl AsRef<Path>) -> Result<Vec<Vec<String>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut sentences = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let tokens: Vec<String> = line.split_whitespace().map(String::from).collect();
        if !tokens.is_empty() {
            sentences.push(tokens);
        }
    }
    Ok(sentences)
}
