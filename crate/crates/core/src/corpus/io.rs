//! JSONL and BIO-style TSV corpus formats.
//!
//! JSONL: one object per line,
//! `{"tokens":[...],"mentions":[{"span":[s,e],"entity":"...","classes":[...]}]}`.
//!
//! TSV: `token<TAB>tag` per line with a blank line after every sentence. Tags
//! are `O`, `B-<classes>` or `I-<classes>`; a mention carrying several classes
//! joins them with `|`. TSV has no entity ids, so the joined surface is used.

use std::fs::File;
use std::io::{BufRead, BufReader, Lines, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::inventory::{ClassId, ClassInventory};
use super::sentence::{AnnotatedSentence, Mention};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Jsonl,
    Tsv,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "tsv" => Ok(CorpusFormat::Tsv),
            other => Err(Error::Config(format!("unknown corpus format `{other}`"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawSentence {
    tokens: Vec<String>,
    #[serde(default)]
    mentions: Vec<RawMention>,
}

#[derive(Serialize, Deserialize)]
struct RawMention {
    span: [usize; 2],
    entity: String,
    classes: Vec<String>,
}

/// Streaming reader yielding sentences in file order.
pub struct CorpusReader<R> {
    lines: Lines<R>,
    line_no: usize,
    format: CorpusFormat,
    inventory: ClassInventory,
}

/// Opens `path` and returns a lazy sentence stream.
pub fn parse_annotated_corpus(
    path: impl AsRef<Path>,
    format: CorpusFormat,
    inventory: &ClassInventory,
) -> Result<CorpusReader<BufReader<File>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(CorpusReader::new(BufReader::new(file), format, inventory.clone()))
}

/// Reads a whole corpus into memory.
pub fn read_corpus(
    path: impl AsRef<Path>,
    format: CorpusFormat,
    inventory: &ClassInventory,
) -> Result<Vec<AnnotatedSentence>> {
    parse_annotated_corpus(path, format, inventory)?.collect()
}

impl<R: BufRead> CorpusReader<R> {
    pub fn new(reader: R, format: CorpusFormat, inventory: ClassInventory) -> Self {
        CorpusReader {
            lines: reader.lines(),
            line_no: 0,
            format,
            inventory,
        }
    }

    fn next_line(&mut self) -> Option<Result<String>> {
        let line = self.lines.next()?;
        self.line_no += 1;
        Some(line.map_err(Error::from))
    }

    fn at_line(&self, line: usize, err: Error) -> Error {
        match err {
            Error::Record { .. } | Error::Parse { .. } => err,
            other => Error::Record {
                line,
                source: Box::new(other),
            },
        }
    }

    fn next_jsonl(&mut self) -> Option<Result<AnnotatedSentence>> {
        loop {
            let line = match self.next_line()? {
                Ok(line) => line,
                Err(e) => return Some(Err(e)),
            };
            if line.trim().is_empty() {
                continue;
            }
            let line_no = self.line_no;
            let result = serde_json::from_str::<RawSentence>(&line)
                .map_err(|e| Error::parse(line_no, format!("malformed record: {e}")))
                .and_then(|raw| self.resolve(raw))
                .map_err(|e| self.at_line(line_no, e));
            return Some(result);
        }
    }

    fn resolve(&self, raw: RawSentence) -> Result<AnnotatedSentence> {
        let mentions = raw
            .mentions
            .into_iter()
            .map(|m| {
                let classes = m
                    .classes
                    .iter()
                    .map(|c| self.inventory.id(c))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Mention {
                    start: m.span[0],
                    end: m.span[1],
                    entity: m.entity,
                    classes,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        AnnotatedSentence::new(raw.tokens, mentions)
    }

    fn next_tsv(&mut self) -> Option<Result<AnnotatedSentence>> {
        let mut tokens = Vec::new();
        let mut mentions: Vec<Mention> = Vec::new();
        let mut first_line = 0;
        let mut open = false;
        loop {
            let line = match self.next_line() {
                None if tokens.is_empty() => return None,
                None => break,
                Some(Err(e)) => return Some(Err(e)),
                Some(Ok(line)) => line,
            };
            let line_no = self.line_no;
            if line.trim().is_empty() {
                if tokens.is_empty() {
                    continue;
                }
                break;
            }
            if tokens.is_empty() {
                first_line = line_no;
            }
            let Some((token, tag)) = line.split_once('\t') else {
                return Some(Err(Error::parse(line_no, "expected `token<TAB>tag`")));
            };
            let idx = tokens.len();
            tokens.push(token.to_string());
            if tag == "O" {
                open = false;
                continue;
            }
            let (prefix, names) = match tag.split_once('-') {
                Some((p @ ("B" | "I"), names)) if !names.is_empty() => (p, names),
                _ => return Some(Err(Error::parse(line_no, format!("malformed tag `{tag}`")))),
            };
            let classes = match names
                .split('|')
                .map(|c| self.inventory.id(c))
                .collect::<Result<Vec<ClassId>>>()
            {
                Ok(c) => c,
                Err(e) => return Some(Err(self.at_line(line_no, e))),
            };
            if prefix == "I" {
                match mentions.last_mut() {
                    Some(m) if open && m.classes == classes => {
                        m.end = idx + 1;
                        continue;
                    }
                    _ => {
                        return Some(Err(Error::parse(
                            line_no,
                            format!("`{tag}` does not continue a mention"),
                        )))
                    }
                }
            }
            open = true;
            mentions.push(Mention {
                start: idx,
                end: idx + 1,
                entity: String::new(),
                classes,
            });
        }
        for m in &mut mentions {
            m.entity = tokens[m.start..m.end].join(super::sentence::MULTIWORD_JOINER);
        }
        Some(AnnotatedSentence::new(tokens, mentions).map_err(|e| self.at_line(first_line, e)))
    }
}

impl<R: BufRead> Iterator for CorpusReader<R> {
    type Item = Result<AnnotatedSentence>;

    fn next(&mut self) -> Option<Self::Item> {
        match self.format {
            CorpusFormat::Jsonl => self.next_jsonl(),
            CorpusFormat::Tsv => self.next_tsv(),
        }
    }
}

/// Canonical JSONL serialization of one sentence (no trailing newline).
pub fn sentence_to_json(sentence: &AnnotatedSentence, inventory: &ClassInventory) -> String {
    let raw = RawSentence {
        tokens: sentence.tokens.clone(),
        mentions: sentence
            .mentions
            .iter()
            .map(|m| RawMention {
                span: [m.start, m.end],
                entity: m.entity.clone(),
                classes: m.classes.iter().map(|&c| inventory.name(c).to_string()).collect(),
            })
            .collect(),
    };
    serde_json::to_string(&raw).expect("sentence serializes")
}

pub fn write_corpus<'a, W, I>(
    mut out: W,
    sentences: I,
    format: CorpusFormat,
    inventory: &ClassInventory,
) -> Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a AnnotatedSentence>,
{
    for sentence in sentences {
        match format {
            CorpusFormat::Jsonl => writeln!(out, "{}", sentence_to_json(sentence, inventory))?,
            CorpusFormat::Tsv => write_tsv_sentence(&mut out, sentence, inventory)?,
        }
    }
    out.flush()?;
    Ok(())
}

fn write_tsv_sentence<W: Write>(
    out: &mut W,
    sentence: &AnnotatedSentence,
    inventory: &ClassInventory,
) -> Result<()> {
    let mut tags = vec![String::from("O"); sentence.tokens.len()];
    for m in &sentence.mentions {
        let names: Vec<&str> = m.classes.iter().map(|&c| inventory.name(c)).collect();
        let names = names.join("|");
        for (i, tag) in tags.iter_mut().enumerate().take(m.end).skip(m.start) {
            let prefix = if i == m.start { "B" } else { "I" };
            *tag = format!("{prefix}-{names}");
        }
    }
    for (token, tag) in sentence.tokens.iter().zip(&tags) {
        writeln!(out, "{token}\t{tag}")?;
    }
    writeln!(out)?;
    Ok(())
}

pub fn save_corpus(
    path: impl AsRef<Path>,
    sentences: &[AnnotatedSentence],
    format: CorpusFormat,
    inventory: &ClassInventory,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_corpus(std::io::BufWriter::new(file), sentences, format, inventory)
}
