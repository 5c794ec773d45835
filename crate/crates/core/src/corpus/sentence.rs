use super::inventory::ClassId;
use crate::{Error, Result};

/// Joins the tokens of a multiword mention into one surface token.
pub const MULTIWORD_JOINER: &str = "_";

/// An entity-linked span `[start, end)` carrying one or more S-classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mention {
    pub start: usize,
    pub end: usize,
    pub entity: String,
    /// Classes in the order they were annotated; never empty, no duplicates.
    pub classes: Vec<ClassId>,
}

impl Mention {
    pub fn width(&self) -> usize {
        self.end - self.start
    }

    /// Classes sorted into inventory order.
    pub fn sorted_classes(&self) -> Vec<ClassId> {
        let mut classes = self.classes.clone();
        classes.sort_unstable();
        classes
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnnotatedSentence {
    pub tokens: Vec<String>,
    pub mentions: Vec<Mention>,
}

impl AnnotatedSentence {
    pub fn new(tokens: Vec<String>, mentions: Vec<Mention>) -> Result<Self> {
        let sentence = AnnotatedSentence { tokens, mentions };
        sentence.validate()?;
        Ok(sentence)
    }

    pub fn is_annotated(&self) -> bool {
        !self.mentions.is_empty()
    }

    /// The span's tokens joined with [`MULTIWORD_JOINER`].
    pub fn surface(&self, mention: &Mention) -> String {
        self.tokens[mention.start..mention.end].join(MULTIWORD_JOINER)
    }

    pub fn validate(&self) -> Result<()> {
        for token in &self.tokens {
            if token.is_empty() || token.chars().any(char::is_whitespace) {
                return Err(Error::Config(format!("invalid token `{token}`")));
            }
        }
        let len = self.tokens.len();
        for m in &self.mentions {
            if m.start >= m.end || m.end > len {
                return Err(Error::SpanOutOfBounds {
                    start: m.start,
                    end: m.end,
                    len,
                });
            }
            if m.classes.is_empty() {
                return Err(Error::Config(format!(
                    "mention [{}, {}) has no classes",
                    m.start, m.end
                )));
            }
            let mut sorted = m.classes.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != m.classes.len() {
                return Err(Error::Config(format!(
                    "mention [{}, {}) repeats a class",
                    m.start, m.end
                )));
            }
        }
        let mut spans: Vec<(usize, usize)> = self.mentions.iter().map(|m| (m.start, m.end)).collect();
        spans.sort_unstable();
        for pair in spans.windows(2) {
            let ((s0, e0), (s1, e1)) = (pair[0], pair[1]);
            if s1 < e0 {
                return Err(Error::OverlappingSpans(s0, e0, s1, e1));
            }
        }
        Ok(())
    }

    /// Mentions ordered by start offset.
    pub fn mentions_in_order(&self) -> Vec<&Mention> {
        let mut mentions: Vec<&Mention> = self.mentions.iter().collect();
        mentions.sort_by_key(|m| m.start);
        mentions
    }
}
