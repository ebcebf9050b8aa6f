//! The BIO corpus text format and the annotated-sentence filter.
//!
//! One line per token: `token TAB tag`, optionally followed by `TAB origin`
//! (`Anot` or `Pred`) on entity tokens. A blank line ends every sentence, so
//! a non-empty file ends in `\n\n` and an empty corpus is an empty file.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};

use crate::bio::{BioTag, TaggedSentence, TaggedToken};
use crate::mention::Origin;

/// Keeps the sentences that contain at least one annotated token.
pub fn filter_annotated(sentences: Vec<TaggedSentence>) -> Vec<TaggedSentence> {
    sentences.into_iter().filter(|s| s.has_annotated()).collect()
}

/// Appends one sentence in corpus format (including its terminating blank
/// line) to `out`.
pub fn format_sentence<W: Write>(sentence: &TaggedSentence, with_origin: bool, out: &mut W) -> fmt::Result {
    for t in &sentence.tokens {
        match (with_origin, t.origin) {
            (true, Some(origin)) if !t.tag.is_outside() => writeln!(out, "{}\t{}\t{}", t.text, t.tag, origin)?,
            _ => writeln!(out, "{}\t{}", t.text, t.tag)?,
        }
    }
    out.write_char('\n')
}

struct Counting<'a, W> {
    inner: &'a mut W,
    bytes: usize,
}

impl<W: Write> Write for Counting<'_, W> {
    fn write_str(&mut self, s: &str) -> fmt::Result {
        self.bytes += s.len();
        self.inner.write_str(s)
    }
}

/// Writes all sentences and returns the number of bytes written.
pub fn write_corpus<W: Write>(
    sentences: &[TaggedSentence],
    with_origin: bool,
    sink: &mut W,
) -> Result<usize, fmt::Error> {
    let mut w = Counting { inner: sink, bytes: 0 };
    for s in sentences {
        format_sentence(s, with_origin, &mut w)?;
    }
    Ok(w.bytes)
}

/// Corpus format as a string.
pub fn corpus_to_string(sentences: &[TaggedSentence], with_origin: bool) -> String {
    let mut s = String::new();
    write_corpus(sentences, with_origin, &mut s).expect("writing to a String cannot fail");
    s
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CorpusErrorKind {
    #[error("expected `token<TAB>tag[<TAB>origin]`")]
    MissingTag,
    #[error("too many columns")]
    ExtraColumns,
    #[error("empty token")]
    EmptyToken,
    #[error("unknown tag {0:?}")]
    UnknownTag(String),
    #[error("unknown origin {0:?} (expected Anot or Pred)")]
    UnknownOrigin(String),
    #[error("origin given on an O token")]
    OriginOnOutside,
    #[error("{0} does not continue an entity of the same class")]
    OrphanInside(String),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct CorpusError {
    /// 1-based.
    pub line: usize,
    pub kind: CorpusErrorKind,
}

/// Line-at-a-time corpus reader, usable on streams of any size.
#[derive(Debug, Default)]
pub struct CorpusParser {
    current: Vec<TaggedToken>,
    line: usize,
}

impl CorpusParser {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of lines consumed so far.
    pub fn line(&self) -> usize {
        self.line
    }

    /// Feeds one line (without its newline). Returns a sentence when the line
    /// is the blank line that completes one.
    pub fn push_line(&mut self, line: &str) -> Result<Option<TaggedSentence>, CorpusError> {
        self.line += 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            return Ok(self.take());
        }
        let err = |kind| CorpusError { line: self.line, kind };
        let mut cols = line.split('\t');
        let text = cols.next().unwrap_or_default();
        let tag_str = cols.next().ok_or_else(|| err(CorpusErrorKind::MissingTag))?;
        let origin_str = cols.next();
        if cols.next().is_some() {
            return Err(err(CorpusErrorKind::ExtraColumns));
        }
        if text.is_empty() {
            return Err(err(CorpusErrorKind::EmptyToken));
        }
        let tag: BioTag = tag_str
            .parse()
            .map_err(|_| err(CorpusErrorKind::UnknownTag(tag_str.into())))?;
        let origin = match origin_str {
            None => None,
            Some(o) => Some(Origin::from_code(o).ok_or_else(|| err(CorpusErrorKind::UnknownOrigin(o.into())))?),
        };
        if origin.is_some() && tag.is_outside() {
            return Err(err(CorpusErrorKind::OriginOnOutside));
        }
        if !tag.may_follow(self.current.last().map(|t| t.tag)) {
            return Err(err(CorpusErrorKind::OrphanInside(tag_str.into())));
        }
        self.current.push(TaggedToken::new(text, tag, origin));
        Ok(None)
    }

    /// Flushes a final sentence that lacked its blank line.
    pub fn finish(&mut self) -> Option<TaggedSentence> {
        self.take()
    }

    fn take(&mut self) -> Option<TaggedSentence> {
        (!self.current.is_empty()).then(|| TaggedSentence {
            tokens: core::mem::take(&mut self.current),
        })
    }
}

/// Parses a whole corpus held in memory.
pub fn read_corpus(source: &str) -> Result<Vec<TaggedSentence>, CorpusError> {
    let mut parser = CorpusParser::new();
    let mut out = Vec::new();
    for line in source.split('\n') {
        if let Some(s) = parser.push_line(line)? {
            out.push(s);
        }
    }
    out.extend(parser.finish());
    Ok(out)
}
