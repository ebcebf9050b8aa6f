//! BIO tags and projection of mentions onto tokenized sentences.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::catalog::EntityClass;
use crate::mention::{Mention, Origin};
use crate::span::Span;
use crate::tokenize::SentenceSpan;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BioTag {
    Outside,
    Begin(EntityClass),
    Inside(EntityClass),
}

impl BioTag {
    pub const fn class(self) -> Option<EntityClass> {
        match self {
            BioTag::Outside => None,
            BioTag::Begin(c) | BioTag::Inside(c) => Some(c),
        }
    }

    pub const fn is_outside(self) -> bool {
        matches!(self, BioTag::Outside)
    }

    /// Whether `self` may directly follow `prev` (`None` at sentence start).
    pub fn may_follow(self, prev: Option<BioTag>) -> bool {
        match self {
            BioTag::Inside(c) => matches!(prev, Some(BioTag::Begin(p) | BioTag::Inside(p)) if p == c),
            _ => true,
        }
    }
}

impl fmt::Display for BioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BioTag::Outside => f.write_str("O"),
            BioTag::Begin(c) => write!(f, "B-{c}"),
            BioTag::Inside(c) => write!(f, "I-{c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown BIO tag {0:?}")]
pub struct UnknownTag(pub String);

impl FromStr for BioTag {
    type Err = UnknownTag;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "O" {
            return Ok(BioTag::Outside);
        }
        let bad = || UnknownTag(String::from(s));
        let (prefix, class) = s.split_once('-').ok_or_else(bad)?;
        let class = EntityClass::from_code(class).ok_or_else(bad)?;
        match prefix {
            "B" => Ok(BioTag::Begin(class)),
            "I" => Ok(BioTag::Inside(class)),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaggedToken {
    pub text: String,
    pub tag: BioTag,
    /// Set on entity tokens of generated corpora; absent on `O` tokens and
    /// on corpora read without an origin column.
    pub origin: Option<Origin>,
}

impl TaggedToken {
    pub fn new(text: impl Into<String>, tag: BioTag, origin: Option<Origin>) -> Self {
        TaggedToken {
            text: text.into(),
            tag,
            origin,
        }
    }
}

/// One corpus sentence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TaggedSentence {
    pub tokens: Vec<TaggedToken>,
}

impl TaggedSentence {
    /// Every `I-X` directly follows `B-X` or `I-X`.
    pub fn is_well_formed(&self) -> bool {
        let mut prev = None;
        for t in &self.tokens {
            if !t.tag.may_follow(prev) {
                return false;
            }
            prev = Some(t.tag);
        }
        true
    }

    pub fn has_annotated(&self) -> bool {
        self.tokens.iter().any(|t| t.origin == Some(Origin::Annotated))
    }

    /// Entity chunks as `(first token, one past last token, class)`. An `I-X`
    /// that cannot continue the previous token starts a new chunk.
    pub fn entities(&self) -> Vec<(usize, usize, EntityClass)> {
        let mut out: Vec<(usize, usize, EntityClass)> = Vec::new();
        let mut prev = None;
        for (i, t) in self.tokens.iter().enumerate() {
            match t.tag {
                BioTag::Outside => {}
                BioTag::Inside(_) if t.tag.may_follow(prev) => {
                    if let Some(last) = out.last_mut() {
                        last.1 = i + 1;
                    }
                }
                BioTag::Begin(c) | BioTag::Inside(c) => out.push((i, i + 1, c)),
            }
            prev = Some(t.tag);
        }
        out
    }

    /// Same sentence with origins removed.
    pub fn without_origin(&self) -> TaggedSentence {
        TaggedSentence {
            tokens: self
                .tokens
                .iter()
                .map(|t| TaggedToken::new(t.text.clone(), t.tag, None))
                .collect(),
        }
    }
}

/// A mention whose boundaries do not coincide with token boundaries of a
/// single sentence. Upstream repairs rule this out, so it signals a bug.
#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("mention {span} is not aligned to the tokens of one sentence")]
pub struct AlignmentError {
    pub span: Span,
}

/// Tags the first token of each mention `B-X`, the following ones `I-X`, and
/// every other token `O`, carrying the mention origin.
pub fn project_bio(
    text: &str,
    sentences: &[SentenceSpan],
    mentions: &[Mention],
) -> Result<Vec<TaggedSentence>, AlignmentError> {
    let mut used = 0usize;
    let mut out = Vec::with_capacity(sentences.len());
    for sentence in sentences {
        let mut tags: Vec<(BioTag, Option<Origin>)> = alloc::vec![(BioTag::Outside, None); sentence.tokens.len()];
        let lo = mentions.partition_point(|m| m.span.end <= sentence.span.start);
        let hi = mentions.partition_point(|m| m.span.start < sentence.span.end);
        for m in &mentions[lo..hi.max(lo)] {
            let err = AlignmentError { span: m.span };
            if !sentence.span.contains(&m.span) {
                return Err(err);
            }
            let first = sentence
                .tokens
                .binary_search_by_key(&m.span.start, |t| t.start)
                .map_err(|_| err)?;
            let mut k = first;
            loop {
                let t = sentence.tokens.get(k).ok_or(err)?;
                if t.end > m.span.end {
                    return Err(err);
                }
                let tag = if k == first {
                    BioTag::Begin(m.class)
                } else {
                    BioTag::Inside(m.class)
                };
                tags[k] = (tag, Some(m.origin));
                k += 1;
                if t.end == m.span.end {
                    break;
                }
            }
            used += 1;
        }
        out.push(TaggedSentence {
            tokens: sentence
                .tokens
                .iter()
                .zip(tags)
                .map(|(span, (tag, origin))| TaggedToken::new(span.slice(text), tag, origin))
                .collect(),
        });
    }
    if used != mentions.len() {
        // some mention fell between sentences
        let covered = |m: &Mention| sentences.iter().any(|s| s.span.contains(&m.span));
        if let Some(m) = mentions.iter().find(|m| !covered(m)) {
            return Err(AlignmentError { span: m.span });
        }
    }
    Ok(out)
}
