//! Mentions: exact-match tagging against a [`NameIndex`], and the two merge
//! rules that combine catalog matches, interlink anchors and auxiliary-tagger
//! predictions into one disjoint mention list.

use alloc::vec::Vec;
use core::fmt;

use crate::catalog::{EntityClass, NameIndex};
use crate::span::{CharOffsets, Span};

/// Where a mention came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Origin {
    /// Matched against the catalog (exact name or interlink anchor).
    #[cfg_attr(feature = "serde", serde(rename = "Anot"))]
    Annotated,
    /// Detected by the auxiliary tagger.
    #[cfg_attr(feature = "serde", serde(rename = "Pred"))]
    Predicted,
}

impl Origin {
    pub const fn code(self) -> &'static str {
        match self {
            Origin::Annotated => "Anot",
            Origin::Predicted => "Pred",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "Anot" => Some(Origin::Annotated),
            "Pred" => Some(Origin::Predicted),
            _ => None,
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mention {
    pub span: Span,
    pub class: EntityClass,
    pub origin: Origin,
}

impl Mention {
    pub const fn new(span: Span, class: EntityClass, origin: Origin) -> Self {
        Mention { span, class, origin }
    }

    pub const fn annotated(start: usize, end: usize, class: EntityClass) -> Self {
        Mention::new(Span::new(start, end), class, Origin::Annotated)
    }

    pub const fn predicted(start: usize, end: usize, class: EntityClass) -> Self {
        Mention::new(Span::new(start, end), class, Origin::Predicted)
    }
}

#[inline]
fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Leftmost-longest exact matching of indexed names in `text`.
///
/// Scanning goes left to right over positions preceded by a non-word
/// character (or the text start). At each such position the longest name
/// whose end is followed by a non-word character (or the text end) wins, and
/// scanning resumes after it.
pub fn match_mentions(text: &str, index: &NameIndex) -> Vec<Mention> {
    let mut found = Vec::new();
    if index.is_empty() {
        return found;
    }
    let mut resume = 0usize;
    let mut prev: Option<char> = None;
    for (i, c) in text.char_indices() {
        let left_ok = prev.is_none_or(|p| !is_word_char(p));
        prev = Some(c);
        if i < resume || !left_ok {
            continue;
        }
        let mut best = None;
        index.for_each_prefix_match(text, i, |end, entry| {
            let right_ok = text[end..].chars().next().is_none_or(|n| !is_word_char(n));
            if right_ok {
                best = Some((end, entry.class));
            }
        });
        if let Some((end, class)) = best {
            found.push(Mention::new(Span::new(i, end), class, Origin::Annotated));
            resume = end;
        }
    }
    found
}

/// `primary` plus every `secondary` mention that overlaps none of them,
/// sorted by start. Both inputs must be internally disjoint.
fn overlay(primary: Vec<Mention>, secondary: Vec<Mention>) -> Vec<Mention> {
    let mut primary = primary;
    primary.sort_by_key(|m| m.span);
    let mut out = Vec::with_capacity(primary.len() + secondary.len());
    let mut kept: Vec<Mention> = secondary
        .into_iter()
        .filter(|s| {
            // first primary that ends after s starts
            let j = primary.partition_point(|p| p.span.end <= s.span.start);
            primary.get(j).is_none_or(|p| !p.span.overlaps(&s.span))
        })
        .collect();
    out.append(&mut primary);
    out.append(&mut kept);
    out.sort_by_key(|m| m.span);
    out
}

/// Unions exact matches with interlink-anchor mentions. On overlap the anchor
/// mention wins, since a person placed it.
pub fn merge_annotated(exact: Vec<Mention>, anchors: Vec<Mention>) -> Vec<Mention> {
    overlay(anchors, exact)
}

/// Adds predicted mentions that do not overlap any annotated mention; a
/// conflicting prediction is discarded entirely.
pub fn merge_predicted(annotated: Vec<Mention>, predicted: Vec<Mention>) -> Vec<Mention> {
    overlay(annotated, predicted)
}

/// One entity as reported by the auxiliary tagger, offsets in Unicode scalar
/// values.
#[derive(Clone, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RawEntity {
    pub start: usize,
    pub end: usize,
    pub class: alloc::string::String,
}

/// Why a reported entity was dropped.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PredictionDrops {
    pub out_of_bounds: usize,
    pub unknown_class: usize,
    /// Empty, or only whitespace.
    pub empty: usize,
    /// Overlapping an earlier kept prediction.
    pub overlapping: usize,
}

impl PredictionDrops {
    pub fn total(&self) -> usize {
        self.out_of_bounds + self.unknown_class + self.empty + self.overlapping
    }
}

/// Validates auxiliary-tagger output against `text` and converts it to
/// [`Origin::Predicted`] mentions in byte offsets. Spans are trimmed of
/// surrounding whitespace; the result is sorted and disjoint.
pub fn predicted_mentions(text: &str, entities: &[RawEntity]) -> (Vec<Mention>, PredictionDrops) {
    let offsets = CharOffsets::new(text);
    let mut drops = PredictionDrops::default();
    let mut candidates = Vec::with_capacity(entities.len());
    for e in entities {
        let Some(class) = EntityClass::from_code(&e.class) else {
            drops.unknown_class += 1;
            continue;
        };
        if e.start >= e.end {
            drops.empty += 1;
            continue;
        }
        let Some(span) = offsets.span_to_bytes(e.start, e.end) else {
            drops.out_of_bounds += 1;
            continue;
        };
        let s = span.slice(text);
        let lead = s.len() - s.trim_start().len();
        if lead == s.len() {
            drops.empty += 1;
            continue;
        }
        let trail = s.len() - s.trim_end().len();
        let span = Span::new(span.start + lead, span.end - trail);
        candidates.push(Mention::new(span, class, Origin::Predicted));
    }
    candidates.sort_by_key(|m| m.span);
    let mut out: Vec<Mention> = Vec::with_capacity(candidates.len());
    for m in candidates {
        if out.last().is_some_and(|p| p.span.overlaps(&m.span)) {
            drops.overlapping += 1;
        } else {
            out.push(m);
        }
    }
    (out, drops)
}
