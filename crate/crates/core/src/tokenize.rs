//! Rule-based sentence and word tokenization, plus the two repairs that make
//! mention boundaries agree with token and sentence boundaries.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::span::Span;

const BUILTIN_ABBREVIATIONS: &str = include_str!("../data/abbreviations_pt.txt");

/// Words that take a trailing period without ending a sentence. Stored
/// lowercase, without the period.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Abbreviations {
    words: BTreeSet<String>,
}

impl Abbreviations {
    /// One abbreviation per line, trailing period optional.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(|l| l.trim().trim_end_matches('.'))
            .filter(|l| !l.is_empty())
            .map(lowercase)
            .collect();
        Abbreviations { words }
    }

    /// The shipped Portuguese list (titles, honorifics, months, company
    /// suffixes, bibliographic abbreviations).
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_ABBREVIATIONS)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// `word` without its trailing period.
    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(&lowercase(word))
    }
}

fn lowercase(s: &str) -> String {
    s.chars().flat_map(char::to_lowercase).collect()
}

/// A sentence with its word tokens, all in text byte offsets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SentenceSpan {
    pub span: Span,
    pub tokens: Vec<Span>,
}

/// Sentence and word segmentation strategy.
///
/// `split_words` receives the mention spans of the sentence; implementations
/// may ignore them, since [`repair_subword`] aligns tokens afterwards.
pub trait Tokenizer {
    fn split_sentences(&self, text: &str) -> Vec<Span>;
    fn split_words(&self, text: &str, sentence: Span, mentions: &[Span]) -> Vec<Span>;
}

/// Deterministic punctuation-and-whitespace tokenizer.
#[derive(Clone, Debug, Default)]
pub struct RuleTokenizer {
    abbreviations: Abbreviations,
}

const TERMINALS: &[char] = &['.', '!', '?', '…'];
const CLOSERS: &[char] = &[')', ']', '}', '"', '\'', '»', '”', '’', ',', ';', ':', '!', '?', '…'];
const OPENERS: &[char] = &['(', '[', '{', '"', '\'', '«', '“', '‘', '¿', '¡'];
const SENTENCE_CLOSERS: &[char] = &[')', ']', '"', '\'', '»', '”', '’'];

impl RuleTokenizer {
    pub fn new(abbreviations: Abbreviations) -> Self {
        RuleTokenizer { abbreviations }
    }

    pub fn abbreviations(&self) -> &Abbreviations {
        &self.abbreviations
    }

    /// True for single-letter initials and listed abbreviations.
    fn takes_period(&self, word: &str) -> bool {
        let mut chars = word.chars();
        let single_letter = matches!((chars.next(), chars.next()), (Some(c), None) if c.is_alphabetic());
        single_letter || self.abbreviations.contains(word)
    }

    /// Whitespace split, then punctuation peeled off both ends of each chunk.
    fn rule_words(&self, text: &str, region: Span, out: &mut Vec<Span>) {
        for chunk in whitespace_chunks(text, region) {
            self.peel(text, chunk, out);
        }
    }

    fn peel(&self, text: &str, chunk: Span, out: &mut Vec<Span>) {
        let mut start = chunk.start;
        let mut end = chunk.end;
        while let Some(c) = text[start..end].chars().next() {
            if !OPENERS.contains(&c) || end - start == c.len_utf8() {
                break;
            }
            out.push(Span::new(start, start + c.len_utf8()));
            start += c.len_utf8();
        }
        let mut trailing = Vec::new();
        while let Some(c) = text[start..end].chars().next_back() {
            let body = &text[start..end];
            if c == '.' {
                let run = body.bytes().rev().take_while(|&b| b == b'.').count();
                if run == body.len() {
                    break;
                }
                if run == 1 && self.takes_period(&body[..body.len() - 1]) {
                    break;
                }
                trailing.push(Span::new(end - run, end));
                end -= run;
            } else if CLOSERS.contains(&c) && body.len() > c.len_utf8() {
                trailing.push(Span::new(end - c.len_utf8(), end));
                end -= c.len_utf8();
            } else {
                break;
            }
        }
        if end > start {
            out.push(Span::new(start, end));
        }
        out.extend(trailing.into_iter().rev());
    }
}

impl Tokenizer for RuleTokenizer {
    /// Breaks at paragraph breaks and after `.`, `!`, `?` or `…` (plus any
    /// closing quotes or brackets) followed by whitespace and an uppercase
    /// letter or digit. A lone period after an abbreviation or a
    /// single-letter initial does not break.
    fn split_sentences(&self, text: &str) -> Vec<Span> {
        let mut out = Vec::new();
        for para in paragraphs(text) {
            let mut seg_start = para.start;
            let mut i = para.start;
            while i < para.end {
                let c = text[i..].chars().next().expect("char boundary");
                if !TERMINALS.contains(&c) {
                    i += c.len_utf8();
                    continue;
                }
                let run_end = i + text[i..para.end]
                    .chars()
                    .take_while(|c| TERMINALS.contains(c))
                    .map(char::len_utf8)
                    .sum::<usize>();
                let close_end = run_end
                    + text[run_end..para.end]
                        .chars()
                        .take_while(|c| SENTENCE_CLOSERS.contains(c))
                        .map(char::len_utf8)
                        .sum::<usize>();
                let ws = text[close_end..para.end]
                    .chars()
                    .take_while(|c| c.is_whitespace())
                    .map(char::len_utf8)
                    .sum::<usize>();
                let next = close_end + ws;
                let starts_sentence = ws > 0
                    && text[next..para.end]
                        .chars()
                        .next()
                        .is_some_and(|n| n.is_uppercase() || n.is_numeric());
                let suppressed = &text[i..run_end] == "." && {
                    let before = &text[seg_start..i];
                    let word = before
                        .rsplit(char::is_whitespace)
                        .next()
                        .unwrap_or("")
                        .trim_start_matches(OPENERS);
                    !word.is_empty() && self.takes_period(word)
                };
                if starts_sentence && !suppressed {
                    push_trimmed(text, Span::new(seg_start, close_end), &mut out);
                    seg_start = next;
                    i = next;
                } else {
                    i = close_end.max(run_end);
                }
            }
            push_trimmed(text, Span::new(seg_start, para.end), &mut out);
        }
        out
    }

    /// Mention regions split on whitespace only; the text between mentions
    /// goes through the punctuation rules.
    fn split_words(&self, text: &str, sentence: Span, mentions: &[Span]) -> Vec<Span> {
        let mut tokens = Vec::new();
        let mut pos = sentence.start;
        for m in mentions {
            let m = Span::new(m.start.max(sentence.start), m.end.min(sentence.end));
            if m.is_empty() || m.end <= pos {
                continue;
            }
            let m_start = m.start.max(pos);
            self.rule_words(text, Span::new(pos, m_start), &mut tokens);
            tokens.extend(whitespace_chunks(text, Span::new(m_start, m.end)));
            pos = m.end;
        }
        self.rule_words(text, Span::new(pos, sentence.end), &mut tokens);
        tokens
    }
}

fn push_trimmed(text: &str, span: Span, out: &mut Vec<Span>) {
    let s = span.slice(text);
    let lead = s.len() - s.trim_start().len();
    if lead == s.len() {
        return;
    }
    let trail = s.len() - s.trim_end().len();
    out.push(Span::new(span.start + lead, span.end - trail));
}

/// Maximal runs of non-whitespace inside `region`.
fn whitespace_chunks(text: &str, region: Span) -> impl Iterator<Item = Span> + '_ {
    let base = region.start;
    let s = region.slice(text);
    let mut iter = s.char_indices().peekable();
    core::iter::from_fn(move || {
        while let Some(&(_, c)) = iter.peek() {
            if !c.is_whitespace() {
                break;
            }
            iter.next();
        }
        let (start, _) = *iter.peek()?;
        let mut end = start;
        while let Some(&(i, c)) = iter.peek() {
            if c.is_whitespace() {
                break;
            }
            end = i + c.len_utf8();
            iter.next();
        }
        Some(Span::new(base + start, base + end))
    })
}

/// Paragraph spans: text separated by a line break followed by an empty (or
/// whitespace-only) line.
fn paragraphs(text: &str) -> Vec<Span> {
    let mut out = Vec::new();
    let bytes = text.as_bytes();
    let mut start = 0;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'\n' {
            let mut j = i + 1;
            while j < bytes.len() && matches!(bytes[j], b' ' | b'\t' | b'\r') {
                j += 1;
            }
            if j < bytes.len() && bytes[j] == b'\n' {
                out.push(Span::new(start, i));
                while j < bytes.len() && bytes[j].is_ascii_whitespace() {
                    j += 1;
                }
                start = j;
                i = j;
                continue;
            }
        }
        i += 1;
    }
    out.push(Span::new(start, text.len()));
    out
}

/// Merges consecutive sentences that a mention crosses, so that every mention
/// ends up inside exactly one sentence. Merging runs of overlapping ranges
/// yields the transitive closure in one pass. `sentences` must be sorted and
/// disjoint; mentions must be sorted by start.
pub fn repair_cross_sentence(sentences: &[Span], mentions: &[Span]) -> Vec<Span> {
    if sentences.is_empty() {
        return Vec::new();
    }
    // join[i]: sentence i merges with sentence i + 1
    let mut join = alloc::vec![false; sentences.len()];
    let mut widened: Vec<Span> = sentences.to_vec();
    for m in mentions {
        let first = sentences.partition_point(|s| s.end <= m.start);
        let after_last = sentences.partition_point(|s| s.start < m.end);
        if first >= sentences.len() || after_last == 0 {
            continue;
        }
        let last = after_last - 1;
        if last < first {
            // mention sits in the gap between two sentences
            continue;
        }
        for j in &mut join[first..last] {
            *j = true;
        }
        widened[first].start = widened[first].start.min(m.start);
        widened[last].end = widened[last].end.max(m.end);
    }
    let mut out: Vec<Span> = Vec::with_capacity(sentences.len());
    let mut current = widened[0];
    for i in 0..sentences.len() {
        if i > 0 {
            if join[i - 1] {
                current.end = widened[i].end.max(current.end);
            } else {
                out.push(current);
                current = widened[i];
            }
        }
    }
    out.push(current);
    out
}

/// Splits tokens that partially overlap a mention at the mention boundary.
/// Adjacent mention-internal pieces where at least one is a split fragment
/// are joined into one mention token; whole tokens are left as they are.
/// Character coverage is unchanged. Both inputs must be sorted.
pub fn repair_subword(tokens: &[Span], mentions: &[Span]) -> Vec<Span> {
    // (piece, is_fragment, owning mention)
    let mut pieces: Vec<(Span, bool, Option<usize>)> = Vec::with_capacity(tokens.len());
    for &t in tokens {
        let lo = mentions.partition_point(|m| m.end <= t.start);
        let hi = mentions.partition_point(|m| m.start < t.end);
        if lo >= hi {
            pieces.push((t, false, None));
            continue;
        }
        if hi - lo == 1 && mentions[lo].contains(&t) {
            pieces.push((t, false, Some(lo)));
            continue;
        }
        let mut cuts: Vec<usize> = Vec::new();
        for m in &mentions[lo..hi] {
            for b in [m.start, m.end] {
                if t.start < b && b < t.end {
                    cuts.push(b);
                }
            }
        }
        cuts.push(t.end);
        let mut from = t.start;
        for cut in cuts {
            if cut > from {
                let piece = Span::new(from, cut);
                let owner = (lo..hi).find(|&k| mentions[k].contains(&piece));
                pieces.push((piece, true, owner));
            }
            from = cut;
        }
    }
    let mut out: Vec<(Span, bool, Option<usize>)> = Vec::with_capacity(pieces.len());
    for p in pieces {
        if let Some(last) = out.last_mut() {
            let same_mention = p.2.is_some() && last.2 == p.2;
            if same_mention && last.0.end == p.0.start && (last.1 || p.1) {
                last.0.end = p.0.end;
                last.1 = true;
                continue;
            }
        }
        out.push(p);
    }
    out.into_iter().map(|(s, _, _)| s).collect()
}

/// Full segmentation of one text: sentences, cross-sentence repair, words,
/// sub-word repair. `mentions` must be sorted and disjoint.
pub fn segment<T: Tokenizer + ?Sized>(tokenizer: &T, text: &str, mentions: &[Span]) -> Vec<SentenceSpan> {
    let sentences = tokenizer.split_sentences(text);
    let sentences = repair_cross_sentence(&sentences, mentions);
    sentences
        .into_iter()
        .map(|span| {
            let lo = mentions.partition_point(|m| m.end <= span.start);
            let hi = mentions.partition_point(|m| m.start < span.end);
            let local = &mentions[lo..hi.max(lo)];
            let words = tokenizer.split_words(text, span, local);
            SentenceSpan {
                span,
                tokens: repair_subword(&words, local),
            }
        })
        .collect()
}
