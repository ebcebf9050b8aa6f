use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

/// Half-open byte interval `[start, end)` into a UTF-8 string.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    #[inline]
    pub const fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    #[inline]
    pub const fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    #[inline]
    pub const fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// True when the two intervals share at least one byte.
    #[inline]
    pub const fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }

    #[inline]
    pub const fn contains(&self, other: &Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    #[inline]
    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }

    pub fn slice<'a>(&self, text: &'a str) -> &'a str {
        &text[self.start..self.end]
    }

    pub const fn shifted(&self, by: usize) -> Span {
        Span::new(self.start + by, self.end + by)
    }
}

impl From<Range<usize>> for Span {
    fn from(r: Range<usize>) -> Self {
        Span::new(r.start, r.end)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{})", self.start, self.end)
    }
}

/// Checks that spans are non-empty, sorted by start and pairwise disjoint.
pub fn is_sorted_disjoint<'a, I>(spans: I) -> bool
where
    I: IntoIterator<Item = &'a Span>,
{
    let mut prev_end = 0usize;
    let mut first = true;
    for s in spans {
        if s.is_empty() || (!first && s.start < prev_end) {
            return false;
        }
        prev_end = s.end;
        first = false;
    }
    true
}

/// Translation table between byte offsets and Unicode scalar offsets for one
/// string.
#[derive(Clone, Debug)]
pub struct CharOffsets {
    // byte offset of every char, plus the total length as a sentinel
    starts: Vec<usize>,
}

impl CharOffsets {
    pub fn new(text: &str) -> Self {
        let mut starts: Vec<usize> = text.char_indices().map(|(i, _)| i).collect();
        starts.push(text.len());
        CharOffsets { starts }
    }

    /// Number of chars in the text.
    pub fn char_len(&self) -> usize {
        self.starts.len() - 1
    }

    /// Byte offset of char offset `c`, `None` when past the end.
    pub fn to_byte(&self, c: usize) -> Option<usize> {
        self.starts.get(c).copied()
    }

    /// Char offset of byte offset `b`, `None` when `b` is not a char boundary.
    pub fn to_char(&self, b: usize) -> Option<usize> {
        self.starts.binary_search(&b).ok()
    }

    pub fn span_to_bytes(&self, start: usize, end: usize) -> Option<Span> {
        Some(Span::new(self.to_byte(start)?, self.to_byte(end)?))
    }

    pub fn span_to_chars(&self, span: Span) -> Option<(usize, usize)> {
        Some((self.to_char(span.start)?, self.to_char(span.end)?))
    }
}
