//! Dump-level article record and interlink extraction from wikitext.

use alloc::string::String;
use alloc::vec::Vec;

use crate::span::Span;

/// One main-namespace page of a dump.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Article {
    pub id: u64,
    pub title: String,
    pub wikitext: String,
}

/// An internal link as it appears in the source wikitext.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interlink {
    /// Link target with any `#section` suffix removed.
    pub target: String,
    /// Text the link renders as.
    pub anchor: String,
    /// Location of `anchor` in the source.
    pub span: Span,
    /// Location of the whole `[[...]]` construct.
    pub markup: Span,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InterlinkScan {
    pub links: Vec<Interlink>,
    /// `[[` openings without a matching `]]`.
    pub malformed: usize,
}

/// What a `[[...]]` construct points at.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkKind {
    /// Link to a main-namespace article.
    Article,
    /// Same-page section link such as `[[#History|history]]`.
    SamePage,
    /// File, category, interwiki and other namespaced links. `visible` is true
    /// for the leading-colon form (`[[:Category:X]]`), which renders as text.
    Namespaced { visible: bool },
}

/// A parsed `[[...]]` construct with byte offsets into the source.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LinkMarkup {
    pub kind: LinkKind,
    pub markup: Span,
    /// Target text, trimmed, leading colon and `#fragment` removed.
    pub target: Span,
    /// Displayed text (after the first pipe, or the raw target), trimmed.
    /// Empty for the pipe trick (`[[Target|]]`).
    pub anchor: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkParse {
    Link(LinkMarkup),
    Unterminated,
}

const NAMESPACES: &[&str] = &[
    "anexo",
    "arquivo",
    "ajuda",
    "categoria",
    "category",
    "commons",
    "especial",
    "ficheiro",
    "file",
    "help",
    "image",
    "imagem",
    "media",
    "mediawiki",
    "módulo",
    "module",
    "portal",
    "predefinição",
    "special",
    "talk",
    "template",
    "user",
    "usuário",
    "utilizador",
    "wikipedia",
    "wikipédia",
    "wikt",
    "wiktionary",
    "wp",
];

fn is_namespace_prefix(prefix: &str) -> bool {
    let p = prefix.trim();
    if p.is_empty() {
        return false;
    }
    // interlanguage / interwiki codes such as "en", "pt", "zh-yue"
    let lang_like = p.len() <= 12
        && p.bytes().next().is_some_and(|b| b.is_ascii_lowercase())
        && p.bytes().all(|b| b.is_ascii_lowercase() || b == b'-')
        && p.split('-').next().is_some_and(|head| (2..=3).contains(&head.len()));
    if lang_like {
        return true;
    }
    NAMESPACES
        .iter()
        .any(|ns| p.len() == ns.len() && p.chars().flat_map(char::to_lowercase).eq(ns.chars()))
}

fn trim_span(src: &str, span: Span) -> Span {
    let s = span.slice(src);
    let lead = s.len() - s.trim_start().len();
    let trail = s.len() - s.trim_end().len();
    if lead == s.len() {
        return Span::new(span.start, span.start);
    }
    Span::new(span.start + lead, span.end - trail)
}

/// Finds the `]]` closing the `[[` at `open`, honouring nested links.
/// Returns the byte offset of the closing brackets.
fn find_link_close(src: &str, open: usize) -> Option<usize> {
    let b = src.as_bytes();
    let mut depth = 0usize;
    let mut i = open;
    while i + 1 < b.len() {
        if b[i] == b'[' && b[i + 1] == b'[' {
            depth += 1;
            i += 2;
        } else if b[i] == b'\n' && b[i + 1] == b'\n' {
            // links never span a paragraph break
            return None;
        } else if b[i] == b']' && b[i + 1] == b']' {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
            i += 2;
        } else {
            i += 1;
        }
    }
    None
}

/// Parses the link whose `[[` starts at byte `at`. Callers must ensure
/// `src[at..]` starts with `[[`.
pub fn parse_link(src: &str, at: usize) -> LinkParse {
    debug_assert!(src[at..].starts_with("[["));
    let Some(close) = find_link_close(src, at) else {
        return LinkParse::Unterminated;
    };
    let inner = Span::new(at + 2, close);
    let body = inner.slice(src);
    // first pipe at nesting depth zero
    let mut depth = 0i32;
    let mut pipe = None;
    let bytes = body.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'[' if bytes.get(i + 1) == Some(&b'[') => {
                depth += 1;
                i += 1;
            }
            b']' if bytes.get(i + 1) == Some(&b']') => {
                depth -= 1;
                i += 1;
            }
            b'|' if depth == 0 => {
                pipe = Some(i);
                break;
            }
            _ => {}
        }
        i += 1;
    }
    let raw_target = match pipe {
        Some(p) => Span::new(inner.start, inner.start + p),
        None => inner,
    };
    let anchor = match pipe {
        Some(p) => trim_span(src, Span::new(inner.start + p + 1, inner.end)),
        None => trim_span(src, raw_target),
    };

    let mut target = trim_span(src, raw_target);
    let mut visible = false;
    if src[target.start..target.end].starts_with(':') {
        visible = true;
        target = trim_span(src, Span::new(target.start + 1, target.end));
    }
    let t = target.slice(src);
    let kind = match t.find(':') {
        Some(colon) if is_namespace_prefix(&t[..colon]) => LinkKind::Namespaced { visible },
        _ => {
            if let Some(hash) = t.find('#') {
                target = trim_span(src, Span::new(target.start, target.start + hash));
            }
            if target.is_empty() {
                LinkKind::SamePage
            } else {
                LinkKind::Article
            }
        }
    };
    LinkParse::Link(LinkMarkup {
        kind,
        markup: Span::new(at, close + 2),
        target,
        anchor,
    })
}

/// Skips a `<!-- ... -->` comment or `<nowiki>...</nowiki>` region starting at
/// `at`, returning the offset just past it (or the text end when unclosed).
pub(crate) fn skip_opaque_region(src: &str, at: usize) -> Option<usize> {
    let rest = &src[at..];
    let (close, open_len) = if rest.starts_with("<!--") {
        ("-->", 4)
    } else if starts_with_ignore_ascii_case(rest, "<nowiki>") {
        ("</nowiki>", 8)
    } else {
        return None;
    };
    Some(match find_ignore_ascii_case(&rest[open_len..], close) {
        Some(p) => at + open_len + p + close.len(),
        None => src.len(),
    })
}

pub(crate) fn starts_with_ignore_ascii_case(s: &str, prefix: &str) -> bool {
    s.len() >= prefix.len() && s.as_bytes()[..prefix.len()].eq_ignore_ascii_case(prefix.as_bytes())
}

pub(crate) fn find_ignore_ascii_case(haystack: &str, needle: &str) -> Option<usize> {
    let h = haystack.as_bytes();
    let n = needle.as_bytes();
    if n.is_empty() {
        return Some(0);
    }
    (0..=h.len().checked_sub(n.len())?).find(|&i| h[i..i + n.len()].eq_ignore_ascii_case(n))
}

/// Every article link of `wikitext` in document order, outside comments and
/// `<nowiki>` regions. Namespaced links (files, categories, interwiki) and
/// same-page links are not interlinks and are skipped with their contents.
pub fn extract_interlinks(wikitext: &str) -> InterlinkScan {
    let mut scan = InterlinkScan::default();
    let bytes = wikitext.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'<' => {
                if let Some(end) = skip_opaque_region(wikitext, i) {
                    i = end;
                    continue;
                }
            }
            b'[' if bytes.get(i + 1) == Some(&b'[') => match parse_link(wikitext, i) {
                LinkParse::Unterminated => {
                    scan.malformed += 1;
                    i += 2;
                    continue;
                }
                LinkParse::Link(link) => {
                    if link.kind == LinkKind::Article && !link.anchor.is_empty() {
                        scan.links.push(Interlink {
                            target: String::from(link.target.slice(wikitext)),
                            anchor: String::from(link.anchor.slice(wikitext)),
                            span: link.anchor,
                            markup: link.markup,
                        });
                    }
                    i = link.markup.end;
                    continue;
                }
            },
            _ => {}
        }
        i += 1;
    }
    scan
}
