//! Wikitext cleaning: element removal, section filtering and plain-text
//! rendering with interlink anchors carried into plain-text offsets.
//!
//! Templates are never expanded. Every `{{...}}` construct is removed with
//! its full nesting except a handful of inline formatting templates
//! (`nowrap`, `lang`, ...) that render their text argument; a template whose
//! name matches the blocklist is always removed, inline or not.

use alloc::string::String;
use alloc::vec::Vec;

use unicode_normalization::UnicodeNormalization;

use crate::span::Span;
use crate::wiki::{
    find_ignore_ascii_case, parse_link, skip_opaque_region, starts_with_ignore_ascii_case, Article, LinkKind, LinkParse,
};

const BUILTIN_BLOCKLIST: &str = include_str!("../data/template_blocklist.txt");

/// Template-name prefixes whose templates are removed outright.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateBlocklist {
    prefixes: Vec<String>,
}

impl Default for TemplateBlocklist {
    fn default() -> Self {
        Self::builtin()
    }
}

impl TemplateBlocklist {
    /// One prefix per line; blank lines are ignored.
    pub fn parse(text: &str) -> Self {
        let mut prefixes: Vec<String> = text
            .lines()
            .map(normalize_template_name)
            .filter(|p| !p.is_empty())
            .collect();
        prefixes.sort();
        prefixes.dedup();
        TemplateBlocklist { prefixes }
    }

    /// The list shipped with the crate: list, table, file/media, chemistry and
    /// math, and indentation template families.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_BLOCKLIST)
    }

    pub fn prefixes(&self) -> &[String] {
        &self.prefixes
    }

    pub fn is_blocked(&self, template_name: &str) -> bool {
        let name = normalize_template_name(template_name);
        self.prefixes.iter().any(|p| name.starts_with(p.as_str()))
    }
}

fn normalize_template_name(raw: &str) -> String {
    let lower: String = raw.trim().chars().flat_map(char::to_lowercase).collect();
    let mut name = lower.as_str();
    for ns in ["template:", "predefinição:", "predefinicao:"] {
        if let Some(rest) = name.strip_prefix(ns) {
            name = rest.trim_start();
        }
    }
    let mut out = String::with_capacity(name.len());
    for word in name.split(|c: char| c.is_whitespace() || c == '_') {
        if word.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Inline formatting templates that contribute their last positional
/// argument as text.
fn is_inline_text_template(name: &str) -> bool {
    matches!(
        name,
        "nowrap" | "nobr" | "lang" | "small" | "smaller" | "big" | "nowrap begin"
    ) || name.starts_with("lang-")
}

/// Tags whose whole region is removed.
const REMOVED_TAGS: &[&str] = &[
    "ref",
    "references",
    "math",
    "chem",
    "ce",
    "gallery",
    "imagemap",
    "timeline",
    "score",
    "graph",
    "hiero",
    "syntaxhighlight",
    "source",
    "templatestyles",
    "mapframe",
    "maplink",
    "inputbox",
    "table",
];

/// Result of [`strip_elements`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stripped {
    pub text: String,
    /// Unbalanced templates, tables, tags or comments (each removed to the end
    /// of the text).
    pub malformed: usize,
}

/// Removes non-prose elements: templates (nested to full depth), tables,
/// file/media/category links, math/chemistry and similar tag regions,
/// references, comments, and list or indentation lines. Runs to a fixed
/// point, so the result is stable under a second application.
pub fn strip_elements(wikitext: &str, blocklist: &TemplateBlocklist) -> Stripped {
    let mut malformed = 0;
    let mut current = strip_pass(wikitext, blocklist, &mut malformed);
    // each pass only removes text, so this terminates
    loop {
        let mut scratch = 0;
        let next = strip_pass(&current, blocklist, &mut scratch);
        if next == current {
            break;
        }
        current = next;
    }
    Stripped {
        text: current,
        malformed,
    }
}

fn at_line_start(src: &str, i: usize) -> bool {
    src[..i]
        .bytes()
        .rev()
        .take_while(|&b| b != b'\n')
        .all(|b| b == b' ' || b == b'\t')
}

/// Offset of the `}}` matching the `{{` at `open`.
fn find_template_close(src: &str, open: usize) -> Option<usize> {
    let b = src.as_bytes();
    let mut depth = 0usize;
    let mut i = open;
    while i + 1 < b.len() {
        if b[i] == b'{' && b[i + 1] == b'{' {
            depth += 1;
            i += 2;
        } else if b[i] == b'}' && b[i + 1] == b'}' {
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

/// Splits a template body (between the braces) at top-level pipes.
fn template_parts(body: &str) -> Vec<&str> {
    let b = body.as_bytes();
    let mut parts = Vec::new();
    let (mut braces, mut brackets) = (0i32, 0i32);
    let mut start = 0;
    let mut i = 0;
    while i < b.len() {
        match b[i] {
            b'{' if b.get(i + 1) == Some(&b'{') => {
                braces += 1;
                i += 1;
            }
            b'}' if b.get(i + 1) == Some(&b'}') => {
                braces -= 1;
                i += 1;
            }
            b'[' if b.get(i + 1) == Some(&b'[') => {
                brackets += 1;
                i += 1;
            }
            b']' if b.get(i + 1) == Some(&b']') => {
                brackets -= 1;
                i += 1;
            }
            b'|' if braces == 0 && brackets == 0 => {
                parts.push(&body[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        i += 1;
    }
    parts.push(&body[start..]);
    parts
}

/// End of the `{|` table opened at `open` (just past its `|}`), with nested
/// tables. Both markers only count at line starts.
fn find_table_end(src: &str, open: usize) -> Option<usize> {
    let mut depth = 0usize;
    let mut line_start = open;
    while line_start < src.len() {
        let line_end = src[line_start..].find('\n').map_or(src.len(), |p| line_start + p);
        let line = &src[line_start..line_end];
        let trimmed = line.trim_start();
        let indent = line.len() - trimmed.len();
        if trimmed.starts_with("{|") {
            depth += 1;
        } else if trimmed.starts_with("|}") {
            depth -= 1;
            if depth == 0 {
                return Some(line_start + indent + 2);
            }
        }
        line_start = line_end + 1;
    }
    None
}

fn tag_name_at(src: &str, i: usize) -> Option<&str> {
    let rest = &src[i + 1..];
    let len = rest.bytes().take_while(|b| b.is_ascii_alphanumeric()).count();
    (len > 0).then(|| &rest[..len])
}

/// End of the tag region for a removed tag opening at `i`; `None` when the
/// region is unterminated.
fn removed_tag_end(src: &str, i: usize, name: &str) -> Option<usize> {
    let open_end = i + src[i..].find('>')? + 1;
    if src[..open_end].ends_with("/>") {
        return Some(open_end);
    }
    let mut closing = String::from("</");
    closing.push_str(name);
    let rel = find_ignore_ascii_case(&src[open_end..], &closing)?;
    let after = open_end + rel + closing.len();
    Some(match src[after..].find('>') {
        Some(p) => after + p + 1,
        None => src.len(),
    })
}

fn strip_pass(src: &str, blocklist: &TemplateBlocklist, malformed: &mut usize) -> String {
    let bytes = src.as_bytes();
    let mut out = String::with_capacity(src.len());
    let mut i = 0;
    let mut copied_to = 0;
    // copy src[copied_to..i] lazily, then skip to `next`
    macro_rules! skip_to {
        ($next:expr) => {{
            out.push_str(&src[copied_to..i]);
            i = $next;
            copied_to = i;
            continue;
        }};
    }
    while i < bytes.len() {
        match bytes[i] {
            b'<' => {
                if src[i..].starts_with("<!--") {
                    let end = match src[i + 4..].find("-->") {
                        Some(p) => i + 4 + p + 3,
                        None => {
                            *malformed += 1;
                            src.len()
                        }
                    };
                    skip_to!(end);
                }
                if starts_with_ignore_ascii_case(&src[i..], "<nowiki>") {
                    // keep the region verbatim
                    i = skip_opaque_region(src, i).unwrap_or(src.len());
                    continue;
                }
                if let Some(name) = tag_name_at(src, i) {
                    if REMOVED_TAGS.iter().any(|t| t.eq_ignore_ascii_case(name)) {
                        let end = removed_tag_end(src, i, name).unwrap_or_else(|| {
                            *malformed += 1;
                            src.len()
                        });
                        skip_to!(end);
                    }
                }
            }
            b'{' if bytes.get(i + 1) == Some(&b'{') => {
                let Some(close) = find_template_close(src, i) else {
                    *malformed += 1;
                    skip_to!(src.len());
                };
                let parts = template_parts(&src[i + 2..close]);
                let name = normalize_template_name(parts[0]);
                out.push_str(&src[copied_to..i]);
                if is_inline_text_template(&name) && !blocklist.is_blocked(&name) {
                    if let Some(text) = parts[1..].iter().rev().find(|p| !p.contains('=')) {
                        out.push_str(text.trim());
                    }
                }
                i = close + 2;
                copied_to = i;
                continue;
            }
            b'{' if bytes.get(i + 1) == Some(&b'|') && at_line_start(src, i) => {
                let end = find_table_end(src, i).unwrap_or_else(|| {
                    *malformed += 1;
                    src.len()
                });
                skip_to!(end);
            }
            b'[' if bytes.get(i + 1) == Some(&b'[') => {
                if let LinkParse::Link(link) = parse_link(src, i) {
                    if link.kind == (LinkKind::Namespaced { visible: false }) {
                        skip_to!(link.markup.end);
                    }
                }
                i += 2;
                continue;
            }
            _ => {}
        }
        i += 1;
    }
    out.push_str(&src[copied_to..]);
    drop_non_prose_lines(&out)
}

/// Removes list items, definition and indentation lines, and stray table
/// rows.
fn drop_non_prose_lines(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.split_inclusive('\n') {
        let first = line.trim_start_matches([' ', '\t']).chars().next();
        if matches!(first, Some(':' | '*' | '#' | ';' | '|' | '!')) {
            continue;
        }
        out.push_str(line);
    }
    out
}

/// `(level, title)` for a `== Title ==` heading line.
fn parse_heading(line: &str) -> Option<(usize, &str)> {
    let line = line.trim_end();
    let lead = line.bytes().take_while(|&b| b == b'=').count();
    let trail = line.bytes().rev().take_while(|&b| b == b'=').count();
    if lead == 0 || line.len() <= lead {
        return None;
    }
    let level = lead.min(trail).min(6);
    if level == 0 || line.len() < 2 * level + 1 {
        return None;
    }
    let title = line[level..line.len() - level].trim();
    (!title.is_empty()).then_some((level, title))
}

const FILTERED_SECTIONS: &[&str] = &[
    "references",
    "see also",
    "bibliography",
    "external links",
    "referências",
    "ver também",
    "bibliografia",
    "ligações externas",
];

fn is_filtered_section(title: &str) -> bool {
    let mut norm = String::new();
    for word in title.split_whitespace() {
        if !norm.is_empty() {
            norm.push(' ');
        }
        norm.extend(word.chars().flat_map(char::to_lowercase));
    }
    let norm: String = norm.nfc().collect();
    FILTERED_SECTIONS.contains(&norm.as_str())
}

/// Drops reference-like sections (references, see also, bibliography,
/// external links and their Portuguese names) from their heading up to the
/// next heading of equal or shallower level.
pub fn filter_sections(wikitext: &str) -> String {
    let mut out = String::with_capacity(wikitext.len());
    let mut dropping: Option<usize> = None;
    for line in wikitext.split_inclusive('\n') {
        if let Some((level, title)) = parse_heading(line) {
            if let Some(open) = dropping {
                if level <= open {
                    dropping = None;
                }
            }
            if dropping.is_none() && is_filtered_section(title) {
                dropping = Some(level);
            }
        }
        if dropping.is_none() {
            out.push_str(line);
        }
    }
    out
}

/// Interlink anchor in plain-text coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Anchor {
    pub target: String,
    pub span: Span,
}

/// Output of [`render_plain`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Rendered {
    pub text: String,
    pub anchors: Vec<Anchor>,
    /// Unterminated links or comments met while rendering.
    pub irregular: usize,
}

/// A cleaned article: plain text plus the anchors that survived cleaning.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CleanArticle {
    pub article_id: u64,
    pub text: String,
    pub anchors: Vec<Anchor>,
}

/// Per-article cleaning counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CleanStats {
    pub malformed_elements: usize,
    pub irregular_markup: usize,
}

/// Full cleaning chain for one article: NFC, element removal, section
/// filtering, rendering.
pub fn clean_article(article: &Article, blocklist: &TemplateBlocklist) -> (CleanArticle, CleanStats) {
    let nfc: String = article.wikitext.nfc().collect();
    let stripped = strip_elements(&nfc, blocklist);
    let filtered = filter_sections(&stripped.text);
    let rendered = render_plain(&filtered);
    (
        CleanArticle {
            article_id: article.id,
            text: rendered.text,
            anchors: rendered.anchors,
        },
        CleanStats {
            malformed_elements: stripped.malformed,
            irregular_markup: rendered.irregular,
        },
    )
}

struct Out {
    text: String,
    anchors: Vec<Anchor>,
    irregular: usize,
}

impl Out {
    fn last(&self) -> Option<char> {
        self.text.chars().next_back()
    }

    fn push_char(&mut self, c: char) {
        if c == '\n' {
            if self.text.is_empty() {
                return;
            }
            while self.text.ends_with([' ', '\t']) {
                self.text.pop();
            }
            if !self.text.ends_with("\n\n") {
                self.text.push('\n');
            }
        } else if c.is_whitespace() {
            if self.last().is_none_or(char::is_whitespace) {
                return;
            }
            self.text.push(' ');
        } else {
            let blocked = matches!(
                (self.last(), c),
                (Some('{'), '{' | '|') | (Some('}'), '}') | (Some('['), '[') | (Some(']'), ']')
            );
            if !blocked {
                self.text.push(c);
            }
        }
    }

    fn push_str(&mut self, s: &str) {
        s.chars().for_each(|c| self.push_char(c));
    }

    fn paragraph_break(&mut self) {
        self.push_char('\n');
        self.push_char('\n');
    }

    fn close_anchor(&mut self, start: usize, target: &str) {
        let start = start.min(self.text.len());
        let seg = &self.text[start..];
        let lead = seg.len() - seg.trim_start().len();
        let trail = seg.len() - seg.trim_end().len();
        if lead == seg.len() {
            return;
        }
        self.anchors.push(Anchor {
            target: String::from(target),
            span: Span::new(start + lead, self.text.len() - trail),
        });
    }

    fn finish(mut self) -> Rendered {
        let trimmed = self.text.trim_end().len();
        self.text.truncate(trimmed);
        for a in &mut self.anchors {
            a.span.end = a.span.end.min(trimmed);
        }
        self.anchors.retain(|a| !a.span.is_empty());
        Rendered {
            text: self.text,
            anchors: self.anchors,
            irregular: self.irregular,
        }
    }
}

fn decode_entity(name: &str) -> Option<char> {
    Some(match name {
        "amp" => '&',
        "lt" => '<',
        "gt" => '>',
        "quot" => '"',
        "apos" => '\'',
        "nbsp" | "ensp" | "emsp" | "thinsp" => ' ',
        "ndash" => '–',
        "mdash" => '—',
        "hellip" => '…',
        "laquo" => '«',
        "raquo" => '»',
        _ => {
            let num = name.strip_prefix('#')?;
            let code = match num.strip_prefix(['x', 'X']) {
                Some(hex) => u32::from_str_radix(hex, 16).ok()?,
                None => num.parse().ok()?,
            };
            char::from_u32(code)?
        }
    })
}

const URL_SCHEMES: &[&str] = &["http://", "https://", "ftp://", "//", "mailto:"];

/// Renders wikitext to plain text. Links become their anchor text (recorded
/// as [`Anchor`]s for article links), bold/italic quotes vanish, headings
/// become their bare title followed by a paragraph break, comments and tags
/// are dropped and character entities decoded. Whitespace runs collapse to a
/// single space and blank-line runs to one paragraph break.
pub fn render_plain(wikitext: &str) -> Rendered {
    let mut out = Out {
        text: String::with_capacity(wikitext.len()),
        anchors: Vec::new(),
        irregular: 0,
    };
    render_into(wikitext, &mut out, false);
    out.finish()
}

fn render_into(src: &str, out: &mut Out, in_anchor: bool) {
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let line_start = i == 0 || bytes[i - 1] == b'\n';
        if line_start {
            let line_end = src[i..].find('\n').map_or(src.len(), |p| i + p);
            let line = &src[i..line_end];
            if let Some((_, title)) = parse_heading(line) {
                out.paragraph_break();
                render_into(title, out, in_anchor);
                out.paragraph_break();
                i = line_end;
                continue;
            }
            if line.starts_with("----") {
                i += line.bytes().take_while(|&b| b == b'-').count();
                continue;
            }
        }
        match bytes[i] {
            b'<' => {
                if src[i..].starts_with("<!--") {
                    i = match src[i + 4..].find("-->") {
                        Some(p) => i + 4 + p + 3,
                        None => {
                            out.irregular += 1;
                            src.len()
                        }
                    };
                    continue;
                }
                if starts_with_ignore_ascii_case(&src[i..], "<nowiki>") {
                    let end = skip_opaque_region(src, i).unwrap_or(src.len());
                    let inner_end = if src[..end].to_ascii_lowercase().ends_with("</nowiki>") {
                        end - "</nowiki>".len()
                    } else {
                        end
                    };
                    out.push_str(&src[i + 8..inner_end.max(i + 8)]);
                    i = end;
                    continue;
                }
                let next = bytes.get(i + 1).copied().unwrap_or(b' ');
                if next.is_ascii_alphabetic() || next == b'/' || next == b'!' {
                    let line_end = src[i..].find('\n').map_or(src.len(), |p| i + p);
                    if let Some(gt) = src[i..line_end].find('>') {
                        if tag_name_at(src, i).is_some_and(|n| n.eq_ignore_ascii_case("br")) {
                            out.push_char(' ');
                        }
                        i += gt + 1;
                        continue;
                    }
                }
            }
            b'[' if bytes.get(i + 1) == Some(&b'[') => {
                match parse_link(src, i) {
                    LinkParse::Unterminated => {
                        out.irregular += 1;
                        i += 2;
                    }
                    LinkParse::Link(link) => {
                        let shows_text = match link.kind {
                            LinkKind::Namespaced { visible } => visible,
                            _ => true,
                        };
                        if shows_text && !link.anchor.is_empty() {
                            let start = out.text.len();
                            render_into(link.anchor.slice(src), out, true);
                            if link.kind == LinkKind::Article && !in_anchor {
                                out.close_anchor(start, link.target.slice(src));
                            }
                        }
                        i = link.markup.end;
                    }
                }
                continue;
            }
            b'[' => {
                let rest = &src[i + 1..];
                if URL_SCHEMES.iter().any(|s| starts_with_ignore_ascii_case(rest, s)) {
                    let line_end = rest.find('\n').unwrap_or(rest.len());
                    if let Some(close) = rest[..line_end].find(']') {
                        let inner = &rest[..close];
                        if let Some(sp) = inner.find(' ') {
                            render_into(&inner[sp + 1..], out, in_anchor);
                        }
                        i += close + 2;
                        continue;
                    }
                }
            }
            b'\'' if bytes.get(i + 1) == Some(&b'\'') => {
                let run = bytes[i..].iter().take_while(|&&b| b == b'\'').count();
                if run == 4 {
                    out.push_char('\'');
                } else if run > 5 {
                    (0..run - 5).for_each(|_| out.push_char('\''));
                }
                i += run;
                continue;
            }
            b'&' => {
                let rest = &src[i + 1..];
                if let Some(semi) = rest.find(';').filter(|&p| p > 0 && p <= 10) {
                    if let Some(c) = decode_entity(&rest[..semi]) {
                        out.push_char(c);
                        i += semi + 2;
                        continue;
                    }
                }
            }
            b'_' if src[i..].starts_with("__") => {
                let rest = &src[i + 2..];
                let word = rest.bytes().take_while(|b| b.is_ascii_uppercase()).count();
                if word > 0 && rest[word..].starts_with("__") {
                    i += word + 4;
                    continue;
                }
            }
            _ => {}
        }
        let c = src[i..].chars().next().expect("in bounds");
        out.push_char(c);
        i += c.len_utf8();
    }
}
