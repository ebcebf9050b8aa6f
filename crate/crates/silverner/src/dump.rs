//! Streaming reader for MediaWiki XML exports (plain or gzip-compressed).
//!
//! Only `<page>` elements of namespace 0 that are not redirects become
//! [`Article`]s; everything else is counted and skipped. Memory use is
//! bounded by the largest single page.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use flate2::bufread::MultiGzDecoder;
use quick_xml::events::Event;
use quick_xml::Reader;
use silverner_core::wiki::Article;

#[derive(Debug, thiserror::Error)]
pub enum DumpError {
    #[error("reading dump: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed dump XML at byte {offset}: {message}")]
    Xml { offset: u64, message: String },
}

/// Counts of the pages seen so far.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct DumpStats {
    pub pages: u64,
    pub articles: u64,
    pub skipped_namespace: u64,
    pub skipped_redirect: u64,
    /// Pages without a usable id or title.
    pub skipped_invalid: u64,
}

impl DumpStats {
    pub fn skipped(&self) -> u64 {
        self.skipped_namespace + self.skipped_redirect + self.skipped_invalid
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Field {
    None,
    Title,
    Ns,
    PageId,
    Text,
}

#[derive(Default)]
struct PageBuilder {
    title: String,
    ns: String,
    id: String,
    text: String,
    redirect: bool,
}

/// Iterator over the articles of a dump.
pub struct DumpReader<R: BufRead> {
    reader: Reader<R>,
    buf: Vec<u8>,
    stats: DumpStats,
    done: bool,
    open_tags: usize,
}

/// Opens `path`, detecting gzip compression from its first bytes.
pub fn open_dump(path: &Path) -> Result<DumpReader<Box<dyn BufRead + Send>>, DumpError> {
    let file = File::open(path)?;
    Ok(DumpReader::new(decompressing(BufReader::with_capacity(1 << 16, file))?))
}

/// Wraps `input` in a gzip decoder when it starts with the gzip magic bytes.
pub fn decompressing<R: BufRead + Send + 'static>(mut input: R) -> std::io::Result<Box<dyn BufRead + Send>> {
    let head = input.fill_buf()?;
    if head.starts_with(&[0x1f, 0x8b]) {
        Ok(Box::new(BufReader::with_capacity(1 << 16, MultiGzDecoder::new(input))))
    } else {
        Ok(Box::new(input))
    }
}

impl<R: BufRead> DumpReader<R> {
    pub fn new(input: R) -> Self {
        DumpReader {
            reader: Reader::from_reader(input),
            buf: Vec::with_capacity(1 << 12),
            stats: DumpStats::default(),
            done: false,
            open_tags: 0,
        }
    }

    pub fn stats(&self) -> DumpStats {
        self.stats
    }

    fn xml_error(&self, message: impl ToString) -> DumpError {
        DumpError::Xml {
            offset: self.reader.buffer_position(),
            message: message.to_string(),
        }
    }

    /// Reads up to and including the next wanted page.
    fn next_article(&mut self) -> Result<Option<Article>, DumpError> {
        let mut page: Option<PageBuilder> = None;
        let mut field = Field::None;
        // element depth below <page>; the page id is the <id> at depth 1
        let mut depth = 0usize;
        loop {
            self.buf.clear();
            let event = match self.reader.read_event_into(&mut self.buf) {
                Ok(e) => e,
                Err(e) => {
                    let err = e.to_string();
                    return Err(self.xml_error(err));
                }
            };
            match event {
                Event::Start(e) => {
                    self.open_tags += 1;
                    let name = e.local_name();
                    let name = name.as_ref();
                    if page.is_none() {
                        if name == b"page" {
                            page = Some(PageBuilder::default());
                            depth = 0;
                        }
                        continue;
                    }
                    depth += 1;
                    field = match (depth, name) {
                        (1, b"title") => Field::Title,
                        (1, b"ns") => Field::Ns,
                        (1, b"id") => Field::PageId,
                        (2, b"text") => Field::Text,
                        _ => Field::None,
                    };
                }
                Event::Empty(e) => {
                    if let Some(p) = page.as_mut() {
                        if depth == 0 && e.local_name().as_ref() == b"redirect" {
                            p.redirect = true;
                        }
                    }
                }
                Event::Text(t) => {
                    if let Some(p) = page.as_mut() {
                        if field != Field::None {
                            let s = t.unescape().map_err(|e| DumpError::Xml {
                                offset: self.reader.buffer_position(),
                                message: e.to_string(),
                            })?;
                            target(p, field).push_str(&s);
                        }
                    }
                }
                Event::CData(t) => {
                    if let Some(p) = page.as_mut() {
                        if field != Field::None {
                            let s = std::str::from_utf8(&t).map_err(|e| DumpError::Xml {
                                offset: self.reader.buffer_position(),
                                message: e.to_string(),
                            })?;
                            target(p, field).push_str(s);
                        }
                    }
                }
                Event::End(e) => {
                    self.open_tags = self.open_tags.saturating_sub(1);
                    field = Field::None;
                    if page.is_none() {
                        continue;
                    }
                    if depth > 0 {
                        depth -= 1;
                        continue;
                    }
                    if e.local_name().as_ref() != b"page" {
                        return Err(self.xml_error("unbalanced </page>"));
                    }
                    let p = page.take().expect("inside a page");
                    if let Some(article) = self.finish_page(p) {
                        return Ok(Some(article));
                    }
                }
                Event::Eof => {
                    if page.is_some() || self.open_tags > 0 {
                        return Err(self.xml_error("unexpected end of input"));
                    }
                    return Ok(None);
                }
                _ => {}
            }
        }
    }

    fn finish_page(&mut self, p: PageBuilder) -> Option<Article> {
        self.stats.pages += 1;
        let ns = p.ns.trim();
        if !(ns.is_empty() || ns == "0") {
            self.stats.skipped_namespace += 1;
            return None;
        }
        if p.redirect {
            self.stats.skipped_redirect += 1;
            return None;
        }
        let (Ok(id), false) = (p.id.trim().parse::<u64>(), p.title.trim().is_empty()) else {
            self.stats.skipped_invalid += 1;
            return None;
        };
        self.stats.articles += 1;
        Some(Article {
            id,
            title: p.title.trim().to_string(),
            wikitext: p.text,
        })
    }
}

fn target(p: &mut PageBuilder, field: Field) -> &mut String {
    match field {
        Field::Title => &mut p.title,
        Field::Ns => &mut p.ns,
        Field::PageId => &mut p.id,
        Field::Text | Field::None => &mut p.text,
    }
}

impl<R: BufRead> Iterator for DumpReader<R> {
    type Item = Result<Article, DumpError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.next_article() {
            Ok(Some(a)) => Some(Ok(a)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Reads every article of an in-memory dump.
pub fn read_all<R: Read>(input: R) -> Result<(Vec<Article>, DumpStats), DumpError> {
    let mut reader = DumpReader::new(BufReader::new(input));
    let articles = reader.by_ref().collect::<Result<Vec<_>, _>>()?;
    Ok((articles, reader.stats()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn dump(pages: &str) -> String {
        format!(
            "<mediawiki xmlns=\"http://www.mediawiki.org/xml/export-0.10/\" xml:lang=\"pt\">\n\
             <siteinfo><sitename>Wikipédia</sitename></siteinfo>\n{pages}</mediawiki>\n"
        )
    }

    fn page(id: u64, ns: u32, title: &str, text: &str, redirect: bool) -> String {
        let redirect = if redirect {
            "<redirect title=\"Elsewhere\" />"
        } else {
            ""
        };
        format!(
            "<page><title>{title}</title><ns>{ns}</ns><id>{id}</id>{redirect}\
             <revision><id>{}</id><text xml:space=\"preserve\">{text}</text></revision></page>\n",
            id + 1000
        )
    }

    #[test]
    fn single_page() {
        let (arts, stats) = read_all(dump(&page(7, 0, "Rio de Janeiro", "A &amp; B [[x]]", false)).as_bytes()).unwrap();
        assert_eq!(arts.len(), 1);
        assert_eq!(arts[0].id, 7);
        assert_eq!(arts[0].title, "Rio de Janeiro");
        assert_eq!(arts[0].wikitext, "A & B [[x]]");
        assert_eq!(stats.articles, 1);
    }

    #[test]
    fn zero_pages() {
        let (arts, stats) = read_all(dump("").as_bytes()).unwrap();
        assert!(arts.is_empty());
        assert_eq!(stats, DumpStats::default());
    }

    #[test]
    fn skips_redirects_and_other_namespaces() {
        let pages = [
            page(1, 0, "Redir", "#REDIRECT [[B]]", true),
            page(2, 0, "Normal", "text", false),
            page(3, 1, "Talk:Normal", "talk", false),
        ]
        .concat();
        let (arts, stats) = read_all(dump(&pages).as_bytes()).unwrap();
        assert_eq!(arts.iter().map(|a| a.id).collect::<Vec<_>>(), [2]);
        assert_eq!(stats.skipped_redirect, 1);
        assert_eq!(stats.skipped_namespace, 1);
        assert_eq!(stats.pages, 3);
    }

    #[test]
    fn empty_text_element() {
        let p = "<page><title>T</title><ns>0</ns><id>5</id><revision><id>9</id><text/></revision></page>";
        let (arts, _) = read_all(dump(p).as_bytes()).unwrap();
        assert_eq!(arts[0].wikitext, "");
    }

    #[test]
    fn truncated_dump_reports_offset() {
        let mut d = dump(&page(2, 0, "Normal", "text", false));
        d.truncate(d.len() - 30);
        let err = read_all(d.as_bytes()).unwrap_err();
        match err {
            DumpError::Xml { offset, .. } => assert!(offset > 0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gzip_is_detected() {
        let plain = dump(&page(2, 0, "Normal", "olá", false));
        let mut enc = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::fast());
        enc.write_all(plain.as_bytes()).unwrap();
        let gz = enc.finish().unwrap();
        let input = decompressing(std::io::Cursor::new(gz)).unwrap();
        let arts: Vec<Article> = DumpReader::new(input).collect::<Result<_, _>>().unwrap();
        assert_eq!(arts[0].wikitext, "olá");
    }
}
