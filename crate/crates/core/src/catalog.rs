//! Entity catalog: typed entity records, title and page-id lookup, and the
//! name index used for exact mention matching.
//!
//! A name that belongs to entities of more than one class is ambiguous and
//! never enters a [`NameIndex`]. Names shared by several entities of the same
//! class are kept, since tagging only needs the class.

use alloc::collections::btree_map::Entry;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use unicode_normalization::UnicodeNormalization;

/// Coarse entity class of a catalog entry and of a tagged mention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum EntityClass {
    #[cfg_attr(feature = "serde", serde(rename = "ORG"))]
    Organization,
    #[cfg_attr(feature = "serde", serde(rename = "PER"))]
    Person,
    #[cfg_attr(feature = "serde", serde(rename = "LOC"))]
    Location,
}

impl EntityClass {
    pub const ALL: [EntityClass; 3] = [EntityClass::Organization, EntityClass::Person, EntityClass::Location];

    /// Three-letter code used in tags and file formats.
    pub const fn code(self) -> &'static str {
        match self {
            EntityClass::Organization => "ORG",
            EntityClass::Person => "PER",
            EntityClass::Location => "LOC",
        }
    }

    pub fn from_code(code: &str) -> Option<Self> {
        match code {
            "ORG" => Some(EntityClass::Organization),
            "PER" => Some(EntityClass::Person),
            "LOC" => Some(EntityClass::Location),
            _ => None,
        }
    }
}

impl fmt::Display for EntityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown entity class {0:?} (expected PER, ORG or LOC)")]
pub struct UnknownClass(pub String);

impl FromStr for EntityClass {
    type Err = UnknownClass;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EntityClass::from_code(s).ok_or_else(|| UnknownClass(s.to_string()))
    }
}

/// NFC, internal whitespace runs collapsed to one space, trimmed.
pub fn normalize_name(name: &str) -> String {
    let nfc: String = name.nfc().collect();
    let mut out = String::with_capacity(nfc.len());
    for word in nfc.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

/// Page-title key: underscores read as spaces, name normalization, and an
/// upper-cased first letter (MediaWiki titles are case-insensitive there).
pub fn normalize_title(title: &str) -> String {
    let spaced: String = title.chars().map(|c| if c == '_' { ' ' } else { c }).collect();
    let name = normalize_name(&spaced);
    let mut chars = name.chars();
    match chars.next() {
        Some(first) => {
            let mut out: String = first.to_uppercase().collect();
            out.push_str(chars.as_str());
            out
        }
        None => name,
    }
}

/// One entity of the catalog.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntityRecord {
    pub id: String,
    pub class: EntityClass,
    pub wiki_id: u64,
    pub title: String,
    /// Normalized, deduplicated and sorted; always contains the title.
    pub names: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RecordError {
    #[error("empty entity id")]
    EmptyId,
    #[error("empty title")]
    EmptyTitle,
}

impl EntityRecord {
    /// Builds a record, normalizing names and adding the title as a name.
    /// Names that are empty after normalization are dropped.
    pub fn new<I, S>(
        id: impl Into<String>,
        class: EntityClass,
        wiki_id: u64,
        title: impl Into<String>,
        names: I,
    ) -> Result<Self, RecordError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let id = id.into();
        if id.trim().is_empty() {
            return Err(RecordError::EmptyId);
        }
        let title = title.into();
        let title_name = normalize_name(&title);
        if title_name.is_empty() {
            return Err(RecordError::EmptyTitle);
        }
        let mut set: BTreeSet<String> = names
            .into_iter()
            .map(|n| normalize_name(n.as_ref()))
            .filter(|n| !n.is_empty())
            .collect();
        set.insert(title_name);
        Ok(EntityRecord {
            id,
            class,
            wiki_id,
            title,
            names: set.into_iter().collect(),
        })
    }
}

/// Dense handle of a record inside one [`EntityCatalog`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EntityKey(pub u32);

impl EntityKey {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("duplicate entity id {id:?} (line {line})")]
    DuplicateId { id: String, line: usize },
    #[error("catalog exceeds {} records", u32::MAX)]
    TooLarge,
}

/// A record line that was skipped during loading.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rejected {
    pub line: usize,
    pub reason: String,
}

/// Summary of one catalog load.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub records: usize,
    /// Distinct normalized names across all records.
    pub names: usize,
    /// Names excluded from matching because they span several classes.
    pub ambiguous_names: usize,
    /// `(normalized title, entity id that lost)` for every duplicate title.
    pub duplicate_titles: Vec<(String, String)>,
    /// `(wiki id, entity id that lost)` for every duplicate page id.
    pub duplicate_wiki_ids: Vec<(u64, String)>,
    pub rejected: Vec<Rejected>,
}

/// Immutable, indexed entity catalog.
#[derive(Clone, Debug, Default)]
pub struct EntityCatalog {
    records: Vec<EntityRecord>,
    by_id: BTreeMap<String, EntityKey>,
    by_title: BTreeMap<String, EntityKey>,
    by_wiki_id: BTreeMap<u64, EntityKey>,
    ambiguous: BTreeSet<String>,
    name_count: usize,
}

/// Incremental constructor for [`EntityCatalog`]. Records are numbered in
/// insertion order, which makes every derived index deterministic.
#[derive(Debug, Default)]
pub struct CatalogBuilder {
    catalog: EntityCatalog,
    report: LoadReport,
    // name -> first class seen, or None once a second class shows up
    name_classes: BTreeMap<String, Option<EntityClass>>,
}

impl CatalogBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a record read from `line` (1-based, used in diagnostics).
    pub fn push(&mut self, record: EntityRecord, line: usize) -> Result<EntityKey, CatalogError> {
        let cat = &mut self.catalog;
        if cat.by_id.contains_key(&record.id) {
            return Err(CatalogError::DuplicateId { id: record.id, line });
        }
        let key = EntityKey(u32::try_from(cat.records.len()).map_err(|_| CatalogError::TooLarge)?);
        cat.by_id.insert(record.id.clone(), key);

        let title_key = normalize_title(&record.title);
        match cat.by_title.entry(title_key) {
            Entry::Occupied(e) => self.report.duplicate_titles.push((e.key().clone(), record.id.clone())),
            Entry::Vacant(e) => {
                e.insert(key);
            }
        }
        match cat.by_wiki_id.entry(record.wiki_id) {
            Entry::Occupied(_) => self.report.duplicate_wiki_ids.push((record.wiki_id, record.id.clone())),
            Entry::Vacant(e) => {
                e.insert(key);
            }
        }

        for name in &record.names {
            match self.name_classes.get_mut(name) {
                None => {
                    self.name_classes.insert(name.clone(), Some(record.class));
                }
                Some(slot) => {
                    if *slot != Some(record.class) {
                        *slot = None;
                    }
                }
            }
        }
        cat.records.push(record);
        Ok(key)
    }

    /// Records a malformed input line that was skipped.
    pub fn reject(&mut self, line: usize, reason: impl Into<String>) {
        self.report.rejected.push(Rejected {
            line,
            reason: reason.into(),
        });
    }

    pub fn finish(self) -> (EntityCatalog, LoadReport) {
        let CatalogBuilder {
            mut catalog,
            mut report,
            name_classes,
        } = self;
        catalog.name_count = name_classes.len();
        catalog.ambiguous = name_classes
            .into_iter()
            .filter_map(|(name, class)| class.is_none().then_some(name))
            .collect();
        report.records = catalog.records.len();
        report.names = catalog.name_count;
        report.ambiguous_names = catalog.ambiguous.len();
        (catalog, report)
    }
}

impl EntityCatalog {
    /// Builds a catalog from records numbered 1, 2, ... for diagnostics.
    pub fn from_records<I>(records: I) -> Result<(Self, LoadReport), CatalogError>
    where
        I: IntoIterator<Item = EntityRecord>,
    {
        let mut b = CatalogBuilder::new();
        for (i, r) in records.into_iter().enumerate() {
            b.push(r, i + 1)?;
        }
        Ok(b.finish())
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, key: EntityKey) -> &EntityRecord {
        &self.records[key.index()]
    }

    pub fn records(&self) -> impl Iterator<Item = (EntityKey, &EntityRecord)> {
        self.records.iter().enumerate().map(|(i, r)| (EntityKey(i as u32), r))
    }

    pub fn key_of(&self, id: &str) -> Option<EntityKey> {
        self.by_id.get(id).copied()
    }

    /// Looks up a page title after title normalization.
    pub fn by_title(&self, title: &str) -> Option<EntityKey> {
        self.by_title.get(&normalize_title(title)).copied()
    }

    pub fn by_wiki_id(&self, wiki_id: u64) -> Option<EntityKey> {
        self.by_wiki_id.get(&wiki_id).copied()
    }

    pub fn is_ambiguous(&self, name: &str) -> bool {
        self.ambiguous.contains(name)
    }

    pub fn ambiguous_names(&self) -> &BTreeSet<String> {
        &self.ambiguous
    }

    /// Distinct normalized names, ambiguous ones included.
    pub fn name_count(&self) -> usize {
        self.name_count
    }

    /// Name index over every non-ambiguous name of the selected entities
    /// (all entities when `restrict_to` is `None`). Within one class the
    /// lowest-keyed entity owns a shared name.
    pub fn name_index(&self, restrict_to: Option<&BTreeSet<EntityKey>>) -> NameIndex {
        let mut index = NameIndex::new();
        let mut add = |key: EntityKey| {
            let rec = self.get(key);
            for name in &rec.names {
                if !self.ambiguous.contains(name) {
                    index.insert(name, key, rec.class);
                }
            }
        };
        match restrict_to {
            Some(keys) => keys.iter().copied().for_each(&mut add),
            None => (0..self.records.len()).for_each(|i| add(EntityKey(i as u32))),
        }
        index
    }
}

/// Owner of one indexed name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexEntry {
    pub name: String,
    pub entity: EntityKey,
    pub class: EntityClass,
}

#[derive(Clone, Debug, Default)]
struct TrieNode {
    // sorted by char
    children: Vec<(char, u32)>,
    entry: Option<u32>,
}

impl TrieNode {
    fn child(&self, c: char) -> Option<u32> {
        self.children
            .binary_search_by_key(&c, |&(k, _)| k)
            .ok()
            .map(|i| self.children[i].1)
    }
}

/// Character trie over normalized names.
///
/// Walking the trie from one text position yields every indexed name that
/// starts there; a single space in a name matches any horizontal whitespace
/// run in the text that does not contain a paragraph break.
#[derive(Clone, Debug)]
pub struct NameIndex {
    nodes: Vec<TrieNode>,
    entries: Vec<IndexEntry>,
}

impl Default for NameIndex {
    fn default() -> Self {
        Self::new()
    }
}

impl NameIndex {
    pub fn new() -> Self {
        NameIndex {
            nodes: alloc::vec![TrieNode::default()],
            entries: Vec::new(),
        }
    }

    /// Builds an index directly from `(name, class)` pairs; names are
    /// normalized and the first owner of a name wins. Entity keys are the
    /// pair positions.
    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = (S, EntityClass)>,
        S: AsRef<str>,
    {
        let mut index = NameIndex::new();
        for (i, (name, class)) in names.into_iter().enumerate() {
            let name = normalize_name(name.as_ref());
            index.insert(&name, EntityKey(i as u32), class);
        }
        index
    }

    /// Inserts an already-normalized name. Returns false (and leaves the index
    /// untouched) when the name is empty or already present.
    pub fn insert(&mut self, name: &str, entity: EntityKey, class: EntityClass) -> bool {
        if name.is_empty() {
            return false;
        }
        let mut node = 0usize;
        for c in name.chars() {
            node = match self.nodes[node].child(c) {
                Some(n) => n as usize,
                None => {
                    let id = self.nodes.len() as u32;
                    self.nodes.push(TrieNode::default());
                    let children = &mut self.nodes[node].children;
                    let pos = children.partition_point(|&(k, _)| k < c);
                    children.insert(pos, (c, id));
                    id as usize
                }
            };
        }
        if self.nodes[node].entry.is_some() {
            return false;
        }
        self.nodes[node].entry = Some(self.entries.len() as u32);
        self.entries.push(IndexEntry {
            name: name.into(),
            entity,
            class,
        });
        true
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&IndexEntry> {
        let mut node = 0usize;
        for c in name.chars() {
            node = self.nodes[node].child(c)? as usize;
        }
        self.nodes[node].entry.map(|e| &self.entries[e as usize])
    }

    /// Calls `f(end, entry)` for every indexed name that matches `text`
    /// starting at byte offset `start`, in increasing order of `end`.
    pub fn for_each_prefix_match<F>(&self, text: &str, start: usize, mut f: F)
    where
        F: FnMut(usize, &IndexEntry),
    {
        let rest = &text[start..];
        let mut node = 0usize;
        let mut iter = rest.char_indices().peekable();
        while let Some((_, c)) = iter.next() {
            let next = if is_soft_space(c) {
                // consume the whole whitespace run as one space
                let mut newlines = usize::from(c == '\n');
                while let Some(&(_, d)) = iter.peek() {
                    if !is_soft_space(d) {
                        break;
                    }
                    newlines += usize::from(d == '\n');
                    iter.next();
                }
                if newlines > 1 {
                    return;
                }
                self.nodes[node].child(' ')
            } else {
                self.nodes[node].child(c)
            };
            match next {
                Some(n) => node = n as usize,
                None => return,
            }
            if let Some(e) = self.nodes[node].entry {
                let end = match iter.peek() {
                    Some(&(j, _)) => start + j,
                    None => text.len(),
                };
                f(end, &self.entries[e as usize]);
            }
        }
    }
}

/// Whitespace that may separate the words of one name.
#[inline]
pub fn is_soft_space(c: char) -> bool {
    c.is_whitespace()
}
