//! Loading the entity catalog from JSON Lines.
//!
//! One object per line:
//! `{"id": "...", "class": "PER"|"ORG"|"LOC", "wiki_id": 42, "title": "...", "names": ["..."]}`.
//! Blank lines and lines starting with `#` are ignored. A malformed line is
//! skipped and reported with its line number; a duplicate `id` aborts the
//! load.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::Deserialize;
use silverner_core::catalog::{CatalogBuilder, CatalogError, EntityClass, EntityRecord};
use silverner_core::{EntityCatalog, LoadReport};

#[derive(Debug, thiserror::Error)]
pub enum CatalogLoadError {
    #[error("reading catalog: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    id: String,
    class: String,
    wiki_id: u64,
    title: String,
    #[serde(default)]
    names: Vec<String>,
}

/// Accepts the class codes and, case-insensitively, the English class names.
fn parse_class(s: &str) -> Option<EntityClass> {
    EntityClass::from_code(s).or_else(|| match s.to_ascii_lowercase().as_str() {
        "person" | "per" => Some(EntityClass::Person),
        "organization" | "organisation" | "org" => Some(EntityClass::Organization),
        "location" | "place" | "loc" => Some(EntityClass::Location),
        _ => None,
    })
}

fn parse_line(line: &str) -> Result<EntityRecord, String> {
    let raw: Line = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let class = parse_class(&raw.class).ok_or_else(|| format!("unknown class {:?}", raw.class))?;
    EntityRecord::new(raw.id, class, raw.wiki_id, raw.title, raw.names).map_err(|e| e.to_string())
}

/// Reads a catalog from any buffered reader.
pub fn read_catalog<R: BufRead>(reader: R) -> Result<(EntityCatalog, LoadReport), CatalogLoadError> {
    let mut builder = CatalogBuilder::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match parse_line(trimmed) {
            Ok(record) => {
                builder.push(record, line_no)?;
            }
            Err(reason) => builder.reject(line_no, reason),
        }
    }
    Ok(builder.finish())
}

pub fn load_catalog(path: &Path) -> Result<(EntityCatalog, LoadReport), CatalogLoadError> {
    read_catalog(BufReader::new(File::open(path)?))
}
