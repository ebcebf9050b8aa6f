//! Allocation-only building blocks for turning Wikipedia wikitext and an
//! entity catalog into a silver-standard NER corpus in BIO format.
//!
//! Everything here is pure and per-article: catalog indexing, interlink
//! extraction, wikitext cleaning, entity linking, mention tagging,
//! tokenization with boundary repairs, BIO projection, the corpus text
//! format, corpus statistics, and entity-level scoring. Reading dumps,
//! talking to worker processes and orchestrating parallel runs live in the
//! `silverner` crate.
//!
//! All spans are half-open byte ranges into UTF-8 text and always fall on
//! `char` boundaries. Code that exchanges offsets with the outside world in
//! Unicode scalar values converts at the edge (see [`span::CharOffsets`]).
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod annotate;
pub mod bio;
pub mod catalog;
pub mod clean;
pub mod corpus;
pub mod linker;
pub mod mention;
pub mod score;
pub mod span;
pub mod stats;
pub mod tokenize;
pub mod wiki;

pub use bio::{project_bio, AlignmentError, BioTag, TaggedSentence, TaggedToken};
pub use catalog::{
    CatalogBuilder, CatalogError, EntityCatalog, EntityClass, EntityKey, EntityRecord, LoadReport, NameIndex,
};
pub use mention::{Mention, Origin};
pub use span::Span;
