//! Entity–article linking: which catalog entities may be tagged in an
//! article.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::catalog::{EntityCatalog, EntityKey};
use crate::clean::CleanArticle;
use crate::mention::{Mention, Origin};
use crate::span::Span;

/// Entities linked to one article.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ArticleEntityContext {
    pub article_id: u64,
    /// The entity the article itself is about.
    pub subject: Option<EntityKey>,
    /// Subject plus every entity reached through an anchor.
    pub candidates: BTreeSet<EntityKey>,
    /// Anchor spans (plain-text offsets) that resolved to an entity.
    pub anchor_mentions: Vec<(Span, EntityKey)>,
}

impl ArticleEntityContext {
    /// Anchor mentions as annotated mentions with their catalog class.
    pub fn anchor_mention_list(&self, catalog: &EntityCatalog) -> Vec<Mention> {
        self.anchor_mentions
            .iter()
            .map(|&(span, key)| Mention::new(span, catalog.get(key).class, Origin::Annotated))
            .collect()
    }
}

/// Links a cleaned article to the catalog. The subject is found by page id
/// first and by title otherwise; each anchor whose target title is a catalog
/// entry becomes an anchor mention.
pub fn link_article(clean: &CleanArticle, title: &str, catalog: &EntityCatalog) -> ArticleEntityContext {
    let subject = catalog.by_wiki_id(clean.article_id).or_else(|| catalog.by_title(title));
    let mut candidates: BTreeSet<EntityKey> = subject.into_iter().collect();
    let mut anchor_mentions = Vec::new();
    for anchor in &clean.anchors {
        if let Some(key) = catalog.by_title(&anchor.target) {
            candidates.insert(key);
            anchor_mentions.push((anchor.span, key));
        }
    }
    ArticleEntityContext {
        article_id: clean.article_id,
        subject,
        candidates,
        anchor_mentions,
    }
}
