//! Per-article annotation: clean → link → match → merge → tokenize → repair →
//! project → filter.
//!
//! The work is split in two so that a caller can obtain predicted mentions
//! for [`Prepared::text`] (from an external tagger) between
//! [`Annotator::prepare`] and [`Annotator::finish`].

use alloc::string::String;
use alloc::vec::Vec;

use crate::bio::{project_bio, AlignmentError, TaggedSentence};
use crate::catalog::{EntityCatalog, NameIndex};
use crate::clean::{clean_article, TemplateBlocklist};
use crate::corpus::filter_annotated;
use crate::linker::{link_article, ArticleEntityContext};
use crate::mention::{match_mentions, merge_annotated, merge_predicted, Mention, Origin};
use crate::span::Span;
use crate::tokenize::{segment, Tokenizer};
use crate::wiki::Article;

/// Shared, immutable per-run state.
pub struct Annotator<'a, T: Tokenizer> {
    pub catalog: &'a EntityCatalog,
    pub blocklist: &'a TemplateBlocklist,
    pub tokenizer: &'a T,
    /// When set, names of the whole catalog are matched in every article
    /// instead of only those of the article's linked entities.
    pub global_index: Option<&'a NameIndex>,
}

/// Counters of one article; summed over a run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ArticleCounters {
    pub malformed_elements: u64,
    pub irregular_markup: u64,
    pub anchors: u64,
    pub anchor_mentions: u64,
    pub exact_mentions: u64,
    pub annotated_mentions: u64,
    pub predicted_offered: u64,
    pub predicted_kept: u64,
    pub sentences: u64,
    pub sentences_kept: u64,
    pub tokens_kept: u64,
}

impl ArticleCounters {
    pub fn add(&mut self, o: &ArticleCounters) {
        self.malformed_elements += o.malformed_elements;
        self.irregular_markup += o.irregular_markup;
        self.anchors += o.anchors;
        self.anchor_mentions += o.anchor_mentions;
        self.exact_mentions += o.exact_mentions;
        self.annotated_mentions += o.annotated_mentions;
        self.predicted_offered += o.predicted_offered;
        self.predicted_kept += o.predicted_kept;
        self.sentences += o.sentences;
        self.sentences_kept += o.sentences_kept;
        self.tokens_kept += o.tokens_kept;
    }
}

/// An article after cleaning and annotated-mention tagging.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub article_id: u64,
    pub text: String,
    pub context: ArticleEntityContext,
    /// Sorted and disjoint.
    pub annotated: Vec<Mention>,
    pub counters: ArticleCounters,
}

/// Sentences of one article that contain at least one annotated token.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Annotated {
    pub article_id: u64,
    pub sentences: Vec<TaggedSentence>,
    pub counters: ArticleCounters,
}

impl<T: Tokenizer> Annotator<'_, T> {
    pub fn prepare(&self, article: &Article) -> Prepared {
        let (clean, clean_stats) = clean_article(article, self.blocklist);
        let context = link_article(&clean, &article.title, self.catalog);
        let exact = match self.global_index {
            Some(index) => match_mentions(&clean.text, index),
            None => {
                let index = self.catalog.name_index(Some(&context.candidates));
                match_mentions(&clean.text, &index)
            }
        };
        let anchors = context.anchor_mention_list(self.catalog);
        let counters = ArticleCounters {
            malformed_elements: clean_stats.malformed_elements as u64,
            irregular_markup: clean_stats.irregular_markup as u64,
            anchors: clean.anchors.len() as u64,
            anchor_mentions: anchors.len() as u64,
            exact_mentions: exact.len() as u64,
            ..Default::default()
        };
        let annotated = merge_annotated(exact, anchors);
        Prepared {
            article_id: clean.article_id,
            counters: ArticleCounters {
                annotated_mentions: annotated.len() as u64,
                ..counters
            },
            text: clean.text,
            context,
            annotated,
        }
    }

    /// `predicted` must be sorted, disjoint and within `prepared.text`
    /// (see [`crate::mention::predicted_mentions`]).
    pub fn finish(&self, prepared: Prepared, predicted: Vec<Mention>) -> Result<Annotated, AlignmentError> {
        let mut counters = prepared.counters;
        counters.predicted_offered = predicted.len() as u64;
        let mentions = merge_predicted(prepared.annotated, predicted);
        counters.predicted_kept = mentions.iter().filter(|m| m.origin == Origin::Predicted).count() as u64;
        let spans: Vec<Span> = mentions.iter().map(|m| m.span).collect();
        let sentences = segment(self.tokenizer, &prepared.text, &spans);
        let tagged = project_bio(&prepared.text, &sentences, &mentions)?;
        counters.sentences = tagged.len() as u64;
        let kept = filter_annotated(tagged);
        counters.sentences_kept = kept.len() as u64;
        counters.tokens_kept = kept.iter().map(|s| s.tokens.len() as u64).sum();
        Ok(Annotated {
            article_id: prepared.article_id,
            sentences: kept,
            counters,
        })
    }

    /// Both phases without predicted mentions.
    pub fn annotate(&self, article: &Article) -> Result<Annotated, AlignmentError> {
        let prepared = self.prepare(article);
        self.finish(prepared, Vec::new())
    }
}
