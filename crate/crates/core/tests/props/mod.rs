//! Randomized suites with brute-force oracles.
//!
//! Each suite runs a fixed number of cases on inputs of at most
//! [`MAX_CHARS`] characters and returns the first counterexample, already
//! shrunk, as an error message. The suites are shared by the crate's
//! property tests and by the acceptance report.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestError, TestRng, TestRunner};
use silverner_core::annotate::Annotator;
use silverner_core::catalog::{normalize_name, EntityClass, EntityRecord, NameIndex};
use silverner_core::clean::TemplateBlocklist;
use silverner_core::corpus::{corpus_to_string, read_corpus, CorpusParser};
use silverner_core::mention::{match_mentions, merge_predicted, predicted_mentions, Mention, Origin, RawEntity};
use silverner_core::span::{is_sorted_disjoint, CharOffsets, Span};
use silverner_core::tokenize::{segment, Abbreviations, RuleTokenizer};
use silverner_core::wiki::Article;
use silverner_core::{project_bio, BioTag, EntityCatalog, TaggedSentence, TaggedToken};

/// Longest input, in characters.
pub const MAX_CHARS: usize = 200;
/// Cases per suite.
pub const CASES: u32 = 1000;

/// Runs `test` on `cases` inputs from `strategy` with a fixed seed.
pub fn check<S, F>(cases: u32, strategy: S, test: F) -> Result<(), String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
    F: Fn(S::Value) -> Result<(), TestCaseError>,
{
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    match runner.run(&strategy, test) {
        Ok(()) => Ok(()),
        Err(TestError::Fail(why, input)) => Err(format!("{why}; minimal input: {input:?}")),
        Err(TestError::Abort(why)) => Err(format!("aborted: {why}")),
    }
}

fn class() -> impl Strategy<Value = EntityClass> {
    prop::sample::select(EntityClass::ALL.to_vec())
}

/// Greedily keeps spans that overlap no earlier kept one.
fn disjoint(mut spans: Vec<Mention>) -> Vec<Mention> {
    spans.sort_by_key(|m| m.span);
    let mut out: Vec<Mention> = Vec::new();
    for m in spans {
        if out.iter().all(|k| !k.span.overlaps(&m.span)) {
            out.push(m);
        }
    }
    out
}

fn mentions(origin: Origin) -> impl Strategy<Value = Vec<Mention>> {
    prop::collection::vec((0usize..MAX_CHARS, 1usize..24, class()), 0..12).prop_map(move |raw| {
        disjoint(
            raw.into_iter()
                .map(|(s, len, c)| Mention::new(Span::new(s, (s + len).min(MAX_CHARS)), c, origin))
                .filter(|m| !m.span.is_empty())
                .collect(),
        )
    })
}

// ---------------------------------------------------------------- (a) merge

/// Merged mentions are disjoint, keep every annotated mention, and equal a
/// per-position occupancy oracle.
pub fn merge_suite(cases: u32) -> Result<(), String> {
    check(
        cases,
        (mentions(Origin::Annotated), mentions(Origin::Predicted)),
        |(annotated, predicted)| {
            let merged = merge_predicted(annotated.clone(), predicted.clone());

            let mut taken = [false; MAX_CHARS];
            for a in &annotated {
                for t in &mut taken[a.span.range()] {
                    *t = true;
                }
            }
            let mut expected: Vec<Mention> = annotated.clone();
            expected.extend(predicted.iter().filter(|p| p.span.range().all(|i| !taken[i])).copied());
            expected.sort_by_key(|m| m.span);

            prop_assert!(
                is_sorted_disjoint(merged.iter().map(|m| &m.span)),
                "overlap in {merged:?}"
            );
            for a in &annotated {
                prop_assert!(merged.contains(a), "annotated {a:?} lost");
            }
            prop_assert_eq!(merged, expected);
            Ok(())
        },
    )
}

// ------------------------------------------------------------- (b) matching

fn name() -> impl Strategy<Value = String> {
    "[abé]{1,3}( [abé]{1,3}){0,2}"
}

fn match_text() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop::sample::select(vec![
            "a", "b", "é", "ab", "ba", " ", " ", "  ", "\n", "\n\n", "\t", "\u{a0}", ".", "A", "1",
        ]),
        0..80,
    )
    .prop_map(|parts| parts.concat().chars().take(MAX_CHARS).collect())
}

fn is_word(c: char) -> bool {
    c.is_alphanumeric()
}

/// A whitespace run with two or more line breaks separates paragraphs.
fn crosses_paragraph(s: &str) -> bool {
    let mut newlines = 0;
    for c in s.chars() {
        if c.is_whitespace() {
            newlines += usize::from(c == '\n');
            if newlines > 1 {
                return true;
            }
        } else {
            newlines = 0;
        }
    }
    false
}

/// Leftmost-longest by enumeration of every candidate substring.
fn oracle_matches(text: &str, names: &[(String, EntityClass)]) -> Vec<Mention> {
    let mut owner: Vec<(String, EntityClass)> = Vec::new();
    for (n, c) in names {
        let n = normalize_name(n);
        if !owner.iter().any(|(m, _)| *m == n) {
            owner.push((n, *c));
        }
    }
    let longest = owner
        .iter()
        .map(|(n, _)| n.chars().filter(|c| !c.is_whitespace()).count())
        .max()
        .unwrap_or(0);
    let bounds: Vec<usize> = text.char_indices().map(|(i, _)| i).chain([text.len()]).collect();
    let mut out = Vec::new();
    let mut resume = 0;
    for (bi, &i) in bounds.iter().enumerate() {
        if i == text.len() || i < resume {
            continue;
        }
        if text[..i].chars().next_back().is_some_and(is_word) {
            continue;
        }
        let mut best = None;
        for &j in &bounds[bi + 1..] {
            let sub = &text[i..j];
            if sub.chars().filter(|c| !c.is_whitespace()).count() > longest {
                break;
            }
            let first = sub.chars().next().unwrap();
            let last = sub.chars().next_back().unwrap();
            if first.is_whitespace() || last.is_whitespace() || crosses_paragraph(sub) {
                continue;
            }
            if text[j..].chars().next().is_some_and(is_word) {
                continue;
            }
            if let Some((_, c)) = owner.iter().find(|(n, _)| *n == normalize_name(sub)) {
                best = Some((j, *c));
            }
        }
        if let Some((j, c)) = best {
            out.push(Mention::annotated(i, j, c));
            resume = j;
        }
    }
    out
}

/// Trie matching equals brute-force leftmost-longest enumeration.
pub fn match_suite(cases: u32) -> Result<(), String> {
    check(
        cases,
        (match_text(), prop::collection::vec((name(), class()), 1..6)),
        |(text, names)| {
            let index = NameIndex::from_names(names.iter().map(|(n, c)| (n.as_str(), *c)));
            prop_assert_eq!(match_mentions(&text, &index), oracle_matches(&text, &names));
            Ok(())
        },
    )
}

// -------------------------------------------------------------- (c) repairs

fn prose() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop::sample::select(vec![
            "Ana", "foi", "ao", "Rio", "de", "Janeiro", "Sr.", "J.", "São", "x", "2024", ".", ",", "!", "?", "-", "(",
            ")", "\"", "...", " ", " ", " ", " ", "\n", "\n\n",
        ]),
        0..70,
    )
    .prop_map(|parts| parts.concat().chars().take(MAX_CHARS).collect())
}

/// Random char-boundary spans, trimmed of whitespace and made disjoint.
fn spans_in(text: &str, raw: &[(usize, usize)]) -> Vec<Span> {
    let bounds: Vec<usize> = text.char_indices().map(|(i, _)| i).chain([text.len()]).collect();
    let mut out: Vec<Span> = Vec::new();
    for &(s, len) in raw {
        let a = bounds[s % bounds.len()];
        let b = bounds[(s + len).min(bounds.len() - 1)];
        let piece = &text[a..b];
        let lead = piece.len() - piece.trim_start().len();
        let trail = piece.len() - piece.trim_end().len();
        if lead == piece.len() {
            continue;
        }
        let span = Span::new(a + lead, b - trail);
        if out.iter().all(|o| !o.overlaps(&span)) {
            out.push(span);
        }
    }
    out.sort();
    out
}

fn tokenizer() -> RuleTokenizer {
    RuleTokenizer::new(Abbreviations::builtin())
}

/// After segmentation with repairs every mention lies in one sentence and
/// starts and ends on token boundaries; tokens cover all non-space text.
pub fn repair_suite(cases: u32) -> Result<(), String> {
    let tok = tokenizer();
    check(
        cases,
        (prose(), prop::collection::vec((0usize..MAX_CHARS, 1usize..30), 0..8)),
        move |(text, raw)| {
            let spans = spans_in(&text, &raw);
            let sentences = segment(&tok, &text, &spans);
            prop_assert!(is_sorted_disjoint(sentences.iter().map(|s| &s.span)));
            for m in &spans {
                let holders: Vec<_> = sentences.iter().filter(|s| s.span.contains(m)).collect();
                prop_assert_eq!(holders.len(), 1, "mention {:?} in {} sentences", m, holders.len());
                let s = holders[0];
                prop_assert!(s.tokens.iter().any(|t| t.start == m.start), "{m:?} starts mid-token");
                prop_assert!(s.tokens.iter().any(|t| t.end == m.end), "{m:?} ends mid-token");
                for t in &s.tokens {
                    prop_assert!(m.contains(t) || !m.overlaps(t), "token {t:?} straddles {m:?}");
                }
            }
            let mut covered = vec![false; text.len()];
            for s in &sentences {
                prop_assert!(is_sorted_disjoint(s.tokens.iter()));
                for t in &s.tokens {
                    prop_assert!(s.span.contains(t) && !t.is_empty());
                    for c in &mut covered[t.range()] {
                        *c = true;
                    }
                }
            }
            for (i, c) in text.char_indices() {
                prop_assert!(c.is_whitespace() || covered[i], "{c:?} at {i} not in any token");
            }
            let mentions: Vec<Mention> = spans
                .iter()
                .map(|s| Mention::new(*s, EntityClass::Person, Origin::Annotated))
                .collect();
            prop_assert!(project_bio(&text, &sentences, &mentions).is_ok());
            Ok(())
        },
    )
}

// ------------------------------------------------------ (d) emitted corpus

/// Small catalog used by the end-to-end suites.
pub fn catalog() -> EntityCatalog {
    let records = vec![
        EntityRecord::new("p1", EntityClass::Person, 1, "John Smith", ["John Smith"]).unwrap(),
        EntityRecord::new(
            "l1",
            EntityClass::Location,
            2,
            "Rio de Janeiro",
            ["Rio de Janeiro", "Rio"],
        )
        .unwrap(),
        EntityRecord::new("o1", EntityClass::Organization, 3, "Petrobras", ["Petrobras"]).unwrap(),
        EntityRecord::new("p2", EntityClass::Person, 4, "Ana Lima", ["Ana Lima", "Ana"]).unwrap(),
    ];
    EntityCatalog::from_records(records).unwrap().0
}

fn wikitext() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop::sample::select(vec![
            "John Smith",
            "Rio de Janeiro",
            "Rio",
            "Petrobras",
            "Ana",
            "Ana Lima",
            "[[Rio de Janeiro]]",
            "[[Petrobras|a empresa]]",
            "[[John Smith]]",
            "[[Ana Lima|Ana]]",
            "[[Lisboa]]",
            "'''",
            "''",
            "{{Info|x=1}}",
            "{{lang|en|Rio}}",
            "<ref>Rio</ref>",
            "<!-- c -->",
            "\n== Seção ==\n",
            "\n* item Rio\n",
            "\n{| x\n|}\n",
            "foi",
            "em",
            "Copacabana",
            "Sr.",
            "de",
            "a",
            ".",
            ",",
            "!",
            " ",
            " ",
            " ",
            "\n",
            "\n\n",
            "[[",
            "]]",
            "{{",
            "}}",
        ]),
        0..40,
    )
    .prop_map(|parts| parts.join(" ").chars().take(MAX_CHARS).collect())
}

/// Whole-article annotation on random wikitext: every emitted sentence is
/// BIO-well-formed and has at least one annotated token; origins sit only
/// on entity tokens; tokens are non-empty and free of whitespace.
pub fn emitted_suite(cases: u32) -> Result<(), String> {
    let cat = catalog();
    let blocklist = TemplateBlocklist::builtin();
    let tok = tokenizer();
    let annotator = Annotator {
        catalog: &cat,
        blocklist: &blocklist,
        tokenizer: &tok,
        global_index: None,
    };
    let classes = ["PER", "LOC", "ORG", "MISC"];
    check(
        cases,
        (
            wikitext(),
            prop::collection::vec((0usize..MAX_CHARS, 0usize..20, 0usize..4), 0..6),
        ),
        move |(wikitext, raw)| {
            let article = Article {
                id: 1,
                title: "Rio de Janeiro".into(),
                wikitext,
            };
            let prepared = annotator.prepare(&article);
            let n = CharOffsets::new(&prepared.text).char_len().max(1);
            let entities: Vec<RawEntity> = raw
                .iter()
                .map(|&(s, len, c)| RawEntity {
                    start: s % n,
                    end: s % n + len,
                    class: classes[c].into(),
                })
                .collect();
            let (predicted, _) = predicted_mentions(&prepared.text, &entities);
            let annotated = prepared.annotated.len();
            let out = annotator
                .finish(prepared, predicted)
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!(out.sentences.is_empty() || annotated > 0);
            for s in &out.sentences {
                prop_assert!(s.is_well_formed(), "{s:?}");
                prop_assert!(s.has_annotated(), "{s:?}");
                for t in &s.tokens {
                    prop_assert!(
                        !t.text.is_empty() && !t.text.chars().any(char::is_whitespace),
                        "token {:?}",
                        t.text
                    );
                    prop_assert_eq!(t.origin.is_some(), !t.tag.is_outside(), "origin on {:?}", t);
                }
            }
            let round =
                read_corpus(&corpus_to_string(&out.sentences, true)).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(round, out.sentences);
            Ok(())
        },
    )
}

// ----------------------------------------------------------- (e) round trip

fn token_text() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9éãç.,;:!?()'\"-]{1,6}"
}

fn sentence() -> impl Strategy<Value = TaggedSentence> {
    prop::collection::vec((token_text(), 0u8..3, class(), any::<bool>()), 1..10).prop_map(|raw| {
        let mut tokens: Vec<TaggedToken> = Vec::new();
        for (text, kind, class, annotated) in raw {
            let continues = tokens
                .last()
                .is_some_and(|t: &TaggedToken| t.tag.class() == Some(class));
            let (tag, origin) = match kind {
                0 => (BioTag::Outside, None),
                1 if continues => (BioTag::Inside(class), tokens.last().unwrap().origin),
                _ => (
                    BioTag::Begin(class),
                    Some(if annotated {
                        Origin::Annotated
                    } else {
                        Origin::Predicted
                    }),
                ),
            };
            tokens.push(TaggedToken::new(text, tag, origin));
        }
        TaggedSentence { tokens }
    })
}

fn corpus() -> impl Strategy<Value = Vec<TaggedSentence>> {
    prop::collection::vec(sentence(), 0..8).prop_map(|mut c| {
        // keep the serialized tokens within the size bound
        let mut chars = 0;
        c.retain(|s| {
            chars += s.tokens.iter().map(|t| t.text.chars().count()).sum::<usize>();
            chars <= MAX_CHARS
        });
        c
    })
}

/// Writing and reading a corpus is the identity, with or without the
/// origin column, for whole-text and line-streamed reading alike.
pub fn round_trip_suite(cases: u32) -> Result<(), String> {
    check(cases, (corpus(), any::<bool>()), |(corpus, with_origin)| {
        let text = corpus_to_string(&corpus, with_origin);
        let expected: Vec<TaggedSentence> = if with_origin {
            corpus.clone()
        } else {
            corpus.iter().map(TaggedSentence::without_origin).collect()
        };
        let read = read_corpus(&text).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&read, &expected);

        let mut parser = CorpusParser::new();
        let mut streamed = Vec::new();
        for line in text.lines() {
            if let Some(s) = parser.push_line(line).map_err(|e| TestCaseError::fail(e.to_string()))? {
                streamed.push(s);
            }
        }
        streamed.extend(parser.finish());
        prop_assert_eq!(&streamed, &expected);
        prop_assert_eq!(corpus_to_string(&read, with_origin), text);
        Ok(())
    })
}
