//! Corpus statistics: sentence-length distribution, token counts per tag
//! class, entity-only shares and annotated/detected origin shares.
//!
//! Counting is token-level: a token counts toward class X when its tag is
//! `B-X` or `I-X`. Quartiles use the nearest-rank rule and the standard
//! deviation is the population one. [`StatsAccumulator`] is a monoid, so
//! per-shard partial statistics can be merged in any grouping.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::bio::{BioTag, TaggedSentence};
use crate::catalog::EntityClass;
use crate::mention::Origin;

fn class_slot(c: EntityClass) -> usize {
    match c {
        EntityClass::Organization => 0,
        EntityClass::Person => 1,
        EntityClass::Location => 2,
    }
}

/// Mergeable partial statistics.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StatsAccumulator {
    sentences: u64,
    tokens: u64,
    outside: u64,
    entity_tokens: [u64; 3],
    // [class][annotated, predicted]
    origin_tokens: [[u64; 2]; 3],
    lengths: BTreeMap<u64, u64>,
}

impl StatsAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_sentence(&mut self, sentence: &TaggedSentence) {
        let len = sentence.tokens.len() as u64;
        self.sentences += 1;
        self.tokens += len;
        *self.lengths.entry(len).or_default() += 1;
        for t in &sentence.tokens {
            match t.tag {
                BioTag::Outside => self.outside += 1,
                BioTag::Begin(c) | BioTag::Inside(c) => {
                    let slot = class_slot(c);
                    self.entity_tokens[slot] += 1;
                    match t.origin {
                        Some(Origin::Annotated) => self.origin_tokens[slot][0] += 1,
                        Some(Origin::Predicted) => self.origin_tokens[slot][1] += 1,
                        None => {}
                    }
                }
            }
        }
    }

    pub fn merge(&mut self, other: &StatsAccumulator) {
        self.sentences += other.sentences;
        self.tokens += other.tokens;
        self.outside += other.outside;
        for i in 0..3 {
            self.entity_tokens[i] += other.entity_tokens[i];
            self.origin_tokens[i][0] += other.origin_tokens[i][0];
            self.origin_tokens[i][1] += other.origin_tokens[i][1];
        }
        for (&len, &n) in &other.lengths {
            *self.lengths.entry(len).or_default() += n;
        }
    }

    pub fn finish(&self) -> CorpusStats {
        let tags = TagCounts {
            outside: self.outside,
            organization: self.entity_tokens[0],
            person: self.entity_tokens[1],
            location: self.entity_tokens[2],
        };
        let origin = {
            let per_class = |slot: usize| OriginCounts {
                annotated: self.origin_tokens[slot][0],
                detected: self.origin_tokens[slot][1],
            };
            let org = per_class(0);
            let per = per_class(1);
            let loc = per_class(2);
            OriginBreakdown {
                all: OriginCounts {
                    annotated: org.annotated + per.annotated + loc.annotated,
                    detected: org.detected + per.detected + loc.detected,
                },
                organization: org,
                person: per,
                location: loc,
            }
        };
        CorpusStats {
            sentence_count: self.sentences,
            token_count: self.tokens,
            length: LengthStats::from_histogram(&self.lengths),
            tags,
            origin,
            histogram: self.lengths.iter().map(|(&l, &n)| (l, n)).collect(),
        }
    }
}

/// Computes statistics for a whole corpus.
pub fn compute_stats<'a, I>(sentences: I) -> CorpusStats
where
    I: IntoIterator<Item = &'a TaggedSentence>,
{
    let mut acc = StatsAccumulator::new();
    for s in sentences {
        acc.add_sentence(s);
    }
    acc.finish()
}

/// Sentence-length summary in tokens.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LengthStats {
    pub mean: f64,
    pub std: f64,
    pub min: u64,
    pub max: u64,
    pub q25: u64,
    pub q50: u64,
    pub q75: u64,
}

impl LengthStats {
    /// `None` for an empty histogram.
    pub fn from_histogram(hist: &BTreeMap<u64, u64>) -> Option<Self> {
        let n: u64 = hist.values().sum();
        if n == 0 {
            return None;
        }
        let total: u128 = hist.iter().map(|(&l, &c)| l as u128 * c as u128).sum();
        let mean = total as f64 / n as f64;
        let var = hist
            .iter()
            .map(|(&l, &c)| {
                let d = l as f64 - mean;
                d * d * c as f64
            })
            .sum::<f64>()
            / n as f64;
        Some(LengthStats {
            mean,
            std: libm::sqrt(var),
            min: *hist.keys().next().expect("non-empty"),
            max: *hist.keys().next_back().expect("non-empty"),
            q25: nearest_rank(hist, n, 25),
            q50: nearest_rank(hist, n, 50),
            q75: nearest_rank(hist, n, 75),
        })
    }
}

/// Value at rank `ceil(p/100 * n)` (at least 1) of the sorted sample.
fn nearest_rank(hist: &BTreeMap<u64, u64>, n: u64, p: u64) -> u64 {
    let rank = ((p as u128 * n as u128).div_ceil(100) as u64).max(1);
    let mut seen = 0u64;
    for (&len, &count) in hist {
        seen += count;
        if seen >= rank {
            return len;
        }
    }
    *hist.keys().next_back().expect("non-empty")
}

/// Token counts per tag class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TagCounts {
    #[cfg_attr(feature = "serde", serde(rename = "O"))]
    pub outside: u64,
    #[cfg_attr(feature = "serde", serde(rename = "ORG"))]
    pub organization: u64,
    #[cfg_attr(feature = "serde", serde(rename = "PER"))]
    pub person: u64,
    #[cfg_attr(feature = "serde", serde(rename = "LOC"))]
    pub location: u64,
}

impl TagCounts {
    pub fn get(&self, class: EntityClass) -> u64 {
        match class {
            EntityClass::Organization => self.organization,
            EntityClass::Person => self.person,
            EntityClass::Location => self.location,
        }
    }

    pub fn entity_total(&self) -> u64 {
        self.organization + self.person + self.location
    }

    pub fn total(&self) -> u64 {
        self.outside + self.entity_total()
    }

    /// Fraction of all tokens in each class; `None` without tokens.
    pub fn shares(&self) -> Option<TagShares> {
        let total = self.total();
        (total > 0).then(|| TagShares {
            outside: fraction(self.outside, total),
            organization: fraction(self.organization, total),
            person: fraction(self.person, total),
            location: fraction(self.location, total),
        })
    }

    /// Fraction of entity tokens per class; `None` without entity tokens.
    pub fn entity_shares(&self) -> Option<EntityShares> {
        let total = self.entity_total();
        (total > 0).then(|| EntityShares {
            organization: fraction(self.organization, total),
            person: fraction(self.person, total),
            location: fraction(self.location, total),
        })
    }
}

fn fraction(part: u64, total: u64) -> f64 {
    part as f64 / total as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TagShares {
    #[cfg_attr(feature = "serde", serde(rename = "O"))]
    pub outside: f64,
    #[cfg_attr(feature = "serde", serde(rename = "ORG"))]
    pub organization: f64,
    #[cfg_attr(feature = "serde", serde(rename = "PER"))]
    pub person: f64,
    #[cfg_attr(feature = "serde", serde(rename = "LOC"))]
    pub location: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EntityShares {
    #[cfg_attr(feature = "serde", serde(rename = "ORG"))]
    pub organization: f64,
    #[cfg_attr(feature = "serde", serde(rename = "PER"))]
    pub person: f64,
    #[cfg_attr(feature = "serde", serde(rename = "LOC"))]
    pub location: f64,
}

/// Entity tokens by origin.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OriginCounts {
    pub annotated: u64,
    pub detected: u64,
}

impl OriginCounts {
    /// `(annotated, detected)` fractions; `None` without origin-carrying
    /// tokens.
    pub fn shares(&self) -> Option<(f64, f64)> {
        let total = self.annotated + self.detected;
        (total > 0).then(|| (fraction(self.annotated, total), fraction(self.detected, total)))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OriginBreakdown {
    pub all: OriginCounts,
    pub organization: OriginCounts,
    pub person: OriginCounts,
    pub location: OriginCounts,
}

impl OriginBreakdown {
    pub fn rows(&self) -> [(&'static str, OriginCounts); 4] {
        [
            ("ALL", self.all),
            ("ORG", self.organization),
            ("PER", self.person),
            ("LOC", self.location),
        ]
    }
}

/// Serialized as the JSON report: `sentences`, `tokens`, `length`, `tags`,
/// `entity_shares`, `origin`, `histogram`. Fractions in the report are
/// derived values; deserializing recomputes them from the counts and the
/// histogram, so a parsed report renders identically.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(into = "json::Report", try_from = "json::Report"))]
pub struct CorpusStats {
    pub sentence_count: u64,
    pub token_count: u64,
    /// Absent for an empty corpus.
    pub length: Option<LengthStats>,
    pub tags: TagCounts,
    pub origin: OriginBreakdown,
    /// `(length, sentence count)`, ascending by length.
    pub histogram: Vec<(u64, u64)>,
}

impl CorpusStats {
    /// Rebuilds statistics from raw counts, deriving the length summary
    /// from the histogram.
    pub fn from_counts(tags: TagCounts, origin: OriginBreakdown, histogram: Vec<(u64, u64)>) -> Self {
        let hist: BTreeMap<u64, u64> = histogram.iter().copied().filter(|&(_, n)| n > 0).collect();
        CorpusStats {
            sentence_count: hist.values().sum(),
            token_count: tags.total(),
            length: LengthStats::from_histogram(&hist),
            tags,
            origin,
            histogram: hist.into_iter().collect(),
        }
    }
}

#[cfg(feature = "serde")]
mod json {
    use super::*;
    use alloc::collections::BTreeMap;
    use alloc::string::ToString;

    #[derive(serde::Serialize, serde::Deserialize)]
    pub struct OriginRow {
        pub annotated: f64,
        pub detected: f64,
        pub annotated_tokens: u64,
        pub detected_tokens: u64,
    }

    #[derive(serde::Serialize, serde::Deserialize)]
    pub struct Report {
        pub sentences: u64,
        pub tokens: u64,
        pub length: Option<LengthStats>,
        pub tags: TagCounts,
        pub entity_shares: Option<EntityShares>,
        /// Unit of the origin counts.
        pub origin_unit: String,
        /// Keyed by `ALL`, `ORG`, `PER`, `LOC`; fractions absent when the
        /// class has no origin-carrying tokens are reported as 0.
        pub origin: BTreeMap<String, OriginRow>,
        pub histogram: Vec<(u64, u64)>,
    }

    impl From<CorpusStats> for Report {
        fn from(s: CorpusStats) -> Self {
            let origin = s
                .origin
                .rows()
                .into_iter()
                .map(|(name, c)| {
                    let (a, d) = c.shares().unwrap_or((0.0, 0.0));
                    (
                        name.to_string(),
                        OriginRow {
                            annotated: a,
                            detected: d,
                            annotated_tokens: c.annotated,
                            detected_tokens: c.detected,
                        },
                    )
                })
                .collect();
            Report {
                sentences: s.sentence_count,
                tokens: s.token_count,
                length: s.length,
                tags: s.tags,
                entity_shares: s.tags.entity_shares(),
                origin_unit: "tokens".to_string(),
                origin,
                histogram: s.histogram,
            }
        }
    }

    #[derive(Debug, thiserror::Error)]
    pub enum ReportError {
        #[error("report lists {listed} sentences but the histogram holds {counted}")]
        SentenceCount { listed: u64, counted: u64 },
        #[error("report lists {listed} tokens but the tag counts sum to {counted}")]
        TokenCount { listed: u64, counted: u64 },
        #[error("origin row {0} missing")]
        MissingOrigin(&'static str),
    }

    impl TryFrom<Report> for CorpusStats {
        type Error = ReportError;

        fn try_from(r: Report) -> Result<Self, Self::Error> {
            let row = |name: &'static str| -> Result<OriginCounts, ReportError> {
                r.origin
                    .get(name)
                    .map(|o| OriginCounts {
                        annotated: o.annotated_tokens,
                        detected: o.detected_tokens,
                    })
                    .ok_or(ReportError::MissingOrigin(name))
            };
            let origin = OriginBreakdown {
                all: row("ALL")?,
                organization: row("ORG")?,
                person: row("PER")?,
                location: row("LOC")?,
            };
            let stats = CorpusStats::from_counts(r.tags, origin, r.histogram);
            if stats.sentence_count != r.sentences {
                return Err(ReportError::SentenceCount {
                    listed: r.sentences,
                    counted: stats.sentence_count,
                });
            }
            if stats.token_count != r.tokens {
                return Err(ReportError::TokenCount {
                    listed: r.tokens,
                    counted: stats.token_count,
                });
            }
            Ok(stats)
        }
    }
}

/// `part / total` as a percentage truncated (not rounded) to two decimals,
/// e.g. `"92.69%"`. Uses exact integer arithmetic.
pub fn percent_truncated(part: u64, total: u64) -> String {
    if total == 0 {
        return String::from("-");
    }
    let basis = part as u128 * 10_000 / total as u128;
    alloc::format!("{}.{:02}%", basis / 100, basis % 100)
}

/// Thousands-separated integer, e.g. `"3,650,909"`.
pub fn group_thousands(n: u64) -> String {
    let digits = alloc::format!("{n}");
    let mut out = String::with_capacity(digits.len() + digits.len() / 3);
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    out
}

/// Plain-text report laid out like the usual corpus tables: sentence length,
/// tag frequency, entity-tag frequency and token origin.
pub fn render_text(stats: &CorpusStats) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Sentence length (tokens)");
    let _ = writeln!(s, "  {:<24}{}", "Total", group_thousands(stats.sentence_count));
    match &stats.length {
        Some(l) => {
            let _ = writeln!(s, "  {:<24}{:.2}", "Mean", l.mean);
            let _ = writeln!(s, "  {:<24}{:.2}", "Standard deviation", l.std);
            let _ = writeln!(s, "  {:<24}{}", "Min", l.min);
            let _ = writeln!(s, "  {:<24}{}", "Max", l.max);
            let _ = writeln!(s, "  {:<24}{}", "Percentile 25%", l.q25);
            let _ = writeln!(s, "  {:<24}{}", "Percentile 50%", l.q50);
            let _ = writeln!(s, "  {:<24}{}", "Percentile 75%", l.q75);
        }
        None => {
            let _ = writeln!(s, "  (no sentences)");
        }
    }
    let t = &stats.tags;
    let total = t.total();
    let _ = writeln!(s);
    let _ = writeln!(s, "Tag frequency ({} tokens)", group_thousands(stats.token_count));
    let _ = writeln!(s, "  {:<14}{:>14}{:>10}", "Class", "Total", "%");
    for (name, n) in [
        ("Not NE", t.outside),
        ("Organization", t.organization),
        ("Person", t.person),
        ("Location", t.location),
    ] {
        let _ = writeln!(
            s,
            "  {:<14}{:>14}{:>10}",
            name,
            group_thousands(n),
            percent_truncated(n, total)
        );
    }
    let ent = t.entity_total();
    let _ = writeln!(s);
    let _ = writeln!(s, "Entity tag frequency");
    let _ = writeln!(s, "  {:<14}{:>14}{:>10}", "Class", "Total", "%");
    for (name, n) in [
        ("Organization", t.organization),
        ("Person", t.person),
        ("Location", t.location),
    ] {
        let _ = writeln!(
            s,
            "  {:<14}{:>14}{:>10}",
            name,
            group_thousands(n),
            percent_truncated(n, ent)
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "Token origin (token counts)");
    let _ = writeln!(s, "  {:<14}{:>12}{:>12}", "Class", "Annotated", "Detected");
    for (name, c) in [
        ("All classes", stats.origin.all),
        ("Organization", stats.origin.organization),
        ("Person", stats.origin.person),
        ("Location", stats.origin.location),
    ] {
        let sum = c.annotated + c.detected;
        let _ = writeln!(
            s,
            "  {:<14}{:>12}{:>12}",
            name,
            percent_truncated(c.annotated, sum),
            percent_truncated(c.detected, sum)
        );
    }
    s
}
