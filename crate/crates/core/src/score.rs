//! Entity-level precision, recall and F1 between a gold corpus and a
//! predicted corpus over the same tokens.
//!
//! Strict mode counts a predicted entity as correct only when its token span
//! and class equal a gold entity. Partial mode is a simplified stand-in for
//! overlap-aware evaluation: a predicted entity earns
//! `overlap tokens / gold entity length` against one same-class gold entity,
//! each gold and each predicted entity being credited at most once. Pairs
//! are assigned greedily, exact matches first and then by descending credit,
//! so the partial score never falls below the strict one.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::bio::TaggedSentence;
use crate::catalog::EntityClass;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ScoreMode {
    Strict,
    Partial,
}

impl core::str::FromStr for ScoreMode {
    type Err = UnknownMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(ScoreMode::Strict),
            "partial" => Ok(ScoreMode::Partial),
            _ => Err(UnknownMode),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("unknown scoring mode (expected strict or partial)")]
pub struct UnknownMode;

/// `2PR / (P + R)`, or 0 when `P + R = 0`.
pub fn f1(precision: f64, recall: f64) -> f64 {
    let sum = precision + recall;
    if sum > 0.0 {
        2.0 * precision * recall / sum
    } else {
        0.0
    }
}

/// Credit tallies; in strict mode `credit` is the true-positive count.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Tally {
    pub credit: f64,
    pub gold: u64,
    pub predicted: u64,
}

impl Tally {
    fn add(&mut self, other: &Tally) {
        self.credit += other.credit;
        self.gold += other.gold;
        self.predicted += other.predicted;
    }

    /// 0 when nothing was predicted.
    pub fn precision(&self) -> f64 {
        ratio(self.credit, self.predicted)
    }

    /// 0 when the gold side is empty.
    pub fn recall(&self) -> f64 {
        ratio(self.credit, self.gold)
    }

    pub fn f1(&self) -> f64 {
        f1(self.precision(), self.recall())
    }

    pub fn false_positives(&self) -> f64 {
        self.predicted as f64 - self.credit
    }

    pub fn false_negatives(&self) -> f64 {
        self.gold as f64 - self.credit
    }
}

fn ratio(num: f64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num / den as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClassScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub tally: Tally,
}

impl From<Tally> for ClassScore {
    fn from(tally: Tally) -> Self {
        ClassScore {
            precision: tally.precision(),
            recall: tally.recall(),
            f1: tally.f1(),
            tally,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Score {
    pub mode: ScoreMode,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub tally: Tally,
    /// Keyed by class code (`ORG`, `PER`, `LOC`); every class is present.
    pub per_class: BTreeMap<EntityClass, ClassScore>,
}

/// The two corpora disagree on tokens.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TokenMismatch {
    #[error("sentence counts differ: gold has {gold}, predicted has {predicted}")]
    SentenceCount { gold: usize, predicted: usize },
    #[error("sentence {sentence} (0-based) differs at token {token}")]
    Tokens { sentence: usize, token: usize },
}

/// Incremental scorer over aligned sentence pairs.
#[derive(Clone, Debug)]
pub struct Scorer {
    mode: ScoreMode,
    tallies: [Tally; 3],
    sentences: usize,
}

impl Scorer {
    pub fn new(mode: ScoreMode) -> Self {
        Scorer {
            mode,
            tallies: [Tally::default(); 3],
            sentences: 0,
        }
    }

    /// Sentences added so far.
    pub fn sentences(&self) -> usize {
        self.sentences
    }

    /// Adds one aligned pair; the token texts must agree.
    pub fn add(&mut self, gold: &TaggedSentence, pred: &TaggedSentence) -> Result<(), TokenMismatch> {
        if let Some(token) = first_divergence(gold, pred) {
            return Err(TokenMismatch::Tokens {
                sentence: self.sentences,
                token,
            });
        }
        self.sentences += 1;
        let ge = gold.entities();
        let pe = pred.entities();
        for (slot, class) in EntityClass::ALL.into_iter().enumerate() {
            let gs: Vec<(usize, usize)> = ge.iter().filter(|e| e.2 == class).map(|e| (e.0, e.1)).collect();
            let ps: Vec<(usize, usize)> = pe.iter().filter(|e| e.2 == class).map(|e| (e.0, e.1)).collect();
            let t = &mut self.tallies[slot];
            t.gold += gs.len() as u64;
            t.predicted += ps.len() as u64;
            t.credit += match self.mode {
                ScoreMode::Strict => ps.iter().filter(|e| gs.contains(e)).count() as f64,
                ScoreMode::Partial => partial_credit(&gs, &ps),
            };
        }
        Ok(())
    }

    pub fn finish(&self) -> Score {
        let mut total = Tally::default();
        let mut per_class = BTreeMap::new();
        for (slot, class) in EntityClass::ALL.into_iter().enumerate() {
            total.add(&self.tallies[slot]);
            per_class.insert(class, ClassScore::from(self.tallies[slot]));
        }
        Score {
            mode: self.mode,
            precision: total.precision(),
            recall: total.recall(),
            f1: total.f1(),
            tally: total,
            per_class,
        }
    }
}

/// Scores `pred` against `gold`. Both must contain the same token sequence.
pub fn score(gold: &[TaggedSentence], pred: &[TaggedSentence], mode: ScoreMode) -> Result<Score, TokenMismatch> {
    if gold.len() != pred.len() {
        return Err(TokenMismatch::SentenceCount {
            gold: gold.len(),
            predicted: pred.len(),
        });
    }
    let mut scorer = Scorer::new(mode);
    for (g, p) in gold.iter().zip(pred) {
        scorer.add(g, p)?;
    }
    Ok(scorer.finish())
}

fn first_divergence(g: &TaggedSentence, p: &TaggedSentence) -> Option<usize> {
    let n = g.tokens.len().min(p.tokens.len());
    (0..n)
        .find(|&k| g.tokens[k].text != p.tokens[k].text)
        .or((g.tokens.len() != p.tokens.len()).then_some(n))
}

fn partial_credit(gold: &[(usize, usize)], pred: &[(usize, usize)]) -> f64 {
    // (exact, credit numerator, gold length, gold index, pred index)
    let mut pairs: Vec<(bool, usize, usize, usize, usize)> = Vec::new();
    for (gi, g) in gold.iter().enumerate() {
        for (pi, p) in pred.iter().enumerate() {
            let overlap = g.1.min(p.1).saturating_sub(g.0.max(p.0));
            if overlap > 0 {
                pairs.push((g == p, overlap, g.1 - g.0, gi, pi));
            }
        }
    }
    // Exact first, then larger credit (compared as exact fractions), then
    // position for determinism.
    pairs.sort_by(|a, b| {
        b.0.cmp(&a.0)
            .then_with(|| (b.1 * a.2).cmp(&(a.1 * b.2)))
            .then_with(|| (a.3, a.4).cmp(&(b.3, b.4)))
    });
    let mut gold_used = alloc::vec![false; gold.len()];
    let mut pred_used = alloc::vec![false; pred.len()];
    let mut credit = 0.0;
    for (_, overlap, len, gi, pi) in pairs {
        if !gold_used[gi] && !pred_used[pi] {
            gold_used[gi] = true;
            pred_used[pi] = true;
            credit += overlap as f64 / len as f64;
        }
    }
    credit
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bio::{BioTag, TaggedToken};
    use crate::catalog::EntityClass::*;
    use alloc::vec;

    fn sentence(tags: &[BioTag]) -> TaggedSentence {
        TaggedSentence {
            tokens: tags
                .iter()
                .enumerate()
                .map(|(i, &t)| TaggedToken::new(alloc::format!("w{i}"), t, None))
                .collect(),
        }
    }

    fn with_entities(n: usize, ents: &[(usize, usize, EntityClass)]) -> TaggedSentence {
        let mut tags = vec![BioTag::Outside; n];
        for &(s, e, c) in ents {
            tags[s] = BioTag::Begin(c);
            for t in &mut tags[s + 1..e] {
                *t = BioTag::Inside(c);
            }
        }
        sentence(&tags)
    }

    #[test]
    fn reference_f1() {
        assert!((f1(0.7753, 0.5976) - 0.6749).abs() < 1e-4);
        assert_eq!(f1(0.0, 0.0), 0.0);
    }

    #[test]
    fn identity_is_perfect() {
        let g = vec![with_entities(10, &[(0, 2, Person), (5, 8, Location)])];
        for mode in [ScoreMode::Strict, ScoreMode::Partial] {
            let s = score(&g, &g, mode).unwrap();
            assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn hand_counted_strict() {
        let g = vec![with_entities(10, &[(0, 2, Person), (5, 8, Location)])];
        let p = vec![with_entities(10, &[(0, 2, Person), (9, 10, Location)])];
        let s = score(&g, &p, ScoreMode::Strict).unwrap();
        assert_eq!(s.tally.credit, 1.0);
        assert_eq!(s.tally.false_positives(), 1.0);
        assert_eq!(s.tally.false_negatives(), 1.0);
        assert_eq!((s.precision, s.recall, s.f1), (0.5, 0.5, 0.5));
        assert_eq!(s.per_class[&Person].f1, 1.0);
        assert_eq!(s.per_class[&Organization].tally, Tally::default());
    }

    #[test]
    fn partial_credits_overlap() {
        let g = vec![with_entities(10, &[(5, 8, Location)])];
        let p = vec![with_entities(10, &[(6, 8, Location)])];
        let strict = score(&g, &p, ScoreMode::Strict).unwrap();
        let partial = score(&g, &p, ScoreMode::Partial).unwrap();
        assert_eq!(strict.f1, 0.0);
        assert!((partial.tally.credit - 2.0 / 3.0).abs() < 1e-12);
        // class must agree
        let p = vec![with_entities(10, &[(5, 8, Person)])];
        assert_eq!(score(&g, &p, ScoreMode::Partial).unwrap().tally.credit, 0.0);
    }

    #[test]
    fn gold_credited_once() {
        let g = vec![with_entities(10, &[(0, 4, Person)])];
        let p = vec![with_entities(10, &[(0, 2, Person), (2, 4, Person)])];
        let s = score(&g, &p, ScoreMode::Partial).unwrap();
        assert_eq!(s.tally.credit, 0.5);
    }

    #[test]
    fn wide_prediction_credited_against_one_gold() {
        let g = vec![with_entities(6, &[(0, 2, Person), (2, 4, Person)])];
        let p = vec![with_entities(6, &[(0, 4, Person)])];
        let s = score(&g, &p, ScoreMode::Partial).unwrap();
        assert_eq!(s.tally.credit, 1.0);
        assert_eq!((s.precision, s.recall), (1.0, 0.5));
    }

    #[test]
    fn mismatch_identifies_sentence() {
        let g = vec![sentence(&[BioTag::Outside]), sentence(&[BioTag::Outside; 2])];
        let mut p = g.clone();
        p[1].tokens[1].text = "other".into();
        assert_eq!(
            score(&g, &p, ScoreMode::Strict).unwrap_err(),
            TokenMismatch::Tokens { sentence: 1, token: 1 }
        );
        assert!(matches!(
            score(&g, &p[..1], ScoreMode::Strict),
            Err(TokenMismatch::SentenceCount { .. })
        ));
        p[1].tokens.pop();
        assert_eq!(
            score(&g, &p, ScoreMode::Strict).unwrap_err(),
            TokenMismatch::Tokens { sentence: 1, token: 1 }
        );
    }

    #[test]
    fn empty_prediction_scores_zero() {
        let g = vec![with_entities(3, &[(0, 1, Organization)])];
        let p = vec![with_entities(3, &[])];
        let s = score(&g, &p, ScoreMode::Strict).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
    }
}
