//! Rendering of statistics, scores and corpus excerpts.

use std::fmt::Write;

use silverner_core::score::Score;
use silverner_core::stats::CorpusStats;
use silverner_core::TaggedSentence;

/// Output format of reports.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

/// Pretty-printed JSON report with a trailing newline.
pub fn stats_json(stats: &CorpusStats) -> String {
    serde_json::to_string_pretty(stats).expect("statistics serialize") + "\n"
}

pub fn parse_stats_json(text: &str) -> Result<CorpusStats, serde_json::Error> {
    serde_json::from_str(text)
}

pub fn render_stats(stats: &CorpusStats, format: Format) -> String {
    match format {
        Format::Json => stats_json(stats),
        Format::Text => silverner_core::stats::render_text(stats),
    }
}

pub fn render_score(score: &Score, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(score).expect("score serializes") + "\n",
        Format::Text => {
            let mut s = String::new();
            let mode = match score.mode {
                silverner_core::score::ScoreMode::Strict => "strict",
                silverner_core::score::ScoreMode::Partial => "partial",
            };
            let _ = writeln!(s, "Entity-level scores ({mode} matching)");
            let _ = writeln!(
                s,
                "  {:<8}{:>10}{:>10}{:>10}{:>12}{:>8}{:>8}",
                "Class", "P", "R", "F1", "Credit", "Gold", "Pred"
            );
            let row = |s: &mut String, name: &str, p: f64, r: f64, f: f64, t: &silverner_core::score::Tally| {
                let _ = writeln!(
                    s,
                    "  {:<8}{:>9.2}%{:>9.2}%{:>9.2}%{:>12.2}{:>8}{:>8}",
                    name,
                    p * 100.0,
                    r * 100.0,
                    f * 100.0,
                    t.credit,
                    t.gold,
                    t.predicted
                );
            };
            for (class, c) in &score.per_class {
                row(&mut s, class.code(), c.precision, c.recall, c.f1, &c.tally);
            }
            row(&mut s, "ALL", score.precision, score.recall, score.f1, &score.tally);
            s
        }
    }
}

/// Human-readable dump of numbered sentences: one token per line with its
/// tag and origin in aligned columns.
pub fn render_inspect<'a, I>(sentences: I) -> String
where
    I: IntoIterator<Item = (usize, &'a TaggedSentence)>,
{
    let mut s = String::new();
    for (n, sentence) in sentences {
        let width = sentence
            .tokens
            .iter()
            .map(|t| t.text.chars().count())
            .max()
            .unwrap_or(0);
        let plain: Vec<&str> = sentence.tokens.iter().map(|t| t.text.as_str()).collect();
        let _ = writeln!(s, "# sentence {n} ({} tokens)", sentence.tokens.len());
        let _ = writeln!(s, "# {}", plain.join(" "));
        for t in &sentence.tokens {
            let pad = width - t.text.chars().count();
            let _ = write!(s, "  {}{}  {}", t.text, " ".repeat(pad), t.tag);
            if let Some(o) = t.origin {
                let _ = write!(s, "\t{o}");
            }
            s.push('\n');
        }
        s.push('\n');
    }
    s
}
