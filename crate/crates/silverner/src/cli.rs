//! Command-line interface: `build`, `stats`, `score` and `inspect`.
//!
//! Exit status: 0 on success, 1 on fatal configuration or I/O errors, 2 on
//! validation failures (malformed corpus files, token mismatch between the
//! scored corpora).

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use silverner_core::score::{ScoreMode, Scorer, TokenMismatch};
use silverner_core::stats::StatsAccumulator;

use crate::config::{PartialConfig, PipelineConfig};
use crate::corpus_io::{CorpusFile, CorpusReadError};
use crate::pipeline::run_build;
use crate::report::{render_inspect, render_score, render_stats, Format};

#[derive(Parser, Debug)]
#[command(
    name = "silverner",
    version,
    about = "Silver-standard NER corpora from Wikipedia dumps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a BIO corpus from a dump and an entity catalog.
    Build(BuildArgs),
    /// Report statistics of a corpus.
    Stats {
        corpus: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Entity-level precision, recall and F1 of a corpus against a gold one.
    Score {
        gold: PathBuf,
        pred: PathBuf,
        #[arg(long, value_enum, default_value = "strict")]
        mode: Mode,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Print a range of sentences in a readable layout.
    Inspect {
        corpus: PathBuf,
        /// Index of the first sentence (0-based).
        #[arg(long, default_value_t = 0)]
        from: usize,
        /// Number of sentences to print.
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Strict,
    Partial,
}

impl From<Mode> for ScoreMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Strict => ScoreMode::Strict,
            Mode::Partial => ScoreMode::Partial,
        }
    }
}

#[derive(Args, Debug, Default)]
pub struct BuildArgs {
    /// TOML file with the same settings; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// MediaWiki XML export, plain or gzip-compressed.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    /// Entity catalog (JSON Lines).
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Corpus output path; sidecars are written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Command line of the auxiliary tagger worker.
    #[arg(long)]
    pub aux_cmd: Option<String>,
    /// Seconds to wait for one auxiliary tagger response.
    #[arg(long)]
    pub aux_timeout: Option<u64>,
    /// Add the Anot/Pred origin column to entity tokens.
    #[arg(long)]
    pub with_origin: bool,
    /// Template-name prefixes to remove (one per line).
    #[arg(long)]
    pub blocklist: Option<PathBuf>,
    /// Abbreviations that do not end sentences (one per line).
    #[arg(long)]
    pub abbrev: Option<PathBuf>,
    /// Match names of the whole catalog, not only of linked entities.
    #[arg(long)]
    pub global_match: bool,
    /// Format of the summary printed on standard output.
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

impl BuildArgs {
    fn flags(&self) -> PartialConfig {
        PartialConfig {
            dump: self.dump.clone(),
            catalog: self.catalog.clone(),
            out: self.out.clone(),
            workers: self.workers,
            aux_cmd: self.aux_cmd.clone(),
            aux_timeout_secs: self.aux_timeout,
            with_origin: self.with_origin.then_some(true),
            blocklist: self.blocklist.clone(),
            abbrev: self.abbrev.clone(),
            global_match: self.global_match.then_some(true),
        }
    }
}

/// Error with its exit status.
#[derive(Debug)]
pub enum Failure {
    Fatal(anyhow::Error),
    Validation(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Fatal(_) => 1,
            Failure::Validation(_) => 2,
        }
    }
}

fn fatal(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Fatal(e.into())
}

impl From<CorpusReadError> for Failure {
    fn from(e: CorpusReadError) -> Self {
        match e {
            CorpusReadError::Io { .. } => Failure::Fatal(e.into()),
            CorpusReadError::Format { .. } => Failure::Validation(e.into()),
        }
    }
}

/// Runs one command, writing its report to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Build(args) => build(args, out),
        Command::Stats { corpus, format } => {
            let mut acc = StatsAccumulator::new();
            for s in CorpusFile::open(&corpus)? {
                acc.add_sentence(&s?);
            }
            out.write_all(render_stats(&acc.finish(), format).as_bytes())
                .map_err(fatal)
        }
        Command::Score {
            gold,
            pred,
            mode,
            format,
        } => {
            let mut scorer = Scorer::new(mode.into());
            let mut g = CorpusFile::open(&gold)?;
            let mut p = CorpusFile::open(&pred)?;
            loop {
                match (g.next().transpose()?, p.next().transpose()?) {
                    (None, None) => break,
                    (Some(gs), Some(ps)) => scorer.add(&gs, &ps).map_err(|e| mismatch(e, &gold, &pred))?,
                    (gs, _) => {
                        let n = scorer.sentences();
                        let (longer, shorter) = if gs.is_some() { (&gold, &pred) } else { (&pred, &gold) };
                        return Err(Failure::Validation(anyhow::anyhow!(
                            "{} has more sentences than {}: they diverge at sentence {n} (0-based)",
                            longer.display(),
                            shorter.display()
                        )));
                    }
                }
            }
            out.write_all(render_score(&scorer.finish(), format).as_bytes())
                .map_err(fatal)
        }
        Command::Inspect { corpus, from, count } => {
            let mut picked = Vec::new();
            for (i, s) in CorpusFile::open(&corpus)?.enumerate().take(from.saturating_add(count)) {
                let s = s?;
                if i >= from {
                    picked.push((i, s));
                }
            }
            let text = render_inspect(picked.iter().map(|(i, s)| (*i, s)));
            out.write_all(text.as_bytes()).map_err(fatal)
        }
    }
}

fn mismatch(e: TokenMismatch, gold: &std::path::Path, pred: &std::path::Path) -> Failure {
    Failure::Validation(anyhow::anyhow!(
        "{} and {} do not share tokens: {e}",
        gold.display(),
        pred.display()
    ))
}

fn build(args: BuildArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let file = match &args.config {
        Some(p) => PartialConfig::from_toml_file(p).map_err(fatal)?,
        None => PartialConfig::default(),
    };
    let cfg = PipelineConfig::resolve(file.overlay(args.flags())).map_err(fatal)?;
    cfg.validate_paths().map_err(fatal)?;
    let provenance = run_build(&cfg).map_err(fatal)?;
    let summary = match args.format {
        Format::Json => serde_json::to_string_pretty(&provenance).expect("provenance serializes") + "\n",
        Format::Text => {
            let run = &provenance.run;
            let mut s = format!(
                "wrote {} ({} sentences, {} tokens)\n\
                 articles: {} read, {} processed, {} quarantined; pages skipped: {}\n\n",
                cfg.out.display(),
                run.stats.sentence_count,
                run.stats.token_count,
                run.dump.articles,
                run.processed,
                run.quarantined.len(),
                run.dump.skipped()
            );
            s.push_str(&render_stats(&run.stats, Format::Text));
            s
        }
    };
    out.write_all(summary.as_bytes()).map_err(fatal)
}

/// Entry point shared by the binary: parses `args`, runs, reports errors on
/// standard error and maps them to the exit status.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(cli, &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Fatal(e) | Failure::Validation(e)) = &f;
            eprintln!("silverner: {e:#}");
            ExitCode::from(f.exit_code())
        }
    }
}
