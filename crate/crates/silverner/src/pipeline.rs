//! The `build` run: dump + catalog → corpus, statistics and provenance.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::Serialize;
use silverner_core::annotate::{Annotated, Annotator, ArticleCounters};
use silverner_core::clean::TemplateBlocklist;
use silverner_core::corpus::format_sentence;
use silverner_core::stats::{CorpusStats, StatsAccumulator};
use silverner_core::tokenize::{Abbreviations, RuleTokenizer};
use silverner_core::wiki::Article;
use silverner_core::{EntityCatalog, LoadReport, NameIndex};

use crate::aux::{AuxCommand, AuxCounters, AuxError, AuxReport, AuxTagger, RESTART_BUDGET};
use crate::catalog_io::{read_catalog, CatalogLoadError};
use crate::config::PipelineConfig;
use crate::digest::{DigestHandle, Fingerprint, HashingReader, HashingWriter};
use crate::dump::{decompressing, DumpError, DumpReader, DumpStats};
use crate::ordered::process_ordered;

/// Articles in flight per worker thread.
const WINDOW_PER_WORKER: usize = 8;

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("catalog {path}: {source}")]
    Catalog { path: PathBuf, source: CatalogLoadError },
    #[error("dump: {0}")]
    Dump(#[from] DumpError),
    #[error("auxiliary tagger: {0}")]
    Aux(#[from] AuxError),
    #[error("writing corpus: {0}")]
    Write(std::io::Error),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BuildError + '_ {
    move |source| BuildError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Immutable inputs shared by all workers.
pub struct Resources {
    pub catalog: EntityCatalog,
    pub catalog_report: LoadReport,
    pub catalog_fingerprint: Fingerprint,
    pub blocklist: TemplateBlocklist,
    pub tokenizer: RuleTokenizer,
    pub global_index: Option<NameIndex>,
}

impl Resources {
    pub fn load(cfg: &PipelineConfig) -> Result<Self, BuildError> {
        let file = File::open(&cfg.catalog).map_err(io_err(&cfg.catalog))?;
        let (reader, digest) = HashingReader::new(file);
        let (catalog, catalog_report) = read_catalog(BufReader::new(reader)).map_err(|source| BuildError::Catalog {
            path: cfg.catalog.clone(),
            source,
        })?;
        for r in &catalog_report.rejected {
            log::warn!("catalog line {} rejected: {}", r.line, r.reason);
        }
        for (title, id) in &catalog_report.duplicate_titles {
            log::warn!("duplicate catalog title {title:?} (entity {id} ignored for title lookup)");
        }
        for (wiki_id, id) in &catalog_report.duplicate_wiki_ids {
            log::warn!("duplicate catalog wiki_id {wiki_id} (entity {id} ignored for page lookup)");
        }
        let blocklist = match &cfg.blocklist {
            Some(p) => TemplateBlocklist::parse(&std::fs::read_to_string(p).map_err(io_err(p))?),
            None => TemplateBlocklist::builtin(),
        };
        let abbreviations = match &cfg.abbrev {
            Some(p) => Abbreviations::parse(&std::fs::read_to_string(p).map_err(io_err(p))?),
            None => Abbreviations::builtin(),
        };
        let global_index = cfg.global_match.then(|| catalog.name_index(None));
        Ok(Resources {
            catalog,
            catalog_report,
            catalog_fingerprint: digest.fingerprint(),
            blocklist,
            tokenizer: RuleTokenizer::new(abbreviations),
            global_index,
        })
    }

    /// In-memory resources with the built-in blocklist and abbreviations,
    /// matching against linked entities only.
    pub fn with_builtins(catalog: EntityCatalog, catalog_report: LoadReport) -> Self {
        Resources {
            catalog,
            catalog_report,
            catalog_fingerprint: crate::digest::fingerprint_of(b""),
            blocklist: TemplateBlocklist::builtin(),
            tokenizer: RuleTokenizer::new(Abbreviations::builtin()),
            global_index: None,
        }
    }

    pub fn annotator(&self) -> Annotator<'_, RuleTokenizer> {
        Annotator {
            catalog: &self.catalog,
            blocklist: &self.blocklist,
            tokenizer: &self.tokenizer,
            global_index: self.global_index.as_ref(),
        }
    }
}

/// An article whose processing failed; it contributes no sentences.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Quarantined {
    pub article_id: u64,
    pub title: String,
    pub reason: String,
}

/// Everything a build run produced besides the corpus bytes.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    #[serde(rename = "pages")]
    pub dump: DumpStats,
    pub processed: u64,
    pub quarantined: Vec<Quarantined>,
    pub counters: ArticleCounters,
    pub aux: Option<AuxReport>,
    #[serde(skip)]
    pub stats: CorpusStats,
    /// Also recorded, with its path, in [`Provenance::corpus`].
    #[serde(skip)]
    pub corpus: Fingerprint,
}

/// Per-run processing options.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub workers: usize,
    pub with_origin: bool,
    pub aux: Option<(AuxCommand, Duration)>,
}

/// Streams `dump` through the annotation stages and writes the corpus to
/// `sink` in dump order. Output bytes do not depend on `workers`.
pub fn build_corpus<R, W>(
    dump: DumpReader<R>,
    resources: &Resources,
    opts: &RunOptions,
    sink: W,
) -> Result<(W, RunSummary), BuildError>
where
    R: BufRead + Send,
    W: Write,
{
    let workers = opts.workers.max(1);
    let aux_counters = Arc::new(AuxCounters::with_restart_budget(RESTART_BUDGET));
    let mut taggers: Vec<Option<AuxTagger>> = Vec::with_capacity(workers);
    for _ in 0..workers {
        taggers.push(match &opts.aux {
            Some((cmd, timeout)) => Some(AuxTagger::start(cmd.clone(), *timeout, aux_counters.clone())?),
            None => None,
        });
    }

    let dump_error: Mutex<Option<DumpError>> = Mutex::new(None);
    let dump_stats: Mutex<DumpStats> = Mutex::new(DumpStats::default());
    let articles = ArticleFeed {
        reader: dump,
        error: &dump_error,
        stats: &dump_stats,
    };

    let annotator = resources.annotator();
    let mut out = HashingWriter::new(sink);
    let mut line = String::new();
    let mut acc = StatsAccumulator::new();
    let mut counters = ArticleCounters::default();
    let mut quarantined = Vec::new();
    let mut processed = 0u64;

    process_ordered(
        articles,
        taggers,
        workers * WINDOW_PER_WORKER,
        |tagger: &mut Option<AuxTagger>, article: &Article| {
            let prepared = annotator.prepare(article);
            let predicted = match tagger {
                Some(t) => t.predict(&prepared.text),
                None => Vec::new(),
            };
            annotator.finish(prepared, predicted)
        },
        |_, article, outcome| {
            let result: Result<Annotated, String> = match outcome {
                Ok(Ok(a)) => Ok(a),
                Ok(Err(e)) => Err(e.to_string()),
                Err(panic) => Err(format!("panic: {panic}")),
            };
            match result {
                Ok(a) => {
                    processed += 1;
                    counters.add(&a.counters);
                    for s in &a.sentences {
                        line.clear();
                        format_sentence(s, opts.with_origin, &mut line).expect("formatting into a String");
                        out.write_all(line.as_bytes()).map_err(BuildError::Write)?;
                        acc.add_sentence(s);
                    }
                }
                Err(reason) => {
                    log::warn!("article {} ({:?}) quarantined: {reason}", article.id, article.title);
                    quarantined.push(Quarantined {
                        article_id: article.id,
                        title: article.title,
                        reason,
                    });
                }
            }
            Ok::<(), BuildError>(())
        },
    )?;

    if let Some(e) = dump_error.into_inner().expect("dump error lock") {
        return Err(BuildError::Dump(e));
    }
    let (sink, corpus) = out.finish().map_err(BuildError::Write)?;
    let summary = RunSummary {
        dump: dump_stats.into_inner().expect("dump stats lock"),
        processed,
        quarantined,
        counters,
        aux: opts.aux.as_ref().map(|_| aux_counters.report()),
        stats: acc.finish(),
        corpus,
    };
    Ok((sink, summary))
}

/// Iterator adapter that stops at the first dump error and records it.
struct ArticleFeed<'a, R: BufRead> {
    reader: DumpReader<R>,
    error: &'a Mutex<Option<DumpError>>,
    stats: &'a Mutex<DumpStats>,
}

impl<R: BufRead> Iterator for ArticleFeed<'_, R> {
    type Item = Article;

    fn next(&mut self) -> Option<Article> {
        let item = self.reader.next();
        *self.stats.lock().expect("dump stats lock") = self.reader.stats();
        match item? {
            Ok(a) => Some(a),
            Err(e) => {
                *self.error.lock().expect("dump error lock") = Some(e);
                None
            }
        }
    }
}

/// Paths of the files a build writes next to the corpus.
pub struct OutputPaths {
    pub corpus: PathBuf,
    pub stats: PathBuf,
    pub provenance: PathBuf,
    pub config: PathBuf,
}

impl OutputPaths {
    pub fn for_corpus(out: &Path) -> Self {
        let with = |suffix: &str| {
            let mut s = out.as_os_str().to_owned();
            s.push(suffix);
            PathBuf::from(s)
        };
        OutputPaths {
            corpus: out.to_path_buf(),
            stats: with(".stats.json"),
            provenance: with(".provenance.json"),
            config: with(".config.toml"),
        }
    }
}

/// Identity of an input file.
#[derive(Clone, Debug, Serialize)]
pub struct InputRecord {
    pub path: PathBuf,
    #[serde(flatten)]
    pub fingerprint: Fingerprint,
}

#[derive(Clone, Debug, Serialize)]
pub struct CatalogSummary {
    #[serde(flatten)]
    pub input: InputRecord,
    pub records: usize,
    pub names: usize,
    pub ambiguous_names: usize,
    pub rejected_lines: Vec<usize>,
    pub duplicate_titles: usize,
    pub duplicate_wiki_ids: usize,
}

/// The provenance sidecar.
#[derive(Clone, Debug, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub dump: InputRecord,
    pub catalog: CatalogSummary,
    pub config: PathBuf,
    pub corpus: InputRecord,
    pub sentences: u64,
    pub tokens: u64,
    #[serde(flatten)]
    pub run: RunSummary,
}

/// Runs a full build from files, writing the corpus and its sidecars.
pub fn run_build(cfg: &PipelineConfig) -> Result<Provenance, BuildError> {
    let paths = OutputPaths::for_corpus(&cfg.out);
    let resources = Resources::load(cfg)?;
    log::info!(
        "catalog: {} records, {} names, {} ambiguous, {} rejected lines",
        resources.catalog_report.records,
        resources.catalog_report.names,
        resources.catalog_report.ambiguous_names,
        resources.catalog_report.rejected.len()
    );
    let dump_file = File::open(&cfg.dump).map_err(io_err(&cfg.dump))?;
    let (hashing, dump_digest): (_, DigestHandle) = HashingReader::new(dump_file);
    let input = decompressing(BufReader::with_capacity(1 << 16, hashing)).map_err(io_err(&cfg.dump))?;
    let opts = RunOptions {
        workers: cfg.workers,
        with_origin: cfg.with_origin,
        aux: match &cfg.aux_cmd {
            Some(line) => {
                let cmd = AuxCommand::parse(line).ok_or(AuxError::Protocol("empty command".into()))?;
                Some((cmd, Duration::from_secs(cfg.aux_timeout_secs)))
            }
            None => None,
        },
    };

    let corpus_file = File::create(&paths.corpus).map_err(io_err(&paths.corpus))?;
    let (writer, run) = build_corpus(DumpReader::new(input), &resources, &opts, BufWriter::new(corpus_file))?;
    writer
        .into_inner()
        .map_err(|e| BuildError::Write(e.into_error()))?
        .sync_all()
        .map_err(BuildError::Write)?;

    log::info!(
        "dump: {} pages, {} articles, {} skipped; processed {}, quarantined {}",
        run.dump.pages,
        run.dump.articles,
        run.dump.skipped(),
        run.processed,
        run.quarantined.len()
    );
    log::info!("counters: {:?}", run.counters);

    write_file(&paths.stats, &crate::report::stats_json(&run.stats))?;
    write_file(&paths.config, &cfg.to_toml())?;
    let report = &resources.catalog_report;
    let provenance = Provenance {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        dump: InputRecord {
            path: cfg.dump.clone(),
            fingerprint: dump_digest.fingerprint(),
        },
        catalog: CatalogSummary {
            input: InputRecord {
                path: cfg.catalog.clone(),
                fingerprint: resources.catalog_fingerprint.clone(),
            },
            records: report.records,
            names: report.names,
            ambiguous_names: report.ambiguous_names,
            rejected_lines: report.rejected.iter().map(|r| r.line).collect(),
            duplicate_titles: report.duplicate_titles.len(),
            duplicate_wiki_ids: report.duplicate_wiki_ids.len(),
        },
        config: paths.config.clone(),
        corpus: InputRecord {
            path: paths.corpus.clone(),
            fingerprint: run.corpus.clone(),
        },
        sentences: run.stats.sentence_count,
        tokens: run.stats.token_count,
        run,
    };
    let json = serde_json::to_string_pretty(&provenance).expect("provenance serializes");
    write_file(&paths.provenance, &(json + "\n"))?;
    Ok(provenance)
}

fn write_file(path: &Path, contents: &str) -> Result<(), BuildError> {
    std::fs::write(path, contents).map_err(io_err(path))
}
