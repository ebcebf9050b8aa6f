//! Acceptance report: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Every tolerance and limit is pinned below.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::Arc;
use std::time::{Duration, Instant};

use silverner::aux::{AuxCommand, AuxCounters, AuxTagger};
use silverner_core::annotate::Annotator;
use silverner_core::catalog::{EntityClass, EntityRecord};
use silverner_core::clean::TemplateBlocklist;
use silverner_core::corpus::corpus_to_string;
use silverner_core::mention::{match_mentions, merge_predicted};
use silverner_core::score::f1;
use silverner_core::span::Span;
use silverner_core::stats::{percent_truncated, TagCounts};
use silverner_core::tokenize::{segment, Abbreviations, RuleTokenizer};
use silverner_core::wiki::Article;
use silverner_core::{project_bio, EntityCatalog, Origin};

mod common;
#[path = "../../core/tests/props/mod.rs"]
mod props;

/// Wall-clock limit for each single-example check.
const EXAMPLE_LIMIT: Duration = Duration::from_secs(1);
/// Largest allowed deviation of a share, in percentage points.
const SHARE_TOLERANCE_PP: f64 = 0.01;
const F1_EXPECTED: f64 = 0.6749;
const F1_TOLERANCE: f64 = 0.0001;
/// Synthetic scale run.
const SCALE_ARTICLES: usize = 10_000;
const SCALE_TOKENS_PER_ARTICLE: usize = 200;
const SCALE_LIMIT: Duration = Duration::from_secs(60);
/// Peak resident memory on the full scale run may exceed the peak on a run
/// four times smaller by at most this factor.
const MEMORY_GROWTH_LIMIT: f64 = 1.5;

type Outcome = Result<String, String>;
type Check = (&'static str, fn() -> Outcome);

fn main() {
    let checks: [Check; 7] = [
        ("single-sentence BIO output matches the reference table", table_sentence),
        ("worked example yields Anot-PER, Anot-LOC, Pred-LOC", worked_example),
        (
            "tag shares and entity-only shares from corpus-scale counts",
            share_arithmetic,
        ),
        ("F1 from precision 0.7753 and recall 0.5976", f1_identity),
        ("property suites with brute-force oracles", property_suites),
        ("fixture build byte-identical for 1, 4 and 16 workers", determinism),
        ("10,000 synthetic articles in bounded time and constant memory", scale),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS  {name} ({detail})"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

fn within_limit(started: Instant, limit: Duration) -> Result<Duration, String> {
    let took = started.elapsed();
    if took < limit {
        Ok(took)
    } else {
        Err(format!("took {took:?}, limit {limit:?}"))
    }
}

fn two_entity_catalog() -> EntityCatalog {
    let records = vec![
        EntityRecord::new("dbr:John_Smith", EntityClass::Person, 1, "John Smith", ["John Smith"]).unwrap(),
        EntityRecord::new(
            "dbr:Rio_de_Janeiro",
            EntityClass::Location,
            2,
            "Rio de Janeiro",
            ["Rio de Janeiro"],
        )
        .unwrap(),
    ];
    EntityCatalog::from_records(records).unwrap().0
}

fn table_sentence() -> Outcome {
    const EXPECTED: &str = "John\tB-PER\nSmith\tI-PER\nwent\tO\nto\tO\nRio\tB-LOC\nde\tI-LOC\nJaneiro\tI-LOC\n.\tO\n\n";
    let started = Instant::now();
    let text = "John Smith went to Rio de Janeiro .";
    let index = two_entity_catalog().name_index(None);
    let mentions = match_mentions(text, &index);
    let spans: Vec<Span> = mentions.iter().map(|m| m.span).collect();
    let tokenizer = RuleTokenizer::new(Abbreviations::builtin());
    let sentences = segment(&tokenizer, text, &spans);
    let tagged = project_bio(text, &sentences, &mentions).map_err(|e| e.to_string())?;
    let out = corpus_to_string(&tagged, false);
    if out != EXPECTED {
        return Err(format!("got {out:?}"));
    }
    let took = within_limit(started, EXAMPLE_LIMIT)?;
    Ok(format!("8 lines + blank line byte-exact in {took:?}"))
}

fn worked_example() -> Outcome {
    let started = Instant::now();
    let catalog = two_entity_catalog();
    let blocklist = TemplateBlocklist::builtin();
    let tokenizer = RuleTokenizer::new(Abbreviations::builtin());
    let annotator = Annotator {
        catalog: &catalog,
        blocklist: &blocklist,
        tokenizer: &tokenizer,
        global_index: None,
    };
    let article = Article {
        id: 100,
        title: "Viagem".into(),
        wikitext: "[[John Smith]] travelled to [[Rio de Janeiro]]. Visited Copacabana.".into(),
    };
    let prepared = annotator.prepare(&article);
    let cmd = AuxCommand::parse(&common::stub_cmd("")).ok_or("empty stub command")?;
    let mut tagger =
        AuxTagger::start(cmd, Duration::from_secs(10), Arc::new(AuxCounters::default())).map_err(|e| e.to_string())?;
    let predicted = tagger.predict(&prepared.text);
    let merged = merge_predicted(prepared.annotated.clone(), predicted);
    let got: Vec<(&str, Origin, EntityClass)> = merged
        .iter()
        .map(|m| (m.span.slice(&prepared.text), m.origin, m.class))
        .collect();
    let expected = vec![
        ("John Smith", Origin::Annotated, EntityClass::Person),
        ("Rio de Janeiro", Origin::Annotated, EntityClass::Location),
        ("Copacabana", Origin::Predicted, EntityClass::Location),
    ];
    if got != expected {
        return Err(format!("got {got:?}"));
    }
    drop(tagger);
    let took = within_limit(started, EXAMPLE_LIMIT)?;
    let labels: Vec<String> = got.iter().map(|(_, o, c)| format!("{o}-{}", c.code())).collect();
    Ok(format!("{} in {took:?}", labels.join(", ")))
}

fn share_arithmetic() -> Outcome {
    let counts = TagCounts {
        outside: 81_357_679,
        organization: 1_053_298,
        person: 1_878_838,
        location: 3_479_343,
    };
    if counts.total() != 87_769_158 {
        return Err(format!("total {} != 87,769,158", counts.total()));
    }
    let shares = counts.shares().ok_or("no tokens")?;
    let entity = counts.entity_shares().ok_or("no entity tokens")?;
    let rows = [
        ("O", shares.outside, 92.69, counts.outside, counts.total()),
        ("ORG", shares.organization, 1.20, counts.organization, counts.total()),
        ("PER", shares.person, 2.14, counts.person, counts.total()),
        ("LOC", shares.location, 3.96, counts.location, counts.total()),
        (
            "ORG/entities",
            entity.organization,
            16.42,
            counts.organization,
            counts.entity_total(),
        ),
        (
            "PER/entities",
            entity.person,
            29.30,
            counts.person,
            counts.entity_total(),
        ),
        (
            "LOC/entities",
            entity.location,
            54.26,
            counts.location,
            counts.entity_total(),
        ),
    ];
    let mut worst: f64 = 0.0;
    for (name, share, expected, part, total) in rows {
        let dev = (share * 100.0 - expected).abs();
        worst = worst.max(dev);
        if dev > SHARE_TOLERANCE_PP {
            return Err(format!("{name}: {:.4}% vs {expected}%", share * 100.0));
        }
        let shown = percent_truncated(part, total);
        if shown != format!("{expected:.2}%") {
            return Err(format!("{name}: rendered {shown}, expected {expected:.2}%"));
        }
    }
    Ok(format!("max deviation {worst:.4} pp, sum 87,769,158 exact"))
}

fn f1_identity() -> Outcome {
    let value = f1(0.7753, 0.5976);
    if (value - F1_EXPECTED).abs() <= F1_TOLERANCE {
        Ok(format!("F1 = {value:.6}"))
    } else {
        Err(format!("F1 = {value:.6}, expected {F1_EXPECTED} ± {F1_TOLERANCE}"))
    }
}

fn property_suites() -> Outcome {
    type Suite = fn(u32) -> Result<(), String>;
    let suites: [(&str, Suite); 5] = [
        ("merge", props::merge_suite),
        ("match", props::match_suite),
        ("repair", props::repair_suite),
        ("emitted", props::emitted_suite),
        ("round-trip", props::round_trip_suite),
    ];
    let mut passed = Vec::new();
    for (name, suite) in suites {
        suite(props::CASES).map_err(|e| format!("{name}: {e}"))?;
        passed.push(name);
    }
    Ok(format!(
        "{} × {} cases, inputs ≤ {} chars: {}",
        passed.len(),
        props::CASES,
        props::MAX_CHARS,
        passed.join(", ")
    ))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut first: Option<Vec<u8>> = None;
    for workers in [1, 4, 16] {
        let out = common::build_fixture(dir.path(), &format!("w{workers}.bio"), workers, true);
        let bytes = fs::read(&out).map_err(|e| e.to_string())?;
        match &first {
            None => first = Some(bytes),
            Some(f) if *f != bytes => return Err(format!("{workers} workers differ from 1 worker")),
            Some(_) => {}
        }
    }
    let bytes = first.unwrap_or_default();
    let golden = fs::read(common::fixture("expected/with_origin.bio")).map_err(|e| e.to_string())?;
    if bytes != golden {
        return Err("output differs from the golden corpus".into());
    }
    Ok(format!(
        "{} bytes, sha256 {}",
        bytes.len(),
        silverner::digest::fingerprint_of(&bytes).sha256
    ))
}

// ----------------------------------------------------------------- scale

const ENTITIES: usize = 600;

fn entity_name(k: usize) -> (String, &'static str) {
    match k % 3 {
        0 => (format!("Pessoa Nome{k}"), "PER"),
        1 => (format!("Cidade de Lugar{k}"), "LOC"),
        _ => (format!("Empresa Grupo{k}"), "ORG"),
    }
}

fn write_scale_catalog(path: &Path) -> std::io::Result<()> {
    let mut s = String::new();
    for k in 0..ENTITIES {
        let (name, class) = entity_name(k);
        let _ = writeln!(
            s,
            r#"{{"id":"e{k}","class":"{class}","wiki_id":{},"title":"{name}","names":["{name}"]}}"#,
            k + 1
        );
    }
    fs::write(path, s)
}

/// One article of roughly [`SCALE_TOKENS_PER_ARTICLE`] tokens with links,
/// plain mentions, templates, references and a trailing section.
fn scale_article(i: usize) -> String {
    const FILLER: [&str; 12] = [
        "o",
        "relatório",
        "anual",
        "descreve",
        "a",
        "história",
        "da",
        "região",
        "com",
        "muitos",
        "detalhes",
        "curiosos",
    ];
    let mut text = String::from("{{Info/Genérico|nome=Exemplo|ano=1999}}\n");
    let mut tokens = 0;
    let mut s = 0;
    while tokens < SCALE_TOKENS_PER_ARTICLE {
        let (a, _) = entity_name((i * 7 + s * 3) % ENTITIES);
        let (b, _) = entity_name((i * 11 + s * 5 + 1) % ENTITIES);
        let _ = write!(text, "[[{a}]] visitou {b} em {} ", 1900 + (i + s) % 120);
        tokens += a.split(' ').count() + b.split(' ').count() + 3;
        for w in 0..12 {
            text.push_str(FILLER[(i + s + w) % FILLER.len()]);
            text.push(' ');
        }
        tokens += 12;
        text.push_str("&lt;ref&gt;Fonte.&lt;/ref&gt;. ");
        tokens += 1;
        s += 1;
    }
    text.push_str("\n\n== Referências ==\n* Livro.\n");
    text
}

fn write_scale_dump(path: &Path, articles: usize) -> std::io::Result<()> {
    use std::io::Write;
    let mut w = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(w, "<mediawiki><siteinfo><sitename>Teste</sitename></siteinfo>")?;
    for i in 0..articles {
        let (title, _) = entity_name(i % ENTITIES);
        writeln!(
            w,
            "<page><title>{title} {i}</title><ns>0</ns><id>{}</id><revision><id>{}</id>\
             <text xml:space=\"preserve\">{}</text></revision></page>",
            100_000 + i,
            200_000 + i,
            scale_article(i)
        )?;
    }
    writeln!(w, "</mediawiki>")?;
    w.flush()
}

/// Runs a build as a child process and returns its wall time and peak
/// resident set size in kilobytes.
fn measured_build(dump: &Path, catalog: &Path, out: &Path) -> Result<(Duration, u64), String> {
    let started = Instant::now();
    let child = Command::new(env!("CARGO_BIN_EXE_silverner"))
        .env("RUST_LOG", "error")
        .arg("build")
        .arg("--dump")
        .arg(dump)
        .arg("--catalog")
        .arg(catalog)
        .arg("--out")
        .arg(out)
        .arg("--workers")
        .arg("4")
        .stdout(Stdio::null())
        .spawn()
        .map_err(|e| e.to_string())?;
    let pid = child.id() as libc::pid_t;
    let mut status: libc::c_int = 0;
    // SAFETY: `rusage` is plain data that wait4 fills in; `pid` is our own
    // unreaped child, which `child` will not wait on afterwards.
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    let rc = unsafe { libc::wait4(pid, &mut status, 0, &mut usage) };
    let took = started.elapsed();
    if rc != pid {
        return Err(format!("wait4 failed: {}", std::io::Error::last_os_error()));
    }
    if !libc::WIFEXITED(status) || libc::WEXITSTATUS(status) != 0 {
        return Err(format!("build exited with status {status}"));
    }
    Ok((took, usage.ru_maxrss as u64))
}

fn scale() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let catalog = dir.path().join("catalog.jsonl");
    write_scale_catalog(&catalog).map_err(|e| e.to_string())?;
    let small = dir.path().join("small.xml");
    let large = dir.path().join("large.xml");
    write_scale_dump(&small, SCALE_ARTICLES / 4).map_err(|e| e.to_string())?;
    write_scale_dump(&large, SCALE_ARTICLES).map_err(|e| e.to_string())?;

    let (_, small_rss) = measured_build(&small, &catalog, &dir.path().join("small.bio"))?;
    let out = dir.path().join("large.bio");
    let (took, large_rss) = measured_build(&large, &catalog, &out)?;

    let prov: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("large.bio.provenance.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let processed = prov["processed"].as_u64().unwrap_or(0);
    let tokens = prov["tokens"].as_u64().unwrap_or(0);
    if processed != SCALE_ARTICLES as u64 {
        return Err(format!("processed {processed} of {SCALE_ARTICLES} articles"));
    }
    let per_article = tokens as f64 / processed as f64;
    if !(150.0..=250.0).contains(&per_article) {
        return Err(format!(
            "{per_article:.0} tokens per article, expected about {SCALE_TOKENS_PER_ARTICLE}"
        ));
    }
    if took >= SCALE_LIMIT {
        return Err(format!("took {took:?}, limit {SCALE_LIMIT:?}"));
    }
    let growth = large_rss as f64 / small_rss as f64;
    if growth > MEMORY_GROWTH_LIMIT {
        return Err(format!(
            "peak RSS {small_rss} kB for {} articles vs {large_rss} kB for {SCALE_ARTICLES} (×{growth:.2})",
            SCALE_ARTICLES / 4
        ));
    }
    let dump_mb = fs::metadata(&large).map_err(|e| e.to_string())?.len() as f64 / 1e6;
    Ok(format!(
        "{tokens} tokens from a {dump_mb:.0} MB dump in {took:.1?}; peak RSS {small_rss} kB at ¼ size, {large_rss} kB at full size"
    ))
}
